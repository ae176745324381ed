#pragma once

// Dense linear-algebra primitives shared by every other module. All rank and
// pseudo-inverse tolerance policy lives here.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fracdyn/error.hpp"

namespace fracdyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Throws ArgumentError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);
void require_finite(const Vector& v, std::string_view what);

struct RankReport {
  std::size_t rank = 0;
  Vector singular_values;  // descending
  double tolerance_used = 0.0;
};

// max(rows, cols) * eps * sigma_max
double default_rank_tolerance(std::size_t rows, std::size_t cols,
                              double largest_singular_value);

RankReport numerical_rank(const Matrix& m,
                          std::optional<double> tol_override = std::nullopt);

// Minimum-norm minimizer of ||z - X a||^2 (pseudo-inverse solution).
Vector least_squares(const Matrix& x, const Vector& z,
                     std::optional<double> tol_override = std::nullopt);

// Same, for every column of Z at once: returns pinv(X) * Z.
Matrix least_squares(const Matrix& x, const Matrix& z,
                     std::optional<double> tol_override = std::nullopt);

// (X^T X + eps I)^{-1} X^T z, evaluated through the SVD of X.
Vector ridge(const Matrix& x, const Vector& z, double epsilon);

// Orthonormal basis of the column space of M (numerical rank by the default
// tolerance unless overridden). Returns a rows x rank matrix.
Matrix column_space_basis(const Matrix& m,
                          std::optional<double> tol_override = std::nullopt);

// Orthonormal basis of the null space of M, cols x (cols - rank).
Matrix null_space_basis(const Matrix& m,
                        std::optional<double> tol_override = std::nullopt);

struct LassoConfig {
  double penalty = 0.0;  // lambda' in ||r - B u||^2 + lambda' ||u||_1
  std::size_t max_iterations = 10000;
  double convergence_tol = 1e-9;

  void validate() const;
};

struct LassoResult {
  Vector u;
  std::size_t sweeps = 0;
  double optimality_residual = 0.0;
  // Objective after every coordinate sweep, starting from the initial point.
  std::vector<double> objective_trace;
};

double lasso_objective(const Matrix& b, const Vector& r, const Vector& u,
                       double penalty);

// Largest violation of the lasso subgradient optimality conditions at u.
double lasso_optimality_residual(const Matrix& b, const Vector& r,
                                 const Vector& u, double penalty);

// Cyclic coordinate descent for min ||r - B u||^2 + lambda' ||u||_1.
// Note the unhalved quadratic: with orthonormal B the solution is
// soft-thresholding of B^T r at lambda'/2. A zero penalty is routed to
// least_squares. Throws LassoNonConvergence when max_iterations sweeps do
// not bring the optimality residual under convergence_tol.
LassoResult lasso_solve(const Matrix& b, const Vector& r, const LassoConfig& cfg,
                        std::optional<Vector> warm_start = std::nullopt);

inline Vector lasso(const Matrix& b, const Vector& r, const LassoConfig& cfg) {
  return lasso_solve(b, r, cfg).u;
}

double soft_threshold(double value, double level);

}  // namespace fracdyn
