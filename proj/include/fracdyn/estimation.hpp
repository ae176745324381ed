#pragma once

// Joint estimation of the system matrix and sparse unknown inputs by
// alternating lasso input estimates with per-state least-squares refits.

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "fracdyn/fraccore.hpp"
#include "fracdyn/numerics.hpp"

namespace fracdyn {

// ---------------------------------------------------------------------------
// Fractional-order pre-estimation

struct ScaleRange {
  std::size_t min_level = 2;
  std::size_t max_level = 7;
};

// alpha = slope_factor * beta + offset, beta being the log2 wavelet-variance slope.
struct SlopeToAlphaMap {
  double slope_factor = 0.5;
  double offset = 0.5;
};

struct AlphaEstimate {
  FractionalOrders alpha;
  Vector slopes;                      // per channel
  std::vector<Vector> residuals;      // per channel, one entry per level
};

class AlphaEstimator {
 public:
  virtual ~AlphaEstimator() = default;
  virtual AlphaEstimate estimate(const Matrix& states) const = 0;
};

// Regresses log2 of the Haar detail-coefficient variance on the dyadic level
// (weighted by coefficient count) and maps the slope to an order.
class HaarSlopeEstimator final : public AlphaEstimator {
 public:
  explicit HaarSlopeEstimator(ScaleRange range = {}, SlopeToAlphaMap map = {});
  AlphaEstimate estimate(const Matrix& states) const override;

  const ScaleRange& range() const { return range_; }

 private:
  ScaleRange range_;
  SlopeToAlphaMap map_;
};

// Haar detail coefficients of `signal` at dyadic level j (block length 2^j),
// normalized by 2^{-j/2}.
Vector haar_details(const Vector& signal, std::size_t level);

AlphaEstimate estimate_alpha(const Matrix& states, ScaleRange range = {},
                             SlopeToAlphaMap map = {});

// ---------------------------------------------------------------------------
// Alternating estimation

struct EmConfig {
  double lambda = 1.0;      // sparsity weight of the Laplace prior
  double sigma2 = 1.0;      // noise variance, held fixed
  std::size_t max_iterations = 50;
  // Absolute objective-change threshold; defaults to 1e-6 * initial objective.
  std::optional<double> objective_tol;
  // Truncation J of the fractional difference; defaults to min(T, 64).
  std::optional<std::size_t> truncation;
  LassoConfig lasso;        // its penalty is overwritten by penalty()
  // Skips the lasso and keeps every input at zero (no-input baseline).
  bool force_zero_inputs = false;

  double penalty() const { return 2.0 * sigma2 * lambda; }
  void validate() const;
};

struct RowRegression {
  Matrix a;
  std::size_t rank = 0;
  bool underdetermined = false;  // fewer samples than regressors, or rank deficient
};

// Row i of the result is argmin_a ||target_i - X a||^2 (minimum norm).
RowRegression regress_rows(const Matrix& target, const Matrix& regressors);

// No-input estimate: regress each column of Z on X.
Matrix init_A(const Matrix& z, const Matrix& x);

// Row k of the result solves min_u ||z[k] - A x[k] - B u||^2 + lambda' ||u||_1.
// Rows are solved independently; `warm_start` seeds coordinate descent.
Matrix e_step(const Matrix& a, const Matrix& b, const Matrix& z, const Matrix& x,
              const EmConfig& cfg, const Matrix* warm_start = nullptr);

// Least squares on the input-corrected targets Z - U B^T.
Matrix m_step(const Matrix& z, const Matrix& x, const Matrix& u, const Matrix& b);

// sum_k ||z[k] - A x[k] - B u[k]||^2 + lambda' sum_k ||u[k]||_1
double em_objective(const Matrix& a, const Matrix& b, const Matrix& z,
                    const Matrix& x, const Matrix& u, double penalty);

struct EmEstimate {
  FractionalOrders alpha;
  Matrix a_hat;
  Matrix u_hat;                        // (T-1) x p
  Matrix a_init;                       // no-input fit the iteration started from
  std::vector<double> objective_trace; // [F(A_init, 0), F after iteration 1, ...]
  std::size_t iterations_run = 0;
  std::size_t truncation = 0;
  bool converged = false;
  bool underdetermined = false;
};

// `initial_inputs` replaces the no-input start: the first M-step is taken
// from those inputs instead of from zero.
EmEstimate run_em(const Matrix& states, const Matrix& b, const EmConfig& cfg,
                  std::optional<FractionalOrders> alpha = std::nullopt,
                  std::optional<Matrix> initial_inputs = std::nullopt,
                  const AlphaEstimator* alpha_estimator = nullptr);

// Rolls the recursion forward `steps` steps from the end of `history`
// (rows are consecutive states, last row is the current state). The memory
// term uses the last J-1 samples, zero-padded. `future_inputs` rows feed
// u for each step; missing rows are taken as zero.
Matrix predict(const SystemModel& model, const Matrix& history, std::size_t steps,
               std::size_t truncation,
               const std::optional<Matrix>& future_inputs = std::nullopt);

// In-sample one-step predictions of x[1..T-1] from the data itself, using
// inputs `u` (rows 0..T-2; pass a zero matrix for the no-input model).
Matrix one_step_predictions(const SystemModel& model, const Matrix& states,
                            const Matrix& u, std::size_t truncation);

double rmse(const Matrix& predicted, const Matrix& actual);

}  // namespace fracdyn
