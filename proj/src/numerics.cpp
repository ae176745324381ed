#include "fracdyn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fracdyn {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

using Svd = Eigen::BDCSVD<Matrix>;

Svd checked_svd(const Matrix& m, unsigned int options) {
  Svd svd(m, options);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("singular value decomposition failed to converge");
  }
  if (!svd.singularValues().allFinite()) {
    throw NumericalError("singular value decomposition produced non-finite values");
  }
  return svd;
}

double tolerance_for(const Matrix& m, const Vector& sv,
                     std::optional<double> tol_override) {
  if (tol_override) {
    if (!(*tol_override >= 0.0)) {
      throw ArgumentError("rank tolerance must be nonnegative");
    }
    return *tol_override;
  }
  const double largest = sv.size() ? sv(0) : 0.0;
  return default_rank_tolerance(static_cast<std::size_t>(m.rows()),
                                static_cast<std::size_t>(m.cols()), largest);
}

std::size_t count_above(const Vector& sv, double tol) {
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  return rank;
}

}  // namespace

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw ArgumentError(std::string(what) + " contains non-finite entries");
  }
}

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    throw ArgumentError(std::string(what) + " contains non-finite entries");
  }
}

double default_rank_tolerance(std::size_t rows, std::size_t cols,
                              double largest_singular_value) {
  return static_cast<double>(std::max(rows, cols)) * kEps * largest_singular_value;
}

RankReport numerical_rank(const Matrix& m, std::optional<double> tol_override) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw ArgumentError("numerical_rank: matrix is empty");
  }
  require_finite(m, "numerical_rank input");
  const Svd svd = checked_svd(m, 0);
  RankReport report;
  report.singular_values = svd.singularValues();
  report.tolerance_used = tolerance_for(m, report.singular_values, tol_override);
  report.rank = count_above(report.singular_values, report.tolerance_used);
  return report;
}

Matrix least_squares(const Matrix& x, const Matrix& z,
                     std::optional<double> tol_override) {
  if (x.rows() != z.rows()) {
    throw ArgumentError("least_squares: design has " + std::to_string(x.rows()) +
                        " rows but target has " + std::to_string(z.rows()));
  }
  if (x.cols() == 0) return Matrix::Zero(0, z.cols());
  if (x.rows() == 0) return Matrix::Zero(x.cols(), z.cols());
  const Svd svd = checked_svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double tol = tolerance_for(x, sv, tol_override);
  const std::size_t rank = count_above(sv, tol);
  const auto r = static_cast<Eigen::Index>(rank);
  Matrix projected = svd.matrixU().leftCols(r).transpose() * z;
  for (Eigen::Index i = 0; i < r; ++i) projected.row(i) /= sv(i);
  return svd.matrixV().leftCols(r) * projected;
}

Vector least_squares(const Matrix& x, const Vector& z,
                     std::optional<double> tol_override) {
  const Matrix solution = least_squares(x, Matrix(z), tol_override);
  return solution.col(0);
}

Vector ridge(const Matrix& x, const Vector& z, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ArgumentError("ridge: epsilon must be a positive finite number");
  }
  if (x.rows() != z.size()) {
    throw ArgumentError("ridge: design has " + std::to_string(x.rows()) +
                        " rows but target has " + std::to_string(z.size()));
  }
  if (x.cols() == 0) return Vector::Zero(0);
  if (x.rows() == 0) return Vector::Zero(x.cols());
  const Svd svd = checked_svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Vector coeffs = svd.matrixU().transpose() * z;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    coeffs(i) *= sv(i) / (sv(i) * sv(i) + epsilon);
  }
  return svd.matrixV() * coeffs;
}

Matrix column_space_basis(const Matrix& m, std::optional<double> tol_override) {
  if (m.rows() == 0 || m.cols() == 0) return Matrix::Zero(m.rows(), 0);
  const Svd svd = checked_svd(m, Eigen::ComputeThinU);
  const double tol = tolerance_for(m, svd.singularValues(), tol_override);
  const auto rank = static_cast<Eigen::Index>(count_above(svd.singularValues(), tol));
  return svd.matrixU().leftCols(rank);
}

Matrix null_space_basis(const Matrix& m, std::optional<double> tol_override) {
  if (m.cols() == 0) return Matrix::Zero(0, 0);
  if (m.rows() == 0) return Matrix::Identity(m.cols(), m.cols());
  const Svd svd = checked_svd(m, Eigen::ComputeFullV);
  const double tol = tolerance_for(m, svd.singularValues(), tol_override);
  const auto rank = static_cast<Eigen::Index>(count_above(svd.singularValues(), tol));
  return svd.matrixV().rightCols(m.cols() - rank);
}

void LassoConfig::validate() const {
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) {
    throw ArgumentError("lasso: penalty must be a nonnegative finite number");
  }
  if (max_iterations < 1) throw ArgumentError("lasso: max_iterations must be >= 1");
  if (!(convergence_tol > 0.0)) {
    throw ArgumentError("lasso: convergence_tol must be positive");
  }
}

double soft_threshold(double value, double level) {
  if (value > level) return value - level;
  if (value < -level) return value + level;
  return 0.0;
}

double lasso_objective(const Matrix& b, const Vector& r, const Vector& u,
                       double penalty) {
  return (r - b * u).squaredNorm() + penalty * u.lpNorm<1>();
}

double lasso_optimality_residual(const Matrix& b, const Vector& r,
                                 const Vector& u, double penalty) {
  const Vector grad = -2.0 * (b.transpose() * (r - b * u));
  double worst = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    double violation;
    if (u(j) > 0.0) {
      violation = std::abs(grad(j) + penalty);
    } else if (u(j) < 0.0) {
      violation = std::abs(grad(j) - penalty);
    } else {
      violation = std::max(std::abs(grad(j)) - penalty, 0.0);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

LassoResult lasso_solve(const Matrix& b, const Vector& r, const LassoConfig& cfg,
                        std::optional<Vector> warm_start) {
  cfg.validate();
  if (b.rows() != r.size()) {
    throw ArgumentError("lasso: B has " + std::to_string(b.rows()) +
                        " rows but residual has length " + std::to_string(r.size()));
  }
  const Eigen::Index p = b.cols();

  LassoResult result;
  if (cfg.penalty == 0.0) {
    result.u = least_squares(b, r);
    result.optimality_residual = lasso_optimality_residual(b, r, result.u, 0.0);
    result.objective_trace.push_back(lasso_objective(b, r, result.u, 0.0));
    return result;
  }

  Vector u = Vector::Zero(p);
  if (warm_start) {
    if (warm_start->size() != p) throw ArgumentError("lasso: warm start has wrong length");
    u = *warm_start;
  }
  const Vector col_norm_sq = b.colwise().squaredNorm().transpose();
  // Round-off floor: the gradient cannot be resolved more finely than this.
  const double scale = 2.0 * std::sqrt(col_norm_sq.maxCoeff()) * r.norm();
  const double tol = std::max(cfg.convergence_tol, 1e3 * kEps * scale);
  const double half_penalty = 0.5 * cfg.penalty;

  Vector residual = r - b * u;
  result.objective_trace.push_back(residual.squaredNorm() + cfg.penalty * u.lpNorm<1>());
  double optimality = lasso_optimality_residual(b, r, u, cfg.penalty);

  while (optimality > tol) {
    if (result.sweeps == cfg.max_iterations) {
      throw LassoNonConvergence(
          "lasso: no convergence after " + std::to_string(cfg.max_iterations) +
              " sweeps (optimality residual " + std::to_string(optimality) + ")",
          u, optimality);
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      const double old = u(j);
      double updated = 0.0;
      if (col_norm_sq(j) > 0.0) {
        const double rho = b.col(j).dot(residual) + col_norm_sq(j) * old;
        updated = soft_threshold(rho, half_penalty) / col_norm_sq(j);
      }
      if (updated != old) {
        residual.noalias() -= (updated - old) * b.col(j);
        u(j) = updated;
      }
    }
    ++result.sweeps;
    // Refresh the residual to stop drift from the incremental updates.
    residual = r - b * u;
    result.objective_trace.push_back(residual.squaredNorm() +
                                     cfg.penalty * u.lpNorm<1>());
    optimality = lasso_optimality_residual(b, r, u, cfg.penalty);
  }
  result.u = std::move(u);
  result.optimality_residual = optimality;
  return result;
}

}  // namespace fracdyn
