#include "fracdyn/estimation.hpp"

#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

namespace fracdyn {

void EmConfig::validate() const {
  if (!(lambda >= 0.0)) throw ArgumentError("EM: lambda must be nonnegative");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw ArgumentError("EM: sigma2 must be a positive finite number");
  }
  if (max_iterations < 1) throw ArgumentError("EM: max_iterations must be >= 1");
  if (objective_tol && !(*objective_tol >= 0.0)) {
    throw ArgumentError("EM: objective_tol must be nonnegative");
  }
  if (truncation && *truncation == 0) throw ArgumentError("EM: truncation J must be >= 1");
}

RowRegression regress_rows(const Matrix& target, const Matrix& regressors) {
  if (target.rows() != regressors.rows()) {
    throw ArgumentError("regression: targets have " + std::to_string(target.rows()) +
                        " time steps but regressors have " +
                        std::to_string(regressors.rows()));
  }
  RowRegression out;
  out.a = least_squares(regressors, target).transpose();
  if (regressors.rows() > 0 && regressors.cols() > 0) {
    out.rank = numerical_rank(regressors).rank;
  }
  out.underdetermined = out.rank < static_cast<std::size_t>(regressors.cols());
  return out;
}

Matrix init_A(const Matrix& z, const Matrix& x) {
  RowRegression fit = regress_rows(z, x);
  if (fit.underdetermined) {
    spdlog::warn("initial regression is under-determined (rank {} < {} regressors); "
                 "returning minimum-norm rows", fit.rank, x.cols());
  }
  return std::move(fit.a);
}

namespace {

void check_em_shapes(const Matrix& a, const Matrix& b, const Matrix& z, const Matrix& x) {
  if (z.rows() != x.rows()) {
    throw ArgumentError("Z and X must have the same number of time steps");
  }
  if (a.rows() != a.cols() || a.rows() != x.cols() || z.cols() != x.cols()) {
    throw ArgumentError("A, Z and X disagree on the state dimension");
  }
  if (b.rows() != x.cols()) {
    throw ArgumentError("B has " + std::to_string(b.rows()) + " rows, expected " +
                        std::to_string(x.cols()));
  }
}

}  // namespace

Matrix e_step(const Matrix& a, const Matrix& b, const Matrix& z, const Matrix& x,
              const EmConfig& cfg, const Matrix* warm_start) {
  check_em_shapes(a, b, z, x);
  if (warm_start && (warm_start->rows() != z.rows() || warm_start->cols() != b.cols())) {
    throw ArgumentError("E-step warm start has the wrong shape");
  }
  LassoConfig lasso_cfg = cfg.lasso;
  lasso_cfg.penalty = cfg.penalty();
  const Matrix residuals = z - x * a.transpose();
  Matrix u = Matrix::Zero(z.rows(), b.cols());
  if (b.cols() == 0 || cfg.force_zero_inputs) return u;
  for (Eigen::Index k = 0; k < z.rows(); ++k) {
    try {
      std::optional<Vector> seed;
      if (warm_start) seed = warm_start->row(k).transpose();
      u.row(k) = lasso_solve(b, residuals.row(k).transpose(), lasso_cfg, seed).u.transpose();
    } catch (const LassoNonConvergence& e) {
      throw LassoNonConvergence(std::string(e.what()) + " at time step " +
                                    std::to_string(k),
                                e.last_iterate(), e.optimality_residual(),
                                static_cast<std::size_t>(k));
    }
  }
  return u;
}

Matrix m_step(const Matrix& z, const Matrix& x, const Matrix& u, const Matrix& b) {
  if (u.rows() != z.rows() || u.cols() != b.cols()) {
    throw ArgumentError("inputs must be " + std::to_string(z.rows()) + "x" +
                        std::to_string(b.cols()));
  }
  if (b.rows() != z.cols()) throw ArgumentError("B and Z disagree on the state dimension");
  const Matrix corrected = z - u * b.transpose();
  return regress_rows(corrected, x).a;
}

double em_objective(const Matrix& a, const Matrix& b, const Matrix& z,
                    const Matrix& x, const Matrix& u, double penalty) {
  const Matrix residual = z - x * a.transpose() - u * b.transpose();
  return residual.squaredNorm() + penalty * u.cwiseAbs().sum();
}

EmEstimate run_em(const Matrix& states, const Matrix& b, const EmConfig& cfg,
                  std::optional<FractionalOrders> alpha,
                  std::optional<Matrix> initial_inputs,
                  const AlphaEstimator* alpha_estimator) {
  cfg.validate();
  if (states.rows() < 2) throw ArgumentError("EM needs at least two samples");
  if (b.rows() != states.cols()) {
    throw ArgumentError("B has " + std::to_string(b.rows()) + " rows but data has " +
                        std::to_string(states.cols()) + " channels");
  }
  require_finite(states, "time series");
  require_finite(b, "B");
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    if (states.col(c).maxCoeff() == states.col(c).minCoeff()) {
      throw DegenerateSignalError("channel " + std::to_string(c) + " is constant");
    }
  }

  EmEstimate est;
  if (alpha) {
    est.alpha = *alpha;
  } else if (alpha_estimator) {
    est.alpha = alpha_estimator->estimate(states).alpha;
  } else {
    est.alpha = estimate_alpha(states).alpha;
  }
  if (est.alpha.size() != static_cast<std::size_t>(states.cols())) {
    throw ArgumentError("expected one fractional order per channel");
  }

  const auto t = static_cast<std::size_t>(states.rows());
  est.truncation = cfg.truncation.value_or(default_truncation(t));
  const double penalty = cfg.penalty();
  const Matrix z = fractional_difference(states, est.alpha, est.truncation);
  const Matrix x = states.topRows(states.rows() - 1);

  RowRegression init = regress_rows(z, x);
  est.underdetermined = init.underdetermined;
  est.a_init = init.a;

  Matrix u;
  Matrix a;
  if (initial_inputs) {
    u = *initial_inputs;
    a = m_step(z, x, u, b);
  } else {
    u = Matrix::Zero(z.rows(), b.cols());
    a = est.a_init;
  }
  double previous = em_objective(a, b, z, x, u, penalty);
  est.objective_trace.push_back(previous);
  const double tol = cfg.objective_tol.value_or(1e-6 * previous);

  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    u = e_step(a, b, z, x, cfg, &u);
    a = m_step(z, x, u, b);
    const double current = em_objective(a, b, z, x, u, penalty);
    est.objective_trace.push_back(current);
    ++est.iterations_run;
    spdlog::debug("EM iteration {}: objective {}", est.iterations_run, current);
    if (std::abs(previous - current) <= tol) {
      est.converged = true;
      break;
    }
    previous = current;
  }
  if (!est.converged) {
    spdlog::warn("EM stopped after {} iterations without meeting the objective tolerance",
                 est.iterations_run);
  }
  est.a_hat = std::move(a);
  est.u_hat = std::move(u);
  return est;
}

namespace {

Vector memory_term(const PsiTable& psi, const Matrix& states, Eigen::Index next) {
  // sum_{j=1}^{J-1} psi_j x[next - j], zero before the first row.
  Vector acc = Vector::Zero(states.cols());
  const auto j_max = static_cast<Eigen::Index>(psi.horizon()) - 1;
  for (Eigen::Index j = 1; j <= j_max && next - j >= 0; ++j) {
    acc += psi.coefficients.col(j).cwiseProduct(states.row(next - j).transpose());
  }
  return acc;
}

}  // namespace

Matrix predict(const SystemModel& model, const Matrix& history, std::size_t steps,
               std::size_t truncation, const std::optional<Matrix>& future_inputs) {
  const auto n = static_cast<Eigen::Index>(model.n());
  if (steps == 0) return Matrix::Zero(0, n);
  if (history.rows() == 0 || history.cols() != n) {
    throw ArgumentError("prediction history must be a nonempty T x " + std::to_string(n) +
                        " block");
  }
  if (future_inputs && future_inputs->cols() != static_cast<Eigen::Index>(model.p())) {
    throw ArgumentError("future inputs have the wrong number of columns");
  }
  const PsiTable psi = psi_table(model.orders(), truncation);
  Matrix rolled(history.rows() + static_cast<Eigen::Index>(steps), n);
  rolled.topRows(history.rows()) = history;
  for (std::size_t s = 0; s < steps; ++s) {
    const Eigen::Index next = history.rows() + static_cast<Eigen::Index>(s);
    Vector x = model.a() * rolled.row(next - 1).transpose() - memory_term(psi, rolled, next);
    const auto si = static_cast<Eigen::Index>(s);
    if (future_inputs && si < future_inputs->rows()) {
      x += model.b() * future_inputs->row(si).transpose();
    }
    rolled.row(next) = x.transpose();
  }
  return rolled.bottomRows(static_cast<Eigen::Index>(steps));
}

Matrix one_step_predictions(const SystemModel& model, const Matrix& states,
                            const Matrix& u, std::size_t truncation) {
  const auto n = static_cast<Eigen::Index>(model.n());
  if (states.cols() != n || states.rows() < 2) {
    throw ArgumentError("one-step prediction needs a T x n data block with T >= 2");
  }
  if (u.rows() != states.rows() - 1 || u.cols() != static_cast<Eigen::Index>(model.p())) {
    throw ArgumentError("one-step prediction inputs must be (T-1) x p");
  }
  const PsiTable psi = psi_table(model.orders(), truncation);
  Matrix out(states.rows() - 1, n);
  for (Eigen::Index k = 0; k + 1 < states.rows(); ++k) {
    Vector x = model.a() * states.row(k).transpose() + model.b() * u.row(k).transpose() -
               memory_term(psi, states, k + 1);
    out.row(k) = x.transpose();
  }
  return out;
}

double rmse(const Matrix& predicted, const Matrix& actual) {
  if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols()) {
    throw ArgumentError("rmse: shape mismatch");
  }
  if (predicted.size() == 0) return 0.0;
  return std::sqrt((predicted - actual).squaredNorm() / static_cast<double>(predicted.size()));
}

}  // namespace fracdyn
