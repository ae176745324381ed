#include "fracdyn/recovery.hpp"

#include <string>

namespace fracdyn {

ObservationStack ObservationStack::from_rows(const Matrix& rows, const SensorSet& sensors) {
  if (static_cast<std::size_t>(rows.cols()) != sensors.size()) {
    throw ArgumentError("observations have " + std::to_string(rows.cols()) +
                        " columns but the sensor set has " +
                        std::to_string(sensors.size()) + " sensors");
  }
  require_finite(rows, "observations");
  ObservationStack obs;
  obs.horizon = static_cast<std::size_t>(rows.rows());
  obs.sensors = sensors;
  obs.y.resize(rows.size());
  for (Eigen::Index k = 0; k < rows.rows(); ++k) {
    obs.y.segment(k * rows.cols(), rows.cols()) = rows.row(k).transpose();
  }
  return obs;
}

ObservationStack ObservationStack::from_states(const Matrix& states,
                                               const SensorSet& sensors,
                                               std::size_t horizon) {
  if (static_cast<std::size_t>(states.rows()) < horizon) {
    throw ArgumentError("trajectory is shorter than the observation horizon");
  }
  Matrix rows(static_cast<Eigen::Index>(horizon), static_cast<Eigen::Index>(sensors.size()));
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const auto state = static_cast<Eigen::Index>(sensors.indices()[static_cast<std::size_t>(c)]);
    if (state >= states.cols()) throw ArgumentError("sensor index out of range");
    rows.col(c) = states.col(state).head(rows.rows());
  }
  return from_rows(rows, sensors);
}

std::string_view to_string(RecoveryMethod method) {
  switch (method) {
    case RecoveryMethod::kJointLeastSquares: return "joint-least-squares";
    case RecoveryMethod::kProjectedRidge: return "projected-ridge";
  }
  return "unknown";
}

namespace {

struct Shapes {
  Eigen::Index n;
  Eigen::Index p;
  Eigen::Index horizon;
};

Shapes check_pair(const ObservabilityPair& pair, const ObservationStack& obs) {
  if (pair.horizon == 0) throw ArgumentError("observability pair has zero horizon");
  if (obs.horizon != pair.horizon) {
    throw ArgumentError("observations span " + std::to_string(obs.horizon) +
                        " steps but the observability pair expects " +
                        std::to_string(pair.horizon));
  }
  if (!(obs.sensors == pair.sensors)) {
    throw ArgumentError("observations and observability pair use different sensor sets");
  }
  if (obs.y.size() != pair.theta.rows() || pair.xi.rows() != pair.theta.rows()) {
    throw ArgumentError("observation vector length does not match K * |S|");
  }
  const auto horizon = static_cast<Eigen::Index>(pair.horizon);
  if (pair.xi.cols() % horizon != 0) throw ArgumentError("Xi has a malformed column count");
  return {pair.theta.cols(), pair.xi.cols() / horizon, horizon};
}

// The last input block never reaches the observations.
Matrix recoverable_xi(const ObservabilityPair& pair, const Shapes& s) {
  return pair.xi.leftCols((s.horizon - 1) * s.p);
}

Matrix unstack_inputs(const Vector& stacked, const Shapes& s) {
  Matrix u(s.horizon - 1, s.p);
  for (Eigen::Index k = 0; k + 1 < s.horizon; ++k) {
    u.row(k) = stacked.segment(k * s.p, s.p).transpose();
  }
  return u;
}

double smallest_retained(const RankReport& report) {
  return report.rank ? report.singular_values(static_cast<Eigen::Index>(report.rank) - 1)
                     : 0.0;
}

}  // namespace

RecoveryResult recover_joint(const ObservabilityPair& pair, const ObservationStack& obs) {
  const Shapes s = check_pair(pair, obs);
  const Matrix xi = recoverable_xi(pair, s);
  Matrix system(pair.theta.rows(), s.n + xi.cols());
  system << pair.theta, xi;

  RecoveryResult result;
  result.method = RecoveryMethod::kJointLeastSquares;
  result.rank_target = static_cast<std::size_t>(s.n + (s.horizon - 1) * s.p);
  if (system.rows() == 0) {
    result.x0_hat = Vector::Zero(s.n);
    result.u_hat = Matrix::Zero(s.horizon - 1, s.p);
    return result;
  }
  const RankReport report = numerical_rank(system);
  const Vector solution = least_squares(system, obs.y);
  result.x0_hat = solution.head(s.n);
  result.u_hat = unstack_inputs(solution.tail(xi.cols()), s);
  result.residual_norm = (obs.y - system * solution).norm();
  result.rank = report.rank;
  result.smallest_retained_singular_value = smallest_retained(report);
  return result;
}

Matrix input_projector(const Matrix& xi) {
  if (xi.rows() == 0) throw ArgumentError("input_projector: Xi has no rows");
  const Matrix q = column_space_basis(xi);
  Matrix w = Matrix::Identity(xi.rows(), xi.rows());
  w.noalias() -= q * q.transpose();
  return w;
}

RecoveryResult recover_projected_ridge(const ObservabilityPair& pair,
                                       const ObservationStack& obs,
                                       ProjectedRidgeOptions options) {
  const Shapes s = check_pair(pair, obs);
  if (options.epsilon && !(*options.epsilon > 0.0)) {
    throw ArgumentError("ridge epsilon must be positive");
  }
  const Matrix xi = recoverable_xi(pair, s);

  RecoveryResult result;
  result.method = RecoveryMethod::kProjectedRidge;
  result.rank_target = static_cast<std::size_t>(s.n + (s.horizon - 1) * s.p);
  if (pair.theta.rows() == 0) {
    result.x0_hat = Vector::Zero(s.n);
    result.u_hat = Matrix::Zero(s.horizon - 1, s.p);
    result.epsilon = options.epsilon.value_or(0.0);
    return result;
  }

  const Matrix w = input_projector(pair.xi);
  const Matrix w_theta = w * pair.theta;
  const Vector w_y = w * obs.y;
  const RankReport projected = numerical_rank(w_theta);
  const double sigma_max = projected.singular_values.size() ? projected.singular_values(0) : 0.0;
  double epsilon = options.epsilon.value_or(1e-6 * sigma_max * sigma_max);
  if (!(epsilon > 0.0)) epsilon = 1.0;  // W Theta == 0: x0 is 0 for any epsilon
  result.epsilon = epsilon;
  result.x0_hat = ridge(w_theta, w_y, epsilon);

  const Vector remainder = obs.y - pair.theta * result.x0_hat;
  Vector inputs;
  if (xi.cols() == 0) {
    inputs = Vector::Zero(0);
  } else if (options.sparse_inputs) {
    inputs = lasso(xi, remainder, *options.sparse_inputs);
  } else {
    inputs = least_squares(xi, remainder);
  }
  result.u_hat = unstack_inputs(inputs, s);
  result.residual_norm = (remainder - xi * inputs).norm();
  result.rank = numerical_rank(pair.stacked()).rank;
  result.smallest_retained_singular_value = smallest_retained(projected);
  return result;
}

}  // namespace fracdyn
