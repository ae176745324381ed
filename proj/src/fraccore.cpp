#include "fracdyn/fraccore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

namespace fracdyn {

FractionalOrders::FractionalOrders(Vector alpha, bool allow_nonpositive)
    : alpha_(std::move(alpha)) {
  require_finite(alpha_, "fractional orders");
  for (Eigen::Index i = 0; i < alpha_.size(); ++i) {
    if (!allow_nonpositive && !(alpha_(i) > 0.0)) {
      throw ArgumentError("fractional order of state " + std::to_string(i) +
                          " must be positive, got " + std::to_string(alpha_(i)));
    }
    if (alpha_(i) > 2.0) {
      spdlog::warn("fractional order of state {} is {} (> 2)", i, alpha_(i));
    }
  }
}

FractionalOrders::FractionalOrders(std::initializer_list<double> alpha)
    : FractionalOrders(Eigen::Map<const Vector>(alpha.begin(),
                                                static_cast<Eigen::Index>(alpha.size()))) {}

FractionalOrders FractionalOrders::uniform(std::size_t n, double alpha) {
  return FractionalOrders(Vector::Constant(static_cast<Eigen::Index>(n), alpha));
}

Vector psi_coefficients(double alpha, std::size_t count) {
  if (count == 0) throw ArgumentError("psi: need at least one coefficient");
  Vector psi(static_cast<Eigen::Index>(count));
  psi(0) = 1.0;
  for (Eigen::Index j = 1; j < psi.size(); ++j) {
    psi(j) = psi(j - 1) * (static_cast<double>(j - 1) - alpha) / static_cast<double>(j);
  }
  return psi;
}

PsiTable psi_table(const FractionalOrders& orders, std::size_t horizon) {
  if (horizon == 0) throw ArgumentError("psi_table: horizon J must be >= 1");
  PsiTable table{orders, Matrix(static_cast<Eigen::Index>(orders.size()),
                                static_cast<Eigen::Index>(horizon))};
  for (std::size_t i = 0; i < orders.size(); ++i) {
    table.coefficients.row(static_cast<Eigen::Index>(i)) =
        psi_coefficients(orders[i], horizon).transpose();
  }
  return table;
}

Matrix d_matrix(const FractionalOrders& orders, std::size_t lag) {
  if (lag == 0) throw ArgumentError("d_matrix: lag must be >= 1");
  const PsiTable table = psi_table(orders, lag + 1);
  return table.coefficients.col(static_cast<Eigen::Index>(lag)).asDiagonal();
}

SystemModel::SystemModel(FractionalOrders orders, Matrix a, Matrix b)
    : orders_(std::move(orders)), a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols()) {
    throw ArgumentError("system matrix A must be square, got " +
                        std::to_string(a_.rows()) + "x" + std::to_string(a_.cols()));
  }
  if (a_.rows() == 0) throw ArgumentError("system must have at least one state");
  if (static_cast<std::size_t>(a_.rows()) != orders_.size()) {
    throw ArgumentError("A has " + std::to_string(a_.rows()) + " states but " +
                        std::to_string(orders_.size()) + " fractional orders given");
  }
  if (b_.rows() != a_.rows()) {
    throw ArgumentError("B must have " + std::to_string(a_.rows()) + " rows, got " +
                        std::to_string(b_.rows()));
  }
  if (b_.cols() >= a_.rows()) {
    throw ArgumentError("input count p must be smaller than state count n");
  }
  require_finite(a_, "A");
  require_finite(b_, "B");
}

GKernel g_kernel(const SystemModel& model, std::size_t horizon) {
  if (horizon == 0) throw ArgumentError("g_kernel: horizon K must be >= 1");
  const auto n = static_cast<Eigen::Index>(model.n());
  // psi(alpha, j) for j = 0..K so that D(alpha, k) is available for k <= K.
  const PsiTable psi = psi_table(model.orders(), horizon + 1);
  const Matrix a0 = model.a() - Matrix(psi.coefficients.col(1).asDiagonal());

  GKernel kernel{model, {}};
  kernel.g.reserve(horizon);
  kernel.g.push_back(Matrix::Identity(n, n));
  for (std::size_t k = 1; k < horizon; ++k) {
    Matrix next = a0 * kernel.g[k - 1];
    for (std::size_t j = 1; j < k; ++j) {
      // A_j = -D(alpha, j+1) is diagonal: scale the rows of G_{k-1-j}.
      next.noalias() -= psi.coefficients.col(static_cast<Eigen::Index>(j + 1)).asDiagonal() *
                        kernel.g[k - 1 - j];
    }
    kernel.g.push_back(std::move(next));
  }
  return kernel;
}

namespace {

void check_simulation_args(const SystemModel& model, const Vector& x0,
                           const Matrix& inputs, std::size_t length) {
  if (length == 0) throw ArgumentError("simulation length must be >= 1");
  if (static_cast<std::size_t>(x0.size()) != model.n()) {
    throw ArgumentError("x0 has length " + std::to_string(x0.size()) + ", expected " +
                        std::to_string(model.n()));
  }
  if (static_cast<std::size_t>(inputs.rows()) + 1 < length) {
    throw ArgumentError("need at least " + std::to_string(length - 1) +
                        " input rows, got " + std::to_string(inputs.rows()));
  }
  if (length > 1 && static_cast<std::size_t>(inputs.cols()) != model.p()) {
    throw ArgumentError("inputs have " + std::to_string(inputs.cols()) +
                        " columns, expected " + std::to_string(model.p()));
  }
  require_finite(x0, "x0");
  require_finite(inputs, "inputs");
}

Matrix used_inputs(const SystemModel& model, const Matrix& inputs, std::size_t length) {
  if (length < 2) return Matrix::Zero(0, static_cast<Eigen::Index>(model.p()));
  return inputs.topRows(static_cast<Eigen::Index>(length - 1));
}

}  // namespace

Trajectory simulate_recursive(const SystemModel& model, const Vector& x0,
                              const Matrix& inputs, std::size_t length,
                              const Matrix* disturbance) {
  check_simulation_args(model, x0, inputs, length);
  const auto n = static_cast<Eigen::Index>(model.n());
  if (disturbance && (disturbance->cols() != n ||
                      static_cast<std::size_t>(disturbance->rows()) + 1 < length)) {
    throw ArgumentError("disturbance must have n columns and at least K-1 rows");
  }
  const PsiTable psi = psi_table(model.orders(), length + 1);

  Trajectory traj{Matrix::Zero(static_cast<Eigen::Index>(length), n),
                  used_inputs(model, inputs, length), 0};
  traj.states.row(0) = x0.transpose();
  for (std::size_t k = 0; k + 1 < length; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    Vector next = model.a() * traj.states.row(kk).transpose();
    if (model.p() > 0) next.noalias() += model.b() * inputs.row(kk).transpose();
    if (disturbance) next += disturbance->row(kk).transpose();
    for (std::size_t j = 1; j <= k + 1; ++j) {
      const auto lag = static_cast<Eigen::Index>(j);
      next -= psi.coefficients.col(lag).cwiseProduct(
          traj.states.row(kk + 1 - lag).transpose());
    }
    traj.states.row(kk + 1) = next.transpose();
  }
  return traj;
}

Trajectory simulate_closed_form(const GKernel& kernel, const Vector& x0,
                                const Matrix& inputs, std::size_t length) {
  const SystemModel& model = kernel.model;
  check_simulation_args(model, x0, inputs, length);
  if (length > kernel.horizon()) {
    throw ArgumentError("closed-form simulation of " + std::to_string(length) +
                        " steps exceeds kernel horizon " +
                        std::to_string(kernel.horizon()));
  }
  const auto n = static_cast<Eigen::Index>(model.n());
  std::vector<Matrix> gb;
  gb.reserve(length);
  for (std::size_t k = 0; k < length; ++k) gb.push_back(kernel[k] * model.b());

  Trajectory traj{Matrix::Zero(static_cast<Eigen::Index>(length), n),
                  used_inputs(model, inputs, length), 0};
  for (std::size_t k = 0; k < length; ++k) {
    Vector x = kernel[k] * x0;
    for (std::size_t j = 0; j < k && model.p() > 0; ++j) {
      x.noalias() += gb[k - 1 - j] * inputs.row(static_cast<Eigen::Index>(j)).transpose();
    }
    traj.states.row(static_cast<Eigen::Index>(k)) = x.transpose();
  }
  return traj;
}

std::size_t default_truncation(std::size_t samples) {
  return std::max<std::size_t>(1, std::min<std::size_t>(samples, 64));
}

Matrix fractional_difference(const Matrix& states, const FractionalOrders& orders,
                             std::size_t truncation) {
  if (truncation == 0) throw ArgumentError("fractional_difference: J must be >= 1");
  if (static_cast<std::size_t>(states.cols()) != orders.size()) {
    throw ArgumentError("fractional_difference: data has " +
                        std::to_string(states.cols()) + " channels but " +
                        std::to_string(orders.size()) + " orders were given");
  }
  if (states.rows() < 2) {
    throw ArgumentError("fractional_difference: need at least two samples");
  }
  const PsiTable psi = psi_table(orders, truncation);
  const Eigen::Index rows = states.rows() - 1;
  Matrix z = Matrix::Zero(rows, states.cols());
  for (Eigen::Index k = 0; k < rows; ++k) {
    const Eigen::Index max_lag =
        std::min<Eigen::Index>(static_cast<Eigen::Index>(truncation) - 1, k + 1);
    for (Eigen::Index j = 0; j <= max_lag; ++j) {
      z.row(k) += psi.coefficients.col(j).transpose().cwiseProduct(states.row(k + 1 - j));
    }
  }
  return z;
}

}  // namespace fracdyn
