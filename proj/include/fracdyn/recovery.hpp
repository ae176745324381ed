#pragma once

// Recovery of the initial state and unknown inputs from K stacked dedicated
// observations Y = Theta x[0] + Xi U.

#include <cstddef>
#include <optional>
#include <string_view>

#include "fracdyn/fraccore.hpp"
#include "fracdyn/numerics.hpp"
#include "fracdyn/observability.hpp"

namespace fracdyn {

// Y = [y[0]; y[1]; ...; y[K-1]], each y[k] holding the |S| sensor readings.
struct ObservationStack {
  Vector y;
  std::size_t horizon = 0;
  SensorSet sensors;

  // Stacks rows 0..K-1 of a K x |S| observation block.
  static ObservationStack from_rows(const Matrix& rows, const SensorSet& sensors);
  // Reads y[k] = I^S x[k] for k < K out of a state trajectory.
  static ObservationStack from_states(const Matrix& states, const SensorSet& sensors,
                                      std::size_t horizon);
};

enum class RecoveryMethod { kJointLeastSquares, kProjectedRidge };

std::string_view to_string(RecoveryMethod method);

struct RecoveryResult {
  Vector x0_hat;
  Matrix u_hat;  // (K-1) x p; u[K-1] never enters the observations
  double residual_norm = 0.0;
  RecoveryMethod method = RecoveryMethod::kJointLeastSquares;
  std::size_t rank = 0;
  std::size_t rank_target = 0;
  double smallest_retained_singular_value = 0.0;
  double epsilon = 0.0;  // ridge weight actually used (projected ridge only)

  bool rank_deficient() const { return rank < rank_target; }
};

// Minimum-norm least squares on [Theta Xi].
RecoveryResult recover_joint(const ObservabilityPair& pair, const ObservationStack& obs);

// W = I - Q Q^T with Q an orthonormal basis of range(Xi).
Matrix input_projector(const Matrix& xi);

struct ProjectedRidgeOptions {
  // Defaults to 1e-6 * sigma_max(W Theta)^2.
  std::optional<double> epsilon;
  // Recover inputs with a lasso instead of least squares.
  std::optional<LassoConfig> sparse_inputs;
};

// Ridge on the input-free projection W Y = W Theta x, then inputs from the
// residual Y - Theta x0.
RecoveryResult recover_projected_ridge(const ObservabilityPair& pair,
                                       const ObservationStack& obs,
                                       ProjectedRidgeOptions options = {});

}  // namespace fracdyn
