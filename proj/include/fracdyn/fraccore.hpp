#pragma once

// Grünwald–Letnikov coefficients, the discrete fractional-order state
// recursion and its closed-form G-matrix solution.

#include <cstddef>
#include <vector>

#include "fracdyn/numerics.hpp"

namespace fracdyn {

// Per-state fractional orders. Orders must be finite and, unless explicitly
// allowed, strictly positive. Orders above 2 are accepted with a warning.
class FractionalOrders {
 public:
  FractionalOrders() = default;
  explicit FractionalOrders(Vector alpha, bool allow_nonpositive = false);
  FractionalOrders(std::initializer_list<double> alpha);

  static FractionalOrders uniform(std::size_t n, double alpha);

  const Vector& values() const { return alpha_; }
  double operator[](std::size_t i) const { return alpha_(static_cast<Eigen::Index>(i)); }
  std::size_t size() const { return static_cast<std::size_t>(alpha_.size()); }

 private:
  Vector alpha_;
};

// psi(alpha, j) = Gamma(j - alpha) / (Gamma(-alpha) Gamma(j + 1)), evaluated
// by the recurrence psi(j) = psi(j-1) (j - 1 - alpha) / j. Returns j = 0..count-1.
Vector psi_coefficients(double alpha, std::size_t count);

// n x J table, row i holds psi(alpha_i, 0..J-1).
struct PsiTable {
  FractionalOrders orders;
  Matrix coefficients;

  std::size_t horizon() const { return static_cast<std::size_t>(coefficients.cols()); }
  double operator()(std::size_t state, std::size_t lag) const {
    return coefficients(static_cast<Eigen::Index>(state), static_cast<Eigen::Index>(lag));
  }
};

PsiTable psi_table(const FractionalOrders& orders, std::size_t horizon);

// diag(psi(alpha_1, j), ..., psi(alpha_n, j)), j >= 1.
Matrix d_matrix(const FractionalOrders& orders, std::size_t lag);

// Delta^alpha x[k+1] = A x[k] + B u[k]. Requires p < n.
class SystemModel {
 public:
  SystemModel(FractionalOrders orders, Matrix a, Matrix b);

  const FractionalOrders& orders() const { return orders_; }
  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  std::size_t n() const { return static_cast<std::size_t>(a_.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(b_.cols()); }

 private:
  FractionalOrders orders_;
  Matrix a_;
  Matrix b_;
};

// G_0 = I, G_k = sum_{j<k} A_j G_{k-1-j} with A_0 = A - D(alpha,1) and
// A_j = -D(alpha, j+1).
struct GKernel {
  SystemModel model;
  std::vector<Matrix> g;

  std::size_t horizon() const { return g.size(); }
  const Matrix& operator[](std::size_t k) const { return g[k]; }
};

GKernel g_kernel(const SystemModel& model, std::size_t horizon);

// states: T x n, row k is x[start + k]; inputs: (T-1) x p, row k is u[start + k].
struct Trajectory {
  Matrix states;
  Matrix inputs;
  long start_index = 0;

  std::size_t length() const { return static_cast<std::size_t>(states.rows()); }
};

// Runs the recursion x[k+1] = A x[k] - sum_{j=1}^{k+1} D(alpha,j) x[k+1-j] + B u[k]
// for K states using the full history. `disturbance`, when given, adds row k
// as a process-noise term e[k] to x[k+1].
Trajectory simulate_recursive(const SystemModel& model, const Vector& x0,
                              const Matrix& inputs, std::size_t length,
                              const Matrix* disturbance = nullptr);

// x[k] = G_k x[0] + sum_{j<k} G_{k-1-j} B u[j].
Trajectory simulate_closed_form(const GKernel& kernel, const Vector& x0,
                                const Matrix& inputs, std::size_t length);

// Default truncation min(T, 64).
std::size_t default_truncation(std::size_t samples);

// Z with row k = z[k] = sum_{j<J} psi(alpha, j) x[k+1-j], k = 0..T-2, treating
// samples before the window as zero.
Matrix fractional_difference(const Matrix& states, const FractionalOrders& orders,
                             std::size_t truncation);

inline Matrix fractional_difference(const Trajectory& traj,
                                    const FractionalOrders& orders,
                                    std::size_t truncation) {
  return fractional_difference(traj.states, orders, truncation);
}

}  // namespace fracdyn
