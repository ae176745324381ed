#include "fracdyn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace fracdyn {

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  }
  return m;
}

}  // namespace

Matrix sparse_impulses(std::size_t rows, std::size_t cols, double density,
                       double amplitude, std::mt19937_64& rng) {
  if (density < 0.0 || density > 1.0) throw ArgumentError("input density must be in [0, 1]");
  const std::size_t cells = rows * cols;
  const auto count = static_cast<std::size_t>(std::llround(density * static_cast<double>(cells)));
  std::vector<std::size_t> positions(cells);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `count` entries become the impulse sites.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, cells - 1);
    std::swap(positions[i], positions[pick(rng)]);
  }
  std::uniform_real_distribution<double> magnitude(0.5 * amplitude, 1.5 * amplitude);
  std::bernoulli_distribution sign(0.5);
  Matrix u = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t cell = positions[i];
    const double value = magnitude(rng);
    u(static_cast<Eigen::Index>(cell / cols), static_cast<Eigen::Index>(cell % cols)) =
        sign(rng) ? value : -value;
  }
  return u;
}

SystemModel random_model(std::size_t n, std::size_t p, std::mt19937_64& rng,
                         double alpha_min, double alpha_max, double a0_norm) {
  if (n == 0 || p >= n) throw ArgumentError("synthetic model needs n >= 1 and p < n");
  if (!(alpha_min > 0.0) || alpha_max < alpha_min) {
    throw ArgumentError("synthetic alpha range must satisfy 0 < min <= max");
  }
  if (!(a0_norm >= 0.0) || a0_norm > 1.0) throw ArgumentError("a0_norm must be in [0, 1]");
  const auto nn = static_cast<Eigen::Index>(n);
  std::uniform_real_distribution<double> order(alpha_min, alpha_max);
  Vector alpha(nn);
  for (Eigen::Index i = 0; i < nn; ++i) alpha(i) = order(rng);

  Matrix a0 = gaussian(nn, nn, rng);
  const double norm = Eigen::JacobiSVD<Matrix>(a0).singularValues()(0);
  if (norm > 0.0) a0 *= a0_norm / norm;
  // A0 = A - D(alpha, 1) = A + diag(alpha)
  Matrix a = a0;
  a.diagonal() -= alpha;

  Matrix b = gaussian(nn, static_cast<Eigen::Index>(p), rng);
  for (Eigen::Index c = 0; c < b.cols(); ++c) b.col(c).normalize();
  return SystemModel(FractionalOrders(alpha), std::move(a), std::move(b));
}

SynthResult synthesize(const SynthConfig& cfg) {
  if (cfg.samples < 2) throw ArgumentError("synthetic series needs at least two samples");
  std::mt19937_64 rng(cfg.seed);
  SystemModel model = random_model(cfg.n, cfg.p, rng, cfg.alpha_min, cfg.alpha_max, cfg.a0_norm);
  const auto nn = static_cast<Eigen::Index>(cfg.n);
  const Vector x0 = gaussian(nn, 1, rng).col(0);
  const Matrix u = sparse_impulses(cfg.samples - 1, cfg.p, cfg.input_density,
                                   cfg.input_amplitude, rng);
  const Matrix unit_noise = gaussian(static_cast<Eigen::Index>(cfg.samples - 1), nn, rng);

  Trajectory clean = simulate_recursive(model, x0, u, cfg.samples);
  Matrix noise = Matrix::Zero(unit_noise.rows(), unit_noise.cols());
  Trajectory traj = clean;
  if (cfg.snr_db) {
    const double signal_rms =
        std::sqrt(clean.states.squaredNorm() / static_cast<double>(clean.states.size()));
    noise = unit_noise * (signal_rms / std::pow(10.0, *cfg.snr_db / 20.0));
    traj = simulate_recursive(model, x0, u, cfg.samples, &noise);
  }
  return SynthResult{std::move(model), std::move(traj), std::move(clean.states),
                     std::move(noise)};
}

}  // namespace fracdyn
