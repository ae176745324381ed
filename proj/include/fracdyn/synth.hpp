#pragma once

// Seeded generator of random fractional networks driven by sparse impulses.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>

#include "fracdyn/fraccore.hpp"

namespace fracdyn {

struct SynthConfig {
  std::size_t n = 4;
  std::size_t p = 1;
  std::size_t samples = 256;  // T
  std::uint64_t seed = 0;
  double alpha_min = 0.6;
  double alpha_max = 0.95;
  // Spectral norm of A0 = A - D(alpha, 1). Kept below 1 and below the
  // smallest order so that the memory kernel stays summable.
  double a0_norm = 0.5;
  double input_density = 0.05;  // fraction of (T-1) x p input entries that fire
  double input_amplitude = 5.0;
  // Process-noise level relative to the clean-state RMS, in dB. None = noiseless.
  std::optional<double> snr_db;
};

struct SynthResult {
  SystemModel model;
  Trajectory trajectory;  // noisy when snr_db is set
  Matrix clean_states;
  Matrix noise;  // (T-1) x n process noise actually injected
};

SynthResult synthesize(const SynthConfig& cfg);

// Exactly round(density * rows * cols) impulses at distinct random positions,
// with random sign and magnitude in [amplitude/2, 3 amplitude/2].
Matrix sparse_impulses(std::size_t rows, std::size_t cols, double density,
                       double amplitude, std::mt19937_64& rng);

// Random model with the same conventions as synthesize().
SystemModel random_model(std::size_t n, std::size_t p, std::mt19937_64& rng,
                         double alpha_min = 0.6, double alpha_max = 0.95,
                         double a0_norm = 0.5);

}  // namespace fracdyn
