#include <cmath>
#include <string>

#include "fracdyn/estimation.hpp"

namespace fracdyn {

Vector haar_details(const Vector& signal, std::size_t level) {
  if (level == 0) throw ArgumentError("haar_details: level must be >= 1");
  const std::size_t block = std::size_t{1} << level;
  const std::size_t half = block / 2;
  const std::size_t count = static_cast<std::size_t>(signal.size()) / block;
  const double norm = std::pow(2.0, -0.5 * static_cast<double>(level));
  Vector details(static_cast<Eigen::Index>(count));
  for (std::size_t b = 0; b < count; ++b) {
    const auto start = static_cast<Eigen::Index>(b * block);
    const auto h = static_cast<Eigen::Index>(half);
    details(static_cast<Eigen::Index>(b)) =
        norm * (signal.segment(start, h).sum() - signal.segment(start + h, h).sum());
  }
  return details;
}

HaarSlopeEstimator::HaarSlopeEstimator(ScaleRange range, SlopeToAlphaMap map)
    : range_(range), map_(map) {
  if (range_.min_level < 1) throw ArgumentError("scale range must start at level >= 1");
  if (range_.max_level < range_.min_level + 1) {
    throw ArgumentError("scale range must span at least two levels");
  }
  if (range_.max_level > 40) throw ArgumentError("scale range max level is too large");
}

AlphaEstimate HaarSlopeEstimator::estimate(const Matrix& states) const {
  const std::size_t needed = std::size_t{1} << (range_.max_level + 1);
  if (static_cast<std::size_t>(states.rows()) < needed) {
    throw ArgumentError("alpha estimation up to level " +
                        std::to_string(range_.max_level) + " needs at least " +
                        std::to_string(needed) + " samples, got " +
                        std::to_string(states.rows()));
  }
  require_finite(states, "time series");

  const auto levels = static_cast<Eigen::Index>(range_.max_level - range_.min_level + 1);
  Vector level_axis(levels);
  Vector weights(levels);
  for (Eigen::Index l = 0; l < levels; ++l) {
    const std::size_t level = range_.min_level + static_cast<std::size_t>(l);
    level_axis(l) = static_cast<double>(level);
    weights(l) = static_cast<double>(static_cast<std::size_t>(states.rows()) >> level);
  }
  const double wsum = weights.sum();
  const double level_mean = weights.dot(level_axis) / wsum;
  const Vector centered = level_axis.array() - level_mean;
  const double sxx = weights.dot(centered.cwiseProduct(centered));

  AlphaEstimate est;
  Vector alpha(states.cols());
  est.slopes.resize(states.cols());
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    const Vector signal = states.col(c);
    Vector log_var(levels);
    for (Eigen::Index l = 0; l < levels; ++l) {
      const Vector d = haar_details(signal, static_cast<std::size_t>(level_axis(l)));
      const double variance = d.squaredNorm() / static_cast<double>(d.size());
      if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw DegenerateSignalError("channel " + std::to_string(c) +
                                    " has zero wavelet variance at level " +
                                    std::to_string(static_cast<int>(level_axis(l))) +
                                    " (constant signal?)");
      }
      log_var(l) = std::log2(variance);
    }
    const double y_mean = weights.dot(log_var) / wsum;
    const double slope = weights.dot(centered.cwiseProduct(log_var)) / sxx;
    const Vector fitted = (y_mean + slope * centered.array()).matrix();
    est.residuals.push_back(log_var - fitted);
    est.slopes(c) = slope;
    alpha(c) = map_.slope_factor * slope + map_.offset;
  }
  est.alpha = FractionalOrders(alpha, /*allow_nonpositive=*/true);
  return est;
}

AlphaEstimate estimate_alpha(const Matrix& states, ScaleRange range, SlopeToAlphaMap map) {
  return HaarSlopeEstimator(range, map).estimate(states);
}

}  // namespace fracdyn
