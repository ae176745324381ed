#include "fracdyn/observability.hpp"

#include <algorithm>
#include <string>

namespace fracdyn {

SensorSet::SensorSet(std::vector<std::size_t> indices, std::size_t state_count)
    : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw ArgumentError("sensor set contains duplicate indices");
  }
  if (!indices_.empty() && indices_.back() >= state_count) {
    throw ArgumentError("sensor index " + std::to_string(indices_.back()) +
                        " is out of range for " + std::to_string(state_count) +
                        " states");
  }
}

SensorSet SensorSet::all(std::size_t state_count) {
  std::vector<std::size_t> idx(state_count);
  for (std::size_t i = 0; i < state_count; ++i) idx[i] = i;
  return SensorSet(std::move(idx), state_count);
}

bool SensorSet::contains(std::size_t index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

SensorSet SensorSet::with(std::size_t index, std::size_t state_count) const {
  std::vector<std::size_t> idx = indices_;
  idx.push_back(index);
  return SensorSet(std::move(idx), state_count);
}

Matrix ObservabilityPair::stacked() const {
  Matrix m(theta.rows(), theta.cols() + xi.cols());
  m << theta, xi;
  return m;
}

std::size_t rank_target(const SystemModel& model, std::size_t horizon) {
  if (horizon == 0) throw ArgumentError("horizon K must be >= 1");
  return model.n() + (horizon - 1) * model.p();
}

ObservabilityPair build_theta_xi(const GKernel& kernel, const SensorSet& sensors) {
  const SystemModel& model = kernel.model;
  const auto n = static_cast<Eigen::Index>(model.n());
  const auto p = static_cast<Eigen::Index>(model.p());
  const auto s = static_cast<Eigen::Index>(sensors.size());
  const auto horizon = static_cast<Eigen::Index>(kernel.horizon());
  if (!sensors.empty() && sensors.indices().back() >= model.n()) {
    throw ArgumentError("sensor index out of range");
  }

  // C G_k and C G_k B for every k.
  std::vector<Matrix> cg(kernel.horizon());
  std::vector<Matrix> cgb(kernel.horizon());
  for (Eigen::Index k = 0; k < horizon; ++k) {
    cg[k].resize(s, n);
    for (Eigen::Index r = 0; r < s; ++r) {
      cg[k].row(r) = kernel[k].row(static_cast<Eigen::Index>(sensors.indices()[r]));
    }
    cgb[k] = cg[k] * model.b();
  }

  ObservabilityPair pair;
  pair.horizon = kernel.horizon();
  pair.sensors = sensors;
  pair.theta.resize(horizon * s, n);
  pair.xi = Matrix::Zero(horizon * s, horizon * p);
  for (Eigen::Index row = 0; row < horizon; ++row) {
    pair.theta.middleRows(row * s, s) = cg[row];
    for (Eigen::Index col = 0; col < row; ++col) {
      pair.xi.block(row * s, col * p, s, p) = cgb[row - 1 - col];
    }
  }
  return pair;
}

ObservabilityPair build_theta_xi(const SystemModel& model, const SensorSet& sensors,
                                 std::size_t horizon) {
  if (horizon == 0) throw ArgumentError("horizon K must be >= 1");
  return build_theta_xi(g_kernel(model, horizon), sensors);
}

RankOracle::RankOracle(const SystemModel& model, std::size_t horizon,
                       std::optional<double> tol_override)
    : n_(model.n()), horizon_(horizon), target_(rank_target(model, horizon)),
      tol_(tol_override) {
  const ObservabilityPair pair = build_theta_xi(model, SensorSet::all(n_), horizon);
  const Matrix time_major = pair.stacked();
  // Reorder rows from (k * n + i) to (i * K + k).
  full_.resize(time_major.rows(), time_major.cols());
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = 0; k < horizon_; ++k) {
      full_.row(static_cast<Eigen::Index>(i * horizon_ + k)) =
          time_major.row(static_cast<Eigen::Index>(k * n_ + i));
    }
  }
}

Matrix RankOracle::rows_for(const SensorSet& sensors) const {
  const auto k = static_cast<Eigen::Index>(horizon_);
  Matrix rows(static_cast<Eigen::Index>(sensors.size()) * k, full_.cols());
  Eigen::Index r = 0;
  for (std::size_t i : sensors.indices()) {
    if (i >= n_) throw ArgumentError("sensor index out of range");
    rows.middleRows(r, k) = full_.middleRows(static_cast<Eigen::Index>(i) * k, k);
    r += k;
  }
  return rows;
}

RankReport RankOracle::report(const SensorSet& sensors) const {
  if (sensors.empty()) return RankReport{};
  return numerical_rank(rows_for(sensors), tol_);
}

std::size_t RankOracle::rank(const SensorSet& sensors) const {
  return report(sensors).rank;
}

std::size_t rank_f(const SystemModel& model, const SensorSet& sensors,
                   std::size_t horizon) {
  const ObservabilityPair pair = build_theta_xi(model, sensors, horizon);
  if (sensors.empty()) return 0;
  return numerical_rank(pair.stacked()).rank;
}

ObservabilityVerdict is_perfectly_observable(const SystemModel& model,
                                             const SensorSet& sensors,
                                             std::size_t horizon) {
  ObservabilityVerdict verdict;
  verdict.target = rank_target(model, horizon);
  const ObservabilityPair pair = build_theta_xi(model, sensors, horizon);
  if (!sensors.empty()) {
    verdict.report = numerical_rank(pair.stacked());
    verdict.rank = verdict.report->rank;
  }
  verdict.observable = verdict.rank == verdict.target;
  return verdict;
}

namespace {

struct Candidate {
  std::size_t sensor;
  std::size_t bound;
  bool fresh;
};

}  // namespace

SelectionResult greedy_select(const RankOracle& oracle, GreedyOptions options) {
  const std::size_t n = oracle.state_count();
  SelectionResult result;
  result.rank_target = oracle.target();
  const std::size_t best_possible = oracle.rank(SensorSet::all(n));
  std::size_t current = 0;

  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < n; ++i) candidates.push_back({i, oracle.target(), false});

  while (current < oracle.target() && !candidates.empty()) {
    std::size_t chosen_pos = 0;
    std::size_t chosen_gain = 0;
    if (options.lazy) {
      for (auto& c : candidates) c.fresh = false;
      while (true) {
        // Highest bound first, lowest index among equals.
        auto top = std::min_element(candidates.begin(), candidates.end(),
                                    [](const Candidate& a, const Candidate& b) {
                                      return a.bound != b.bound ? a.bound > b.bound
                                                                : a.sensor < b.sensor;
                                    });
        if (top->fresh) {
          chosen_pos = static_cast<std::size_t>(top - candidates.begin());
          chosen_gain = top->bound;
          break;
        }
        top->bound = oracle.rank(result.selected.with(top->sensor, n)) - current;
        top->fresh = true;
      }
    } else {
      // Collect every marginal, then take the arg max.
      std::vector<std::size_t> gains(candidates.size());
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        gains[c] = oracle.rank(result.selected.with(candidates[c].sensor, n)) - current;
      }
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (gains[c] > chosen_gain) {
          chosen_gain = gains[c];
          chosen_pos = c;
        }
      }
    }
    if (chosen_gain == 0) break;
    const std::size_t sensor = candidates[chosen_pos].sensor;
    result.selected = result.selected.with(sensor, n);
    current += chosen_gain;
    result.marginal_history.push_back({sensor, chosen_gain});
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(chosen_pos));
    if (current >= best_possible) break;
  }
  result.selected.achieved_rank = current;
  result.feasible = current == oracle.target();
  return result;
}

SelectionResult greedy_select(const SystemModel& model, std::size_t horizon,
                              GreedyOptions options) {
  return greedy_select(RankOracle(model, horizon), options);
}

std::optional<SensorSet> exhaustive_min_sensors(const RankOracle& oracle,
                                                std::size_t n_limit) {
  const std::size_t n = oracle.state_count();
  if (n > n_limit) {
    throw ArgumentError("exhaustive search refused: " + std::to_string(n) +
                        " states exceeds the limit of " + std::to_string(n_limit));
  }
  if (oracle.rank(SensorSet::all(n)) < oracle.target()) return std::nullopt;

  for (std::size_t size = 1; size <= n; ++size) {
    // Lexicographic enumeration of size-element combinations.
    std::vector<std::size_t> combo(size);
    for (std::size_t i = 0; i < size; ++i) combo[i] = i;
    while (true) {
      SensorSet candidate(combo, n);
      const std::size_t rank = oracle.rank(candidate);
      if (rank == oracle.target()) {
        candidate.achieved_rank = rank;
        return candidate;
      }
      std::size_t pos = size;
      while (pos > 0 && combo[pos - 1] == n - size + pos - 1) --pos;
      if (pos == 0) break;
      ++combo[pos - 1];
      for (std::size_t i = pos; i < size; ++i) combo[i] = combo[i - 1] + 1;
    }
  }
  return std::nullopt;
}

std::optional<SensorSet> exhaustive_min_sensors(const SystemModel& model,
                                                std::size_t horizon,
                                                std::size_t n_limit) {
  if (model.n() > n_limit) {
    throw ArgumentError("exhaustive search refused: " + std::to_string(model.n()) +
                        " states exceeds the limit of " + std::to_string(n_limit));
  }
  return exhaustive_min_sensors(RankOracle(model, horizon), n_limit);
}

}  // namespace fracdyn
