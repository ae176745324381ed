#pragma once

// Observability of the fractional network from dedicated sensors: the stacked
// matrices Theta and Xi, the rank set-function f(S) and sensor selection.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "fracdyn/fraccore.hpp"
#include "fracdyn/numerics.hpp"

namespace fracdyn {

// Dedicated sensors, identified by 0-based state index, kept sorted.
class SensorSet {
 public:
  SensorSet() = default;
  SensorSet(std::vector<std::size_t> indices, std::size_t state_count);
  static SensorSet all(std::size_t state_count);

  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(std::size_t index) const;
  SensorSet with(std::size_t index, std::size_t state_count) const;

  std::optional<std::size_t> achieved_rank;

  friend bool operator==(const SensorSet& a, const SensorSet& b) {
    return a.indices_ == b.indices_;
  }

 private:
  std::vector<std::size_t> indices_;
};

struct ObservabilityPair {
  Matrix theta;  // (K|S|) x n
  Matrix xi;     // (K|S|) x (K p); last block column is zero
  std::size_t horizon = 0;
  SensorSet sensors;

  Matrix stacked() const;  // [Theta Xi]
};

// n + (K-1) p
std::size_t rank_target(const SystemModel& model, std::size_t horizon);

ObservabilityPair build_theta_xi(const SystemModel& model, const SensorSet& sensors,
                                 std::size_t horizon);
ObservabilityPair build_theta_xi(const GKernel& kernel, const SensorSet& sensors);

// [Theta Xi] for every state, with sensor-major row blocks so that selecting
// a sensor set is a row selection. Built once, shared by all f(S) queries.
class RankOracle {
 public:
  RankOracle(const SystemModel& model, std::size_t horizon,
             std::optional<double> tol_override = std::nullopt);

  std::size_t state_count() const { return n_; }
  std::size_t horizon() const { return horizon_; }
  std::size_t target() const { return target_; }

  // f(S) = rank([Theta Xi] | C = I^S); f(empty) = 0.
  std::size_t rank(const SensorSet& sensors) const;
  RankReport report(const SensorSet& sensors) const;
  Matrix rows_for(const SensorSet& sensors) const;

 private:
  std::size_t n_;
  std::size_t horizon_;
  std::size_t target_;
  std::optional<double> tol_;
  Matrix full_;  // row (i * K + k) = sensor i at time k
};

std::size_t rank_f(const SystemModel& model, const SensorSet& sensors,
                   std::size_t horizon);

struct ObservabilityVerdict {
  bool observable = false;
  std::size_t rank = 0;
  std::size_t target = 0;
  std::optional<RankReport> report;  // absent for the empty sensor set
};

ObservabilityVerdict is_perfectly_observable(const SystemModel& model,
                                             const SensorSet& sensors,
                                             std::size_t horizon);

struct MarginalGain {
  std::size_t sensor;
  std::size_t gain;
};

struct SelectionResult {
  SensorSet selected;
  std::size_t rank_target = 0;
  std::vector<MarginalGain> marginal_history;
  bool feasible = false;
};

struct GreedyOptions {
  // Re-evaluate only the candidate with the best stale bound. Gives the same
  // selection as the plain greedy for submodular f.
  bool lazy = false;
};

// Adds the sensor with the largest marginal rank gain (lowest index on ties)
// until f reaches n + (K-1)p. An unreachable target is reported through
// `feasible`, with the best set found.
SelectionResult greedy_select(const SystemModel& model, std::size_t horizon,
                              GreedyOptions options = {});
SelectionResult greedy_select(const RankOracle& oracle, GreedyOptions options = {});

// Smallest sensor set reaching the target by increasing-cardinality
// enumeration; lexicographically first among the minima. nullopt when the
// target is unreachable. Refuses n > n_limit.
std::optional<SensorSet> exhaustive_min_sensors(const SystemModel& model,
                                                std::size_t horizon,
                                                std::size_t n_limit = 10);
std::optional<SensorSet> exhaustive_min_sensors(const RankOracle& oracle,
                                                std::size_t n_limit = 10);

}  // namespace fracdyn
