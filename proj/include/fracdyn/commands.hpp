#pragma once

// Batch commands behind the `fracdyn` executable. Each returns a process exit
// code and writes its human-readable report to `report`.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "fracdyn/synth.hpp"

namespace fracdyn::cli {

enum ExitCode : int {
  kSuccess = 0,
  kNegativeVerdict = 1,  // not observable / infeasible
  kUsageError = 2,       // bad arguments, unreadable or malformed files
  kNumericalFailure = 3, // solver failure, degenerate data
};

struct SimulateOptions {
  std::filesystem::path model;
  std::optional<std::filesystem::path> inputs;  // CSV, (K-1) x p
  std::optional<std::string> sparse_inputs;     // "density,amplitude"
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  std::optional<std::string> x0;                // comma list; zeros if absent
  std::filesystem::path out;                    // states CSV
  std::optional<std::filesystem::path> inputs_out;
  std::optional<std::string> observe;           // 1-based sensor list
  std::optional<std::filesystem::path> observations_out;
};

struct EstimateOptions {
  std::filesystem::path data;
  std::filesystem::path b_matrix;  // CSV, n rows x p columns
  std::filesystem::path out;       // directory
  double lambda = 1.0;
  double sigma2 = 1.0;
  std::optional<std::size_t> truncation;
  std::size_t max_iterations = 50;
  std::optional<double> objective_tol;
  std::optional<std::string> alpha;  // comma list; estimated if absent
  std::size_t scale_min = 2;
  std::size_t scale_max = 7;
};

struct SelectOptions {
  std::filesystem::path model;
  std::size_t horizon = 0;
  std::filesystem::path out;  // directory
  bool exhaustive = false;
  std::size_t exhaustive_limit = 10;
  bool lazy = false;
};

struct CheckOptions {
  std::filesystem::path model;
  std::string sensors;  // 1-based list or a sensors.json written by select-sensors
  std::size_t horizon = 0;
};

struct RecoverOptions {
  std::filesystem::path model;
  std::string sensors;
  std::filesystem::path data;  // K x |S| observations
  std::optional<std::size_t> horizon;  // checked against the row count when given
  std::string method = "joint";
  std::optional<double> epsilon;
  bool sparse_inputs = false;
  double lambda = 1.0;
  double sigma2 = 1.0;
  std::optional<std::filesystem::path> truth_states;
  std::optional<std::filesystem::path> truth_inputs;
  std::optional<std::filesystem::path> plot;
  std::filesystem::path out;  // directory
};

struct SynthOptions {
  SynthConfig config;
  std::filesystem::path out;  // directory
};

int cmd_simulate(const SimulateOptions& opts, std::ostream& report);
int cmd_estimate(const EstimateOptions& opts, std::ostream& report);
int cmd_select_sensors(const SelectOptions& opts, std::ostream& report);
int cmd_check_observability(const CheckOptions& opts, std::ostream& report);
int cmd_recover(const RecoverOptions& opts, std::ostream& report);
int cmd_synth(const SynthOptions& opts, std::ostream& report);

// Runs `body`, mapping library exceptions onto exit codes and printing the
// message to `errors`.
int guarded(const std::function<int()>& body, std::ostream& errors);

}  // namespace fracdyn::cli
