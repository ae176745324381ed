// fracdyn: simulate, estimate, and instrument fractional-order networks with
// unknown inputs.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fracdyn/commands.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("fracdyn");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("FRACDYN_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fracdyn::cli;
  configure_logging();

  CLI::App app{"Fractional-order network toolkit with unknown-input estimation"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a model forward");
  simulate->add_option("--model", sim.model, "Model file (JSON)")->required();
  simulate->add_option("--horizon", sim.horizon, "Number of states K")->required();
  simulate->add_option("--inputs", sim.inputs, "Input CSV, (K-1) x p");
  simulate->add_option("--sparse-inputs", sim.sparse_inputs,
                       "Random impulses as DENSITY,AMPLITUDE");
  simulate->add_option("--seed", sim.seed, "Seed for --sparse-inputs");
  simulate->add_option("--x0", sim.x0, "Initial state, comma separated");
  simulate->add_option("--out", sim.out, "Output trajectory CSV")->required();
  simulate->add_option("--inputs-out", sim.inputs_out, "Write the inputs used");
  simulate->add_option("--observe", sim.observe, "Sensors (1-based) to observe");
  simulate->add_option("--observations-out", sim.observations_out,
                       "Write K x |S| observations");

  EstimateOptions est;
  std::optional<std::size_t> scale_min;
  std::optional<std::size_t> scale_max;
  auto* estimate = app.add_subcommand("estimate", "Estimate A and unknown inputs from data");
  estimate->add_option("--data", est.data, "Time-series CSV")->required();
  estimate->add_option("--b-matrix", est.b_matrix, "Input coupling CSV, n x p")->required();
  estimate->add_option("--out", est.out, "Output directory")->required();
  estimate->add_option("--lambda", est.lambda, "Sparsity weight")->capture_default_str();
  estimate->add_option("--sigma2", est.sigma2, "Noise variance")->capture_default_str();
  estimate->add_option("--trunc", est.truncation, "Fractional-difference truncation J");
  estimate->add_option("--max-iter", est.max_iterations, "Iteration cap")->capture_default_str();
  estimate->add_option("--tol", est.objective_tol, "Absolute objective-change tolerance");
  estimate->add_option("--alpha", est.alpha, "Fractional orders, comma separated");
  estimate->add_option("--scale-min", scale_min, "Lowest wavelet level for alpha");
  estimate->add_option("--scale-max", scale_max, "Highest wavelet level for alpha");

  SelectOptions sel;
  auto* select = app.add_subcommand("select-sensors", "Greedy dedicated-sensor selection");
  select->add_option("--model", sel.model, "Model file (JSON)")->required();
  select->add_option("--horizon", sel.horizon, "Observation horizon K")->required();
  select->add_option("--out", sel.out, "Output directory")->required();
  select->add_flag("--exhaustive", sel.exhaustive, "Also compute the optimal set");
  select->add_flag("--lazy", sel.lazy, "Lazy marginal evaluation");

  CheckOptions chk;
  auto* check = app.add_subcommand("check-observability", "Test perfect observability");
  check->add_option("--model", chk.model, "Model file (JSON)")->required();
  check->add_option("--sensors", chk.sensors, "Sensors (1-based list or sensors.json)");
  check->add_option("--horizon", chk.horizon, "Observation horizon K")->required();

  RecoverOptions rec;
  auto* recover = app.add_subcommand("recover", "Recover x[0] and inputs from observations");
  recover->add_option("--model", rec.model, "Model file (JSON)")->required();
  recover->add_option("--sensors", rec.sensors, "Sensors (1-based list or sensors.json)");
  recover->add_option("--data", rec.data, "Observation CSV, K x |S|")->required();
  recover->add_option("--horizon", rec.horizon, "Expected K");
  recover->add_option("--method", rec.method, "joint | ridge")->capture_default_str();
  recover->add_option("--epsilon", rec.epsilon, "Ridge weight");
  recover->add_flag("--sparse-inputs", rec.sparse_inputs, "Lasso input recovery (ridge)");
  recover->add_option("--lambda", rec.lambda, "Sparsity weight for --sparse-inputs");
  recover->add_option("--sigma2", rec.sigma2, "Noise variance for --sparse-inputs");
  recover->add_option("--truth-states", rec.truth_states, "Ground-truth trajectory CSV");
  recover->add_option("--truth-inputs", rec.truth_inputs, "Ground-truth inputs CSV");
  recover->add_option("--plot", rec.plot, "Write an SVG of actual vs recovered x[0]");
  recover->add_option("--out", rec.out, "Output directory")->required();

  SynthOptions syn;
  std::optional<double> snr_db;
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic benchmark");
  synth->add_option("--seed", syn.config.seed, "Random seed")->required();
  synth->add_option("--n", syn.config.n, "States")->capture_default_str();
  synth->add_option("--p", syn.config.p, "Inputs")->capture_default_str();
  synth->add_option("--samples", syn.config.samples, "Samples T")->capture_default_str();
  synth->add_option("--density", syn.config.input_density, "Impulse density")
      ->capture_default_str();
  synth->add_option("--amplitude", syn.config.input_amplitude, "Impulse amplitude")
      ->capture_default_str();
  synth->add_option("--snr-db", snr_db, "Process-noise SNR in dB (noiseless if absent)");
  synth->add_option("--out", syn.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kUsageError;
  }

  auto& out = std::cout;
  auto& err = std::cerr;
  if (*simulate) return guarded([&] { return cmd_simulate(sim, out); }, err);
  if (*estimate) {
    if (scale_min) est.scale_min = *scale_min;
    if (scale_max) est.scale_max = *scale_max;
    return guarded([&] { return cmd_estimate(est, out); }, err);
  }
  if (*select) return guarded([&] { return cmd_select_sensors(sel, out); }, err);
  if (*check) return guarded([&] { return cmd_check_observability(chk, out); }, err);
  if (*recover) return guarded([&] { return cmd_recover(rec, out); }, err);
  if (*synth) {
    syn.config.snr_db = snr_db;
    return guarded([&] { return cmd_synth(syn, out); }, err);
  }
  return kUsageError;
}
