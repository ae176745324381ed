#include "fracdyn/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "fracdyn/estimation.hpp"
#include "fracdyn/io.hpp"
#include "fracdyn/observability.hpp"
#include "fracdyn/recovery.hpp"
#include "fracdyn/svg_plot.hpp"

namespace fracdyn::cli {

namespace fs = std::filesystem;

namespace {

Vector parse_real_list(std::string_view text, std::string_view what) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view field = text.substr(start, end - start);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() ||
        !std::isfinite(v)) {
      throw ParseError("bad number '" + std::string(field) + "' in " + std::string(what));
    }
    values.push_back(v);
    start = end + 1;
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

SensorSet resolve_sensors(const std::string& text, std::size_t n) {
  const fs::path path(text);
  if (!text.empty() && path.extension() == ".json" && fs::exists(path)) {
    const auto j = nlohmann::json::parse(io::read_text(path), nullptr, false);
    if (j.is_discarded() || !j.contains("selected") || !j["selected"].is_array()) {
      throw ParseError(text + ": expected a sensors file with a 'selected' array");
    }
    std::string list;
    for (const auto& s : j["selected"]) {
      if (!list.empty()) list += ',';
      list += std::to_string(s.get<long long>());
    }
    return io::parse_sensor_list(list, n);
  }
  return io::parse_sensor_list(text, n);
}

nlohmann::json sensor_json(const SensorSet& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i : s.indices()) arr.push_back(i + 1);
  return arr;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  io::write_text(path, j.dump(2) + "\n");
}

std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

int guarded(const std::function<int()>& body, std::ostream& errors) {
  try {
    return body();
  } catch (const ParseError& e) {
    errors << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ArgumentError& e) {
    errors << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const fs::filesystem_error& e) {
    errors << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DegenerateSignalError& e) {
    errors << "error: degenerate data: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const NumericalError& e) {
    errors << "error: numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    errors << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& report) {
  const SystemModel model = io::read_model(opts.model).to_model();
  if (opts.horizon == 0) throw ArgumentError("--horizon must be >= 1");
  const std::size_t k = opts.horizon;
  const auto n = static_cast<Eigen::Index>(model.n());
  const auto p = static_cast<Eigen::Index>(model.p());
  const auto steps = static_cast<Eigen::Index>(k - 1);

  if (opts.inputs && opts.sparse_inputs) {
    throw ArgumentError("--inputs and --sparse-inputs are mutually exclusive");
  }
  Matrix inputs = Matrix::Zero(steps, p);
  if (opts.inputs) {
    const io::TimeSeries file = io::read_csv(*opts.inputs);
    if (file.values.cols() != p || file.values.rows() < steps) {
      throw ArgumentError("inputs file must have " + std::to_string(p) +
                          " columns and at least " + std::to_string(steps) + " rows");
    }
    inputs = file.values.topRows(steps);
  } else if (opts.sparse_inputs) {
    const Vector impulse = parse_real_list(*opts.sparse_inputs, "--sparse-inputs");
    if (impulse.size() != 2) throw ArgumentError("--sparse-inputs expects DENSITY,AMPLITUDE");
    std::mt19937_64 rng(opts.seed);
    inputs = sparse_impulses(k - 1, model.p(), impulse(0), impulse(1), rng);
  }

  Vector x0 = Vector::Zero(n);
  if (opts.x0) {
    x0 = parse_real_list(*opts.x0, "--x0");
    if (x0.size() != n) throw ArgumentError("--x0 must have " + std::to_string(n) + " entries");
  }

  const Trajectory traj = simulate_recursive(model, x0, inputs, k);
  const Trajectory closed = simulate_closed_form(g_kernel(model, k), x0, inputs, k);
  const double deviation = (traj.states - closed.states).cwiseAbs().maxCoeff();

  io::write_csv(opts.out, io::labelled(traj.states, "x"));
  if (opts.inputs_out) io::write_csv(*opts.inputs_out, io::labelled(traj.inputs, "u"));
  if (opts.observe || opts.observations_out) {
    if (!opts.observe || !opts.observations_out) {
      throw ArgumentError("--observe and --observations-out must be given together");
    }
    const SensorSet sensors = io::parse_sensor_list(*opts.observe, model.n());
    io::TimeSeries obs;
    obs.values.resize(traj.states.rows(), static_cast<Eigen::Index>(sensors.size()));
    for (std::size_t c = 0; c < sensors.size(); ++c) {
      const auto idx = static_cast<Eigen::Index>(sensors.indices()[c]);
      obs.values.col(static_cast<Eigen::Index>(c)) = traj.states.col(idx);
      obs.channels.push_back("x" + std::to_string(idx + 1));
    }
    io::write_csv(*opts.observations_out, obs);
  }

  report << "simulated " << k << " steps of a " << n << "-state model\n";
  report << "recursive vs closed-form max abs deviation: " << io::format_double(deviation)
         << "\n";
  return kSuccess;
}

int cmd_estimate(const EstimateOptions& opts, std::ostream& report) {
  const io::TimeSeries data = io::read_csv(opts.data, 2);
  const io::TimeSeries b_file = io::read_csv(opts.b_matrix, 1);
  const Matrix& states = data.values;
  const Matrix& b = b_file.values;
  if (b.rows() != states.cols()) {
    throw ArgumentError("data has " + std::to_string(states.cols()) +
                        " channels but B has " + std::to_string(b.rows()) + " rows");
  }

  std::optional<FractionalOrders> alpha;
  if (opts.alpha) alpha = FractionalOrders(parse_real_list(*opts.alpha, "--alpha"));
  const HaarSlopeEstimator estimator(ScaleRange{opts.scale_min, opts.scale_max});

  EmConfig cfg;
  cfg.lambda = opts.lambda;
  cfg.sigma2 = opts.sigma2;
  cfg.truncation = opts.truncation;
  cfg.max_iterations = opts.max_iterations;
  cfg.objective_tol = opts.objective_tol;

  const EmEstimate est = run_em(states, b, cfg, alpha, std::nullopt, &estimator);
  const SystemModel fitted(est.alpha, est.a_hat, b);
  const SystemModel baseline(est.alpha, est.a_init, b);
  const Matrix actual = states.bottomRows(states.rows() - 1);
  const double rmse_with =
      rmse(one_step_predictions(fitted, states, est.u_hat, est.truncation), actual);
  const double rmse_without = rmse(
      one_step_predictions(baseline, states, Matrix::Zero(est.u_hat.rows(), b.cols()),
                           est.truncation),
      actual);
  const double ratio = rmse_without > 0.0 ? rmse_with / rmse_without : 1.0;

  fs::create_directories(opts.out);
  io::write_model(opts.out / "model.json",
                  io::ModelFile::from_model(
                      fitted, "estimated from " + opts.data.filename().string() +
                                  " with lambda=" + io::format_double(opts.lambda) +
                                  " sigma2=" + io::format_double(opts.sigma2)));
  io::write_csv(opts.out / "inputs.csv", io::labelled(est.u_hat, "u"));
  io::TimeSeries trace;
  trace.channels = {"iteration", "objective"};
  trace.values.resize(static_cast<Eigen::Index>(est.objective_trace.size()), 2);
  for (std::size_t i = 0; i < est.objective_trace.size(); ++i) {
    trace.values(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
    trace.values(static_cast<Eigen::Index>(i), 1) = est.objective_trace[i];
  }
  io::write_csv(opts.out / "objective.csv", trace);

  nlohmann::ordered_json meta;
  meta["converged"] = est.converged;
  meta["iterations"] = est.iterations_run;
  meta["truncation"] = est.truncation;
  meta["penalty"] = cfg.penalty();
  meta["alpha"] = to_std(est.alpha.values());
  meta["underdetermined"] = est.underdetermined;
  meta["rmse_with_inputs"] = rmse_with;
  meta["rmse_without_inputs"] = rmse_without;
  meta["error_ratio"] = ratio;
  write_json(opts.out / "report.json", meta);

  if (!est.converged) {
    report << "warning: EM did not converge within " << est.iterations_run
           << " iterations; results written anyway\n";
  }
  report << "iterations: " << est.iterations_run
         << (est.converged ? " (converged)" : " (not converged)") << "\n";
  report << "final objective: " << io::format_double(est.objective_trace.back()) << "\n";
  report << "one-step RMSE with inputs: " << io::format_double(rmse_with)
         << ", without inputs: " << io::format_double(rmse_without) << "\n";
  report << "error ratio (with/without): " << io::format_double(ratio) << "\n";
  return kSuccess;
}

int cmd_select_sensors(const SelectOptions& opts, std::ostream& report) {
  const SystemModel model = io::read_model(opts.model).to_model();
  if (opts.horizon == 0) throw ArgumentError("--horizon must be >= 1");
  if (opts.exhaustive && model.n() > opts.exhaustive_limit) {
    throw ArgumentError("--exhaustive refused for " + std::to_string(model.n()) +
                        " states (limit " + std::to_string(opts.exhaustive_limit) + ")");
  }
  const RankOracle oracle(model, opts.horizon);
  const SelectionResult sel = greedy_select(oracle, GreedyOptions{opts.lazy});

  nlohmann::ordered_json out;
  out["horizon"] = opts.horizon;
  out["selected"] = sensor_json(sel.selected);
  out["achieved_rank"] = sel.selected.achieved_rank.value_or(0);
  out["target_rank"] = sel.rank_target;
  out["feasible"] = sel.feasible;

  report << "greedy selection: {" << io::format_sensor_list(sel.selected) << "} ("
         << sel.selected.size() << " of " << model.n() << " sensors)\n";
  report << "rank " << sel.selected.achieved_rank.value_or(0) << " / target "
         << sel.rank_target << (sel.feasible ? "" : " (infeasible)") << "\n";

  if (opts.exhaustive) {
    const auto best = exhaustive_min_sensors(oracle, opts.exhaustive_limit);
    nlohmann::ordered_json ex;
    if (best) {
      ex["optimal"] = sensor_json(*best);
      ex["ratio"] = static_cast<double>(sel.selected.size()) /
                    static_cast<double>(best->size());
      report << "exhaustive optimum: {" << io::format_sensor_list(*best) << "}, ratio "
             << io::format_double(ex["ratio"].get<double>()) << "\n";
    } else {
      ex["optimal"] = nullptr;
      ex["ratio"] = nullptr;
      report << "exhaustive search: target unreachable\n";
    }
    out["exhaustive"] = ex;
  }

  fs::create_directories(opts.out);
  write_json(opts.out / "sensors.json", out);
  io::TimeSeries hist;
  hist.channels = {"step", "sensor", "gain", "rank"};
  hist.values.resize(static_cast<Eigen::Index>(sel.marginal_history.size()), 4);
  std::size_t rank = 0;
  for (std::size_t i = 0; i < sel.marginal_history.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    rank += sel.marginal_history[i].gain;
    hist.values(r, 0) = static_cast<double>(i + 1);
    hist.values(r, 1) = static_cast<double>(sel.marginal_history[i].sensor + 1);
    hist.values(r, 2) = static_cast<double>(sel.marginal_history[i].gain);
    hist.values(r, 3) = static_cast<double>(rank);
  }
  io::write_csv(opts.out / "marginals.csv", hist);
  return sel.feasible ? kSuccess : kNegativeVerdict;
}

int cmd_check_observability(const CheckOptions& opts, std::ostream& report) {
  const SystemModel model = io::read_model(opts.model).to_model();
  if (opts.horizon == 0) throw ArgumentError("--horizon must be >= 1");
  const SensorSet sensors = resolve_sensors(opts.sensors, model.n());
  const ObservabilityVerdict verdict = is_perfectly_observable(model, sensors, opts.horizon);

  report << "sensors: {" << io::format_sensor_list(sensors) << "}, horizon " << opts.horizon
         << "\n";
  report << "rank " << verdict.rank << " / target " << verdict.target << "\n";
  report << "verdict: " << (verdict.observable ? "perfectly observable" : "not perfectly observable")
         << "\n";
  if (verdict.report) {
    const Vector& sv = verdict.report->singular_values;
    const Eigen::Index tail = std::min<Eigen::Index>(sv.size(), 5);
    report << "singular value tail:";
    for (Eigen::Index i = sv.size() - tail; i < sv.size(); ++i) {
      report << " " << io::format_double(sv(i));
    }
    report << " (tolerance " << io::format_double(verdict.report->tolerance_used) << ")\n";
  }
  return verdict.observable ? kSuccess : kNegativeVerdict;
}

int cmd_recover(const RecoverOptions& opts, std::ostream& report) {
  const SystemModel model = io::read_model(opts.model).to_model();
  const SensorSet sensors = resolve_sensors(opts.sensors, model.n());
  const io::TimeSeries data = io::read_csv(opts.data, 1);
  if (static_cast<std::size_t>(data.values.cols()) != sensors.size()) {
    throw ArgumentError("observations have " + std::to_string(data.values.cols()) +
                        " columns but " + std::to_string(sensors.size()) +
                        " sensors were given");
  }
  if (opts.horizon && static_cast<std::size_t>(data.values.rows()) != *opts.horizon) {
    throw ArgumentError("observations have " + std::to_string(data.values.rows()) +
                        " rows, expected K = " + std::to_string(*opts.horizon));
  }
  const std::size_t k = static_cast<std::size_t>(data.values.rows());
  const ObservabilityPair pair = build_theta_xi(model, sensors, k);
  const ObservationStack obs = ObservationStack::from_rows(data.values, sensors);

  RecoveryResult result;
  if (opts.method == "joint") {
    result = recover_joint(pair, obs);
  } else if (opts.method == "ridge") {
    ProjectedRidgeOptions ropts;
    ropts.epsilon = opts.epsilon;
    if (opts.sparse_inputs) {
      LassoConfig lasso_cfg;
      lasso_cfg.penalty = 2.0 * opts.sigma2 * opts.lambda;
      ropts.sparse_inputs = lasso_cfg;
    }
    result = recover_projected_ridge(pair, obs, ropts);
  } else {
    throw ArgumentError("--method must be 'joint' or 'ridge'");
  }

  nlohmann::ordered_json diag;
  nlohmann::json warnings = nlohmann::json::array();
  diag["method"] = std::string(to_string(result.method));
  diag["horizon"] = k;
  diag["sensors"] = sensor_json(sensors);
  diag["rank"] = result.rank;
  diag["rank_target"] = result.rank_target;
  diag["perfectly_observable"] = !result.rank_deficient();
  diag["residual_norm"] = result.residual_norm;
  diag["smallest_retained_singular_value"] = result.smallest_retained_singular_value;
  if (result.method == RecoveryMethod::kProjectedRidge) diag["epsilon"] = result.epsilon;
  diag["x0_norm"] = result.x0_hat.norm();
  if (result.rank_deficient()) {
    warnings.push_back("rank " + std::to_string(result.rank) + " below target " +
                       std::to_string(result.rank_target) +
                       ": recovered values are not unique");
  }

  report << "method: " << to_string(result.method) << ", rank " << result.rank << " / target "
         << result.rank_target << "\n";
  report << "residual norm: " << io::format_double(result.residual_norm) << "\n";

  std::optional<Vector> true_x0;
  if (opts.truth_states) {
    const io::TimeSeries truth = io::read_csv(*opts.truth_states, 1);
    if (truth.values.cols() != result.x0_hat.size()) {
      throw ArgumentError("ground-truth states must have n columns");
    }
    true_x0 = truth.values.row(0).transpose();
    const double err = (*true_x0 - result.x0_hat).cwiseAbs().maxCoeff();
    diag["max_abs_error_x0"] = err;
    report << "max abs error x0: " << io::format_double(err) << "\n";
  }
  if (opts.truth_inputs && result.u_hat.size() > 0) {
    const io::TimeSeries truth = io::read_csv(*opts.truth_inputs, 1);
    if (truth.values.cols() != result.u_hat.cols() ||
        truth.values.rows() < result.u_hat.rows()) {
      throw ArgumentError("ground-truth inputs must be at least (K-1) x p");
    }
    const double err =
        (truth.values.topRows(result.u_hat.rows()) - result.u_hat).cwiseAbs().maxCoeff();
    diag["max_abs_error_inputs"] = err;
    report << "max abs error inputs: " << io::format_double(err) << "\n";
  }
  diag["warnings"] = warnings;
  for (const auto& w : warnings) report << "warning: " << w.get<std::string>() << "\n";

  fs::create_directories(opts.out);
  io::write_csv(opts.out / "x0.csv", io::labelled(result.x0_hat.transpose(), "x"));
  io::write_csv(opts.out / "inputs.csv", io::labelled(result.u_hat, "u"));
  write_json(opts.out / "diagnostics.json", diag);

  if (opts.plot) {
    if (!true_x0) {
      report << "warning: --plot needs --truth-states; no plot written\n";
    } else {
      const std::string svg =
          overlay_svg("initial state: actual vs recovered",
                      PlotSeries{"actual", to_std(*true_x0)},
                      PlotSeries{"recovered", to_std(result.x0_hat)});
      io::write_text(*opts.plot, svg);
    }
  }
  return kSuccess;
}

int cmd_synth(const SynthOptions& opts, std::ostream& report) {
  const SynthResult synth = synthesize(opts.config);
  fs::create_directories(opts.out);
  std::ostringstream provenance;
  provenance << "synthetic: seed=" << opts.config.seed << " n=" << opts.config.n
             << " p=" << opts.config.p << " T=" << opts.config.samples;
  io::write_model(opts.out / "model.json",
                  io::ModelFile::from_model(synth.model, provenance.str()));
  io::write_csv(opts.out / "states.csv", io::labelled(synth.trajectory.states, "x"));
  io::write_csv(opts.out / "inputs.csv", io::labelled(synth.trajectory.inputs, "u"));
  // B on its own, in the layout estimate --b-matrix expects.
  io::write_csv(opts.out / "b.csv", io::labelled(synth.model.b(), "b"));
  const auto impulses = (synth.trajectory.inputs.array() != 0.0).count();
  report << "wrote " << opts.config.n << "-state model, " << opts.config.samples
         << " samples, " << impulses << " input impulses to " << opts.out.string() << "\n";
  return kSuccess;
}

}  // namespace fracdyn::cli
