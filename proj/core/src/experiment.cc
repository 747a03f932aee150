#include "beamobs/experiment.h"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "beamobs/errors.h"
#include "beamobs/io.h"
#include "beamobs/parallel.h"
#include "beamobs/placement.h"
#include "beamobs/svg.h"
#include "json.hpp"

namespace beamobs {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::vector<SystemVariant> Variants(SystemVariant selection) {
  if (selection == SystemVariant::kBoth) {
    return {SystemVariant::kTruncated, SystemVariant::kContinuum};
  }
  return {selection};
}

std::vector<double> ToStd(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Non-finite values are stored as strings so the JSON stays valid.
Json Number(double v) {
  if (std::isfinite(v)) return v;
  return FormatNumber(v);
}

Json MetricsJson(const MetricSet& m) {
  return Json{{"lambda_min", Number(m.lambda_min)}, {"lambda_max", Number(m.lambda_max)},
              {"nu", Number(m.nu)},                 {"kappa", Number(m.kappa)},
              {"objective", Number(m.objective)},   {"singular", m.singular}};
}

fs::path WriteSvg(const fs::path& dir, const std::string& name, const PlotSpec& spec,
                  const std::vector<PlotSeries>& series) {
  const fs::path path = dir / (name + ".svg");
  WriteText(path, RenderPlot(spec, series));
  return path;
}

fs::path WriteJson(const fs::path& dir, const std::string& name, const Json& doc) {
  const fs::path path = dir / (name + ".json");
  WriteText(path, doc.dump(1) + "\n");
  return path;
}

ModalBasis BasisFor(const ExperimentConfig& config, int num_modes) {
  return BuildModalBasis(config.Beam(), num_modes, config.grid_size);
}

Table ModeTable(const ModalBasis& basis, const Eigen::MatrixXd& values,
                const char* prefix) {
  Table table;
  table.AddColumn("x_m", basis.grid);
  for (int i = 0; i < basis.num_modes(); ++i) {
    table.AddColumn(fmt::format("{}{}", prefix, i + 1), values.col(i));
  }
  return table;
}

std::vector<PlotSeries> ModeSeries(const ModalBasis& basis, const Eigen::MatrixXd& values) {
  std::vector<PlotSeries> series;
  for (int i = 0; i < basis.num_modes(); ++i) {
    series.push_back({fmt::format("mode {}", i + 1), ToStd(basis.grid),
                      ToStd(values.col(i)), false});
  }
  return series;
}

}  // namespace

SampledGramianOptions GramianOptions(const ModalBasis& basis,
                                     const ExperimentConfig& config) {
  const double period = basis.SlowestPeriod();
  SampledGramianOptions options;
  options.horizon = config.horizon_periods * period;
  options.dt = period / config.steps_per_period;
  return options;
}

std::vector<Eigen::MatrixXd> CandidateGramians(const ModalBasis& basis,
                                               SystemVariant variant,
                                               const SampledGramianOptions& options,
                                               int threads) {
  if (variant == SystemVariant::kBoth) {
    throw std::invalid_argument("CandidateGramians: pick one system variant");
  }
  std::vector<Eigen::MatrixXd> gramians(basis.grid_size());
  ParallelFor(
      basis.grid_size(),
      [&](int k) {
        if (variant == SystemVariant::kTruncated) {
          const int node[] = {k};
          gramians[k] =
              TruncatedAnalyticalGramian(AssembleTruncatedSystemAtNodes(basis, node),
                                         options.horizon)
                  .matrix;
        } else {
          gramians[k] = ContinuumAnalyticalGramian(basis, basis.grid(k), options).matrix;
        }
      },
      static_cast<unsigned>(threads));
  return gramians;
}

InitialCondition TipDeflectionTruth(const ModalBasis& basis, double tip_deflection) {
  const double L = basis.length();
  const Eigen::ArrayXd x = basis.grid.array();
  const Eigen::VectorXd w0 =
      (tip_deflection * x.square() * (3.0 * L - x) / (2.0 * L * L * L)).matrix();
  return ProjectInitialCondition(basis, w0, Eigen::VectorXd::Zero(w0.size()));
}

UkfConfig EstimationConfig(const ExperimentConfig& config, const ModalBasis& basis,
                           int num_sensors) {
  const int n = basis.num_modes();
  UkfConfig ukf;
  ukf.dt = basis.SlowestPeriod() / config.estimate_steps_per_period;
  ukf.process_noise = config.process_noise * Eigen::MatrixXd::Identity(2 * n, 2 * n);
  ukf.measurement_noise =
      config.measurement_noise * Eigen::MatrixXd::Identity(num_sensors, num_sensors);
  ukf.initial_covariance = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  ukf.initial_covariance.diagonal().head(n).setConstant(
      config.initial_displacement_variance);
  ukf.initial_covariance.diagonal().tail(n).setConstant(config.initial_velocity_variance);
  return ukf;
}

WrittenFiles CmdModes(const ExperimentConfig& config) {
  const fs::path dir = config.output_dir;
  const ModalBasis basis = BasisFor(config, config.n_modes);
  WrittenFiles files;

  Table roots;
  Eigen::VectorXd index(basis.num_modes());
  for (int i = 0; i < basis.num_modes(); ++i) index(i) = i + 1;
  roots.AddColumn("mode", index);
  roots.AddColumn("bL", basis.roots * basis.length());
  roots.AddColumn("b_per_m", basis.roots);
  roots.AddColumn("omega_rad_s", basis.frequencies);
  roots.AddColumn("frequency_hz", basis.frequencies / (2.0 * std::numbers::pi));
  roots.AddColumn("norm_c", basis.norms);
  files.push_back(WriteTable(roots, dir, "roots", config.format));
  files.push_back(WriteTable(ModeTable(basis, basis.mode_shapes, "phi"), dir, "modes",
                             config.format));
  files.push_back(WriteTable(ModeTable(basis, basis.curvatures, "phi_xx"), dir,
                             "curvatures", config.format));
  files.push_back(WriteSvg(dir, "modes",
                           {"Mode shapes", "x (m)", "phi_i(x)", false},
                           ModeSeries(basis, basis.mode_shapes)));
  files.push_back(WriteSvg(dir, "curvatures",
                           {"Mode shape curvatures", "x (m)", "phi_i''(x) (1/m^2)", false},
                           ModeSeries(basis, basis.curvatures)));
  return files;
}

WrittenFiles CmdScan(const ExperimentConfig& config) {
  const fs::path dir = config.output_dir;
  WrittenFiles files;
  for (SystemVariant variant : Variants(config.system)) {
    const std::string name(ToString(variant));
    Table table;
    std::vector<PlotSeries> series;
    for (int n = config.scan_min_modes; n <= config.scan_max_modes; ++n) {
      const ModalBasis basis = BasisFor(config, n);
      if (table.columns.empty()) table.AddColumn("x_m", basis.grid);
      const auto gramians =
          CandidateGramians(basis, variant, GramianOptions(basis, config), config.threads);
      const std::vector<MetricSet> metrics = ObjectiveScan(gramians, config.weight);
      Eigen::VectorXd J(metrics.size());
      for (std::size_t k = 0; k < metrics.size(); ++k) J(k) = metrics[k].objective;
      table.AddColumn(fmt::format("J_n{}", n), J);
      series.push_back({fmt::format("{} modes", n), ToStd(basis.grid), ToStd(J), false});
    }
    table.metadata["system"] = name;
    table.metadata["weight"] = FormatNumber(config.weight);
    table.metadata["horizon_periods"] = FormatNumber(config.horizon_periods);
    files.push_back(WriteTable(table, dir, "scan_" + name, config.format));
    files.push_back(WriteSvg(dir, "scan_" + name,
                             {"Objective J(x), " + name + " system", "x (m)",
                              "J = kappa + w nu", true},
                             series));
  }
  return files;
}

WrittenFiles CmdPlace(const ExperimentConfig& config) {
  const fs::path dir = config.output_dir;
  const ModalBasis basis = BasisFor(config, config.place_modes);
  const std::vector<double> positions = ToStd(basis.grid);
  RelaxationOptions options;
  options.weight = config.weight;
  WrittenFiles files;

  for (SystemVariant variant : Variants(config.system)) {
    const std::string name(ToString(variant));
    const auto gramians =
        CandidateGramians(basis, variant, GramianOptions(basis, config), config.threads);
    const int budgets = config.sweep_max_budget;
    std::vector<PlacementSolution> solutions(budgets);
    ParallelFor(
        budgets,
        [&](int k) { solutions[k] = OptimizePlacement(gramians, positions, k + 1, options); },
        static_cast<unsigned>(config.threads));

    Json doc;
    doc["system"] = name;
    doc["n_modes"] = config.place_modes;
    doc["weight"] = config.weight;
    doc["grid_m"] = positions;
    Json entries = Json::array();
    Table summary;
    Eigen::MatrixXd rows(budgets, 9);
    PlotSeries strip{"selected", {}, {}, true};
    for (int k = 0; k < budgets; ++k) {
      const PlacementSolution& sol = solutions[k];
      if (sol.status == SolverStatus::kInfeasible) {
        throw NumericalError("place: all-on " + name + " system is not observable");
      }
      std::vector<double> where;
      for (int node : sol.binary.selected) {
        where.push_back(positions[node]);
        strip.x.push_back(positions[node]);
        strip.y.push_back(k + 1);
      }
      Json trace = Json::array();
      for (const SolverTraceEntry& e : sol.trace) {
        trace.push_back({{"iteration", e.iteration},
                         {"barrier_parameter", e.barrier_parameter},
                         {"objective", e.objective},
                         {"gap", e.gap}});
      }
      entries.push_back({{"budget", k + 1},
                         {"status", std::string(ToString(sol.status))},
                         {"iterations", sol.iterations},
                         {"scale", sol.scale},
                         {"relaxed_objective", sol.objective},
                         {"lower_bound", sol.lower_bound},
                         {"duality_gap", sol.duality_gap},
                         {"kkt_residual", sol.kkt_residual},
                         {"constraint_residual", sol.constraint_residual},
                         {"kappa_hat", sol.kappa_hat},
                         {"nu_hat", sol.nu_hat},
                         {"nu_original_units", sol.nu_original},
                         {"selected_nodes", sol.binary.selected},
                         {"selected_m", where},
                         {"exchanges", sol.binary.exchanges},
                         {"repairs", sol.binary.repairs},
                         {"binary_metrics_scaled", MetricsJson(sol.binary.scaled_metrics)},
                         {"binary_metrics", MetricsJson(sol.binary.metrics)},
                         {"activation", ToStd(sol.activation)},
                         {"solver_trace", trace}});
      rows.row(k) << k + 1, sol.objective, sol.lower_bound,
          sol.binary.scaled_metrics.objective, sol.binary.scaled_metrics.kappa,
          sol.binary.scaled_metrics.nu, sol.binary.metrics.nu, sol.kkt_residual,
          static_cast<double>(sol.iterations);
    }
    doc["budgets"] = std::move(entries);
    const char* columns[] = {"budget",       "relaxed_objective", "lower_bound",
                             "binary_objective", "binary_kappa",  "binary_nu_scaled",
                             "binary_nu",    "kkt_residual",      "iterations"};
    for (int c = 0; c < 9; ++c) summary.AddColumn(columns[c], rows.col(c));
    summary.metadata["system"] = name;
    summary.metadata["n_modes"] = std::to_string(config.place_modes);

    files.push_back(WriteJson(dir, "placement_" + name, doc));
    files.push_back(WriteTable(summary, dir, "placement_" + name + "_objective", config.format));
    files.push_back(WriteSvg(dir, "placement_" + name,
                             {"Selected sensor locations, " + name + " system", "x (m)",
                              "sensor budget p", false},
                             {strip}));
  }
  return files;
}

WrittenFiles CmdEstimate(const ExperimentConfig& config) {
  const fs::path dir = config.output_dir;
  const ModalBasis basis = BasisFor(config, config.estimate_modes);
  const std::vector<double> positions = ToStd(basis.grid);
  const int p = config.budget;
  RelaxationOptions options;
  options.weight = config.weight;

  std::vector<PlacementCandidate> candidates;
  for (SystemVariant variant : Variants(config.system)) {
    const auto gramians =
        CandidateGramians(basis, variant, GramianOptions(basis, config), config.threads);
    const PlacementSolution sol = OptimizePlacement(gramians, positions, p, options);
    if (sol.status == SolverStatus::kInfeasible) {
      throw NumericalError("estimate: relaxation infeasible");
    }
    if (static_cast<int>(sol.binary.selected.size()) != p) {
      throw NumericalError("estimate: rounding did not return the budget");
    }
    candidates.push_back({"optimal_" + std::string(ToString(variant)),
                          sol.binary.selected, false});
  }
  const BaselinePlacements baselines = MakeBaselinePlacements(basis, p, config.seed);
  candidates.push_back({"uniform", baselines.uniform, false});
  candidates.push_back({"curvature_peak", baselines.curvature_peak, false});
  candidates.push_back({"random", {}, true});

  const UkfConfig ukf = EstimationConfig(config, basis, p);
  const InitialCondition truth = TipDeflectionTruth(basis, config.truth_tip_deflection_m);
  const double horizon = config.horizon_periods * basis.SlowestPeriod();
  const PlacementComparison comparison = ComparePlacements(
      basis, candidates, config.trials, ukf, truth, horizon, config.seed, "random");

  WrittenFiles files;
  Table traces;
  traces.AddColumn("t_s", comparison.times);
  std::vector<PlotSeries> trace_series;
  Json summary;
  summary["reference"] = comparison.reference;
  summary["trials"] = config.trials;
  summary["budget"] = p;
  summary["n_modes"] = config.estimate_modes;
  Json rows = Json::array();
  for (const ComparisonRow& row : comparison.rows) {
    traces.AddColumn("trace_" + row.name, row.median_trace);
    trace_series.push_back(
        {row.name, ToStd(comparison.times), ToStd(row.median_trace), false});

    // First trial again for its residual history.
    const TruncatedSystem sys = AssembleTruncatedSystemAtNodes(basis, row.first_trial_sensors);
    const EstimationRun run = RunEstimation(sys, truth, ukf, horizon, TrialSeed(config.seed, 0));
    if (run.diverged) throw NumericalError("estimate: filter diverged for " + row.name);
    Table residual;
    residual.AddColumn("t_s", run.times);
    const Eigen::MatrixXd r = run.Residuals();
    const Eigen::MatrixXd bound = 3.0 * run.variances.array().cwiseMax(0.0).sqrt().matrix();
    const int n = basis.num_modes();
    for (int i = 0; i < 2 * n; ++i) {
      const std::string state =
          i < n ? fmt::format("eta{}", i + 1) : fmt::format("eta_dot{}", i - n + 1);
      residual.AddColumn("residual_" + state, r.col(i));
      residual.AddColumn("sigma3_" + state, bound.col(i));
    }
    residual.metadata["placement"] = row.name;
    residual.metadata["seed"] = std::to_string(run.seed);
    files.push_back(WriteTable(residual, dir, "residuals_" + row.name, config.format));
    files.push_back(WriteSvg(
        dir, "residuals_" + row.name,
        {"First-mode residual and 3 sigma bound, " + row.name, "t (s)", "eta_1 error",
         false},
        {{"residual", ToStd(run.times), ToStd(r.col(0)), false},
         {"+3 sigma", ToStd(run.times), ToStd(bound.col(0)), false},
         {"-3 sigma", ToStd(run.times), ToStd(-bound.col(0)), false}}));

    std::vector<double> where;
    for (int node : row.first_trial_sensors) where.push_back(positions[node]);
    rows.push_back({{"name", row.name},
                    {"median_time_averaged_trace", row.median_mean_trace},
                    {"median_terminal_residual_rms", row.median_terminal_rms},
                    {"percent_reduction_vs_reference", row.percent_reduction},
                    {"first_trial_sensors_m", where},
                    {"first_trial_within_3sigma", run.FractionWithinThreeSigma()},
                    {"trial_time_averaged_traces", row.trial_mean_traces}});
  }
  summary["placements"] = std::move(rows);
  files.push_back(WriteTable(traces, dir, "trace_comparison", config.format));
  files.push_back(WriteSvg(dir, "trace_comparison",
                           {"Median trace of the covariance", "t (s)", "trace P", true},
                           trace_series));
  files.push_back(WriteJson(dir, "estimate_summary", summary));
  return files;
}

WrittenFiles CmdRepro(const ExperimentConfig& config) {
  WrittenFiles files;
  const fs::path resolved = fs::path(config.output_dir) / "config_resolved.json";
  WriteText(resolved, ConfigToJson(config));
  files.push_back(resolved);
  for (auto* command : {&CmdModes, &CmdScan, &CmdPlace, &CmdEstimate}) {
    const WrittenFiles more = command(config);
    files.insert(files.end(), more.begin(), more.end());
  }
  return files;
}

fs::path WriteDiagnostic(const ExperimentConfig& config, const std::string& command,
                         const std::exception& error) {
  Json doc;
  doc["command"] = command;
  doc["error"] = error.what();
  doc["kind"] = dynamic_cast<const NumericalError*>(&error) ? "numerical" : "other";
  doc["config"] = Json::parse(ConfigToJson(config));
  return WriteJson(config.output_dir, "diagnostic", doc);
}

}  // namespace beamobs
