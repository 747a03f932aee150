#pragma once

#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "beamobs/beam_model.h"
#include "beamobs/config.h"
#include "beamobs/estimate.h"
#include "beamobs/gramian.h"

namespace beamobs {

/// Paths written by a command, in the order they were written.
using WrittenFiles = std::vector<std::filesystem::path>;

/// One single-sensor Gramian per grid node: n x n truncated analytical or
/// 2 x 2 continuum analytical, over `options.horizon`.
std::vector<Eigen::MatrixXd> CandidateGramians(const ModalBasis& basis,
                                               SystemVariant variant,
                                               const SampledGramianOptions& options,
                                               int threads = 0);

/// Horizon and quadrature step for Gramians of `basis` under `config`.
SampledGramianOptions GramianOptions(const ModalBasis& basis,
                                     const ExperimentConfig& config);

/// Static tip-load deflection w(x) = d x^2 (3L - x) / (2 L^3), at rest,
/// projected onto the basis.
InitialCondition TipDeflectionTruth(const ModalBasis& basis, double tip_deflection);

/// Q, R, P0 and dt for `num_sensors` sensors from the [estimate] section.
UkfConfig EstimationConfig(const ExperimentConfig& config, const ModalBasis& basis,
                           int num_sensors);

/// modes.csv, curvatures.csv, roots.csv and SVG plots of both.
WrittenFiles CmdModes(const ExperimentConfig& config);

/// J(x) along the beam for every mode count in [scan.min_modes,
/// scan.max_modes], per selected system variant, plus log-scale SVGs.
WrittenFiles CmdScan(const ExperimentConfig& config);

/// Relaxed and rounded placements for budgets 1..place.sweep_max_budget:
/// placement_<variant>.json, an objective-vs-budget table and a strip chart.
WrittenFiles CmdPlace(const ExperimentConfig& config);

/// Monte-Carlo UKF comparison of optimal, random, uniform and curvature-peak
/// placements: trace and residual tables, SVGs and estimate_summary.json.
WrittenFiles CmdEstimate(const ExperimentConfig& config);

/// Every command above plus config_resolved.json.
WrittenFiles CmdRepro(const ExperimentConfig& config);

/// diagnostic.json in the output directory describing `error`.
std::filesystem::path WriteDiagnostic(const ExperimentConfig& config,
                                      const std::string& command,
                                      const std::exception& error);

}  // namespace beamobs
