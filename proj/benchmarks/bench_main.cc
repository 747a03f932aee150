#include <benchmark/benchmark.h>

#include "beamobs/beam_model.h"
#include "beamobs/config.h"
#include "beamobs/estimate.h"
#include "beamobs/experiment.h"
#include "beamobs/gramian.h"
#include "beamobs/placement.h"

namespace {

using beamobs::AssembleTruncatedSystemAtNodes;
using beamobs::BeamSpec;
using beamobs::BuildModalBasis;
using beamobs::ModalBasis;

const ModalBasis& Basis(int modes) {
  static const ModalBasis b8 = BuildModalBasis(BeamSpec::AluminumStrip(), 8, 501);
  static const ModalBasis b10 = BuildModalBasis(BeamSpec::AluminumStrip(), 10, 501);
  return modes == 8 ? b8 : b10;
}

void BM_CharacteristicRoots(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(beamobs::FindCharacteristicRoots(static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_CharacteristicRoots)->Arg(10)->Arg(40);

void BM_ContinuumGramianSweep(benchmark::State& state) {
  const ModalBasis& basis = Basis(8);
  const double T = basis.SlowestPeriod();
  for (auto _ : state) {
    auto g = beamobs::CandidateGramians(basis, beamobs::SystemVariant::kContinuum,
                                        {T, T / 4000}, 1);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_ContinuumGramianSweep)->Unit(benchmark::kMillisecond);

void BM_TruncatedGramianSweep(benchmark::State& state) {
  const ModalBasis& basis = Basis(8);
  const double T = basis.SlowestPeriod();
  for (auto _ : state) {
    auto g = beamobs::CandidateGramians(basis, beamobs::SystemVariant::kTruncated,
                                        {T, T / 4000}, 1);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_TruncatedGramianSweep)->Unit(benchmark::kMillisecond);

void BM_Relaxation(benchmark::State& state) {
  const ModalBasis& basis = Basis(8);
  const double T = basis.SlowestPeriod();
  const auto variant = state.range(0) ? beamobs::SystemVariant::kTruncated
                                      : beamobs::SystemVariant::kContinuum;
  const auto gramians = beamobs::CandidateGramians(basis, variant, {T, T / 4000}, 1);
  for (auto _ : state) {
    auto sol = beamobs::SolveRelaxation(gramians, 10);
    benchmark::DoNotOptimize(sol.objective);
  }
}
BENCHMARK(BM_Relaxation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_EstimationRun(benchmark::State& state) {
  const ModalBasis& basis = Basis(10);
  const std::vector<int> nodes = {0, 50, 100, 150, 200, 250, 300, 350, 400, 450};
  const auto sys = AssembleTruncatedSystemAtNodes(basis, nodes);
  beamobs::ExperimentConfig config;
  const auto ukf = beamobs::EstimationConfig(config, basis, 10);
  const auto truth = beamobs::TipDeflectionTruth(basis, 0.05);
  for (auto _ : state) {
    auto run = beamobs::RunEstimation(sys, truth, ukf, basis.SlowestPeriod(), 3);
    benchmark::DoNotOptimize(run.covariance_trace.data());
  }
}
BENCHMARK(BM_EstimationRun)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
