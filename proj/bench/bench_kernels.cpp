// OpenMP grid kernels against their serial references on desk-scale inputs.

#include <random>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "isac/channel.hpp"
#include "isac/estimation.hpp"
#include "isac/fusion.hpp"
#include "isac/harness.hpp"
#include "isac/kernels.hpp"

namespace isac {
namespace {

struct DeskBeam {
  BsSite bs;
  SearchGrids grids;
  CMatrix combiner;
  CVector tx;
  CVector beam;
};

const DeskBeam& desk_beam() {
  static const DeskBeam d = [] {
    DeskBeam out;
    const ExperimentConfig c = desk_config();
    out.bs = c.site_prototype();
    out.grids = c.grids();
    std::mt19937_64 rng(1);
    const std::vector<BeamDirection> dirs{{0.9, 1.2}};
    const auto [tx, rx] = design_alignment_beams(dirs, out.bs, rng);
    out.combiner = rx.combined();
    out.tx = tx.equivalent();
    const double x = std::sin(0.9) * std::cos(1.2), z = std::cos(0.9);
    out.beam = beam_signature(out.bs.array, x, z, out.combiner, out.tx);
    return out;
  }();
  return d;
}

void BM_GrqTraceScan(benchmark::State& state) {
  const DeskBeam& d = desk_beam();
  const auto blocks = kernels::combiner_blocks(d.combiner, d.bs.array.horizontal, d.bs.array.vertical);
  const auto psi = d.grids.psi.values();
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::grq_trace_scan(blocks, d.beam, psi, d.bs.array.spacing_wavelengths));
}

void BM_GrqTraceScanReference(benchmark::State& state) {
  const DeskBeam& d = desk_beam();
  const auto blocks = kernels::combiner_blocks(d.combiner, d.bs.array.horizontal, d.bs.array.vertical);
  const auto psi = d.grids.psi.values();
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::grq_trace_scan_reference(blocks, d.beam, psi, d.bs.array.spacing_wavelengths));
}

void BM_AoaObjective(benchmark::State& state) {
  const DeskBeam& d = desk_beam();
  const auto z = SearchGrid1D{0.0, 0.999, 128}.values(), x = SearchGrid1D{-0.999, 0.999, 128}.values();
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::aoa_objective_grid(d.beam, d.combiner, d.tx, d.bs.array.horizontal,
                                                         d.bs.array.vertical, d.bs.array.spacing_wavelengths, z, x));
}

void BM_AoaObjectiveReference(benchmark::State& state) {
  const DeskBeam& d = desk_beam();
  const auto z = SearchGrid1D{0.0, 0.999, 128}.values(), x = SearchGrid1D{-0.999, 0.999, 128}.values();
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::aoa_objective_grid_reference(
        d.beam, d.combiner, d.tx, d.bs.array.horizontal, d.bs.array.vertical, d.bs.array.spacing_wavelengths, z, x));
}

void BM_DopplerScan(benchmark::State& state) {
  const DeskBeam& d = desk_beam();
  const CVector o = doppler_phasor(321.0, d.bs.symbols, d.bs.symbol_period);
  const auto grid = d.grids.doppler.values();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::doppler_scan(o, grid, d.bs.symbol_period));
}

void BM_DopplerScanReference(benchmark::State& state) {
  const DeskBeam& d = desk_beam();
  const CVector o = doppler_phasor(321.0, d.bs.symbols, d.bs.symbol_period);
  const auto grid = d.grids.doppler.values();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::doppler_scan_reference(o, grid, d.bs.symbol_period));
}

struct Lattice {
  std::vector<Vec3> points;
  std::vector<kernels::RangeBearing> members;
  kernels::LossValues losses;
};

const Lattice& desk_lattice() {
  static const Lattice l = [] {
    Lattice out;
    const FusionConfig f = desk_config().fusion;
    const Vec3 target(20, -30, 120);
    for (int j = 0; j < 3; ++j) {
      const double a = 2.0 * kPi * j / 3.0;
      const Vec3 s(450.0 * std::cos(a), 450.0 * std::sin(a), 30.0);
      out.members.push_back({s, (target - s + Vec3(0.5, -0.3, 0.2)).normalized(), (target - s).norm() + 0.4});
    }
    out.points = build_lattice(target, f.lattice_points, f.lattice_half_width);
    out.losses = kernels::position_losses_reference(out.points, out.members, f.beta1);
    return out;
  }();
  return l;
}

void BM_PositionLosses(benchmark::State& state) {
  const Lattice& l = desk_lattice();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::position_losses(l.points, l.members, 0.5));
}

void BM_PositionLossesReference(benchmark::State& state) {
  const Lattice& l = desk_lattice();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::position_losses_reference(l.points, l.members, 0.5));
}

void BM_ParetoMask(benchmark::State& state) {
  const Lattice& l = desk_lattice();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pareto_mask(l.losses.range_loss, l.losses.direction_loss));
}

void BM_ParetoMaskReference(benchmark::State& state) {
  // all-pairs form; a 21^3 lattice keeps the run short
  const FusionConfig f = desk_config().fusion;
  const auto points = build_lattice(Vec3(20, -30, 120), 21, f.lattice_half_width);
  const auto losses = kernels::position_losses_reference(points, desk_lattice().members, f.beta1);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::pareto_mask_reference(losses.range_loss, losses.direction_loss));
}

void BM_ParetoMaskSmall(benchmark::State& state) {
  const FusionConfig f = desk_config().fusion;
  const auto points = build_lattice(Vec3(20, -30, 120), 21, f.lattice_half_width);
  const auto losses = kernels::position_losses_reference(points, desk_lattice().members, f.beta1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pareto_mask(losses.range_loss, losses.direction_loss));
}

void BM_DeskTrial(benchmark::State& state) {
  const ExperimentConfig c = desk_config();
  int trial = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(c, 0, trial++));
}

BENCHMARK(BM_GrqTraceScan)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GrqTraceScanReference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_AoaObjective)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AoaObjectiveReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DopplerScan)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DopplerScanReference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PositionLosses)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PositionLossesReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ParetoMask)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ParetoMaskSmall)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ParetoMaskReference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DeskTrial)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace isac

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
