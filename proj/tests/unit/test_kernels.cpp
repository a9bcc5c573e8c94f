#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <Eigen/Eigenvalues>

#include "isac/channel.hpp"
#include "isac/kernels.hpp"
#include "test_support.hpp"

namespace isac {
namespace {

using namespace isac::kernels;

struct BeamCase {
  ArrayConfig array{8, 8, 16, 0.5};
  CMatrix combiner;
  CVector tx;
  CVector beam;
};

BeamCase beam_case(std::uint64_t seed) {
  BeamCase c;
  std::mt19937_64 rng(seed);
  BsSite bs = testing::desk_site();
  const std::vector<BeamDirection> dirs{{0.8, 1.1}};
  auto [tx, rx] = design_alignment_beams(dirs, bs, rng);
  c.combiner = rx.combined();
  c.tx = tx.equivalent();
  c.beam = beam_signature(c.array, 0.3, 0.5, c.combiner, c.tx) + 0.01 * testing::random_vector(16, rng);
  return c;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

TEST(Kernels, HermitianPinvIsMoorePenrose) {
  std::mt19937_64 rng(1);
  const CMatrix b = testing::random_matrix(6, 3, rng);
  const CMatrix h = b * b.adjoint();  // rank 3
  const CMatrix p = hermitian_pinv(h);
  EXPECT_LT((h * p * h - h).norm() / h.norm(), 1e-10);
  EXPECT_LT((p * h * p - p).norm() / p.norm(), 1e-10);
  EXPECT_LT((p - p.adjoint()).norm(), 1e-10);
}

TEST(Kernels, ProjectedCombinerMatchesKroneckerForm) {
  const BeamCase c = beam_case(2);
  const auto blocks = combiner_blocks(c.combiner, 8, 8);
  const double psi = 0.37;
  const CVector aq = steering_vertical(psi, 8);
  CMatrix kron = CMatrix::Zero(64, 8);
  for (int q = 0; q < 8; ++q) kron.block(q * 8, 0, 8, 8) = aq(q) * CMatrix::Identity(8, 8);
  EXPECT_LT((projected_combiner(blocks, psi, 0.5) - c.combiner.adjoint() * kron).norm(), 1e-12);
}

TEST(Kernels, GrqTraceMatchesReferenceAndRankOne) {
  const BeamCase c = beam_case(3);
  const auto blocks = combiner_blocks(c.combiner, 8, 8);
  const auto grid = linspace(0.0, 0.999, 97);
  const RVector fast = grq_trace_scan(blocks, c.beam, grid, 0.5);
  const RVector ref = grq_trace_scan_reference(blocks, c.beam, grid, 0.5);
  for (Eigen::Index i = 0; i < fast.size(); ++i) EXPECT_NEAR(fast(i), ref(i), 1e-10 * std::max(1.0, ref(i)));

  for (double psi : {0.1, 0.5, 0.9}) {
    const GrqPair q = grq_matrices(blocks, c.beam, psi, 0.5);
    const CMatrix phi = hermitian_pinv(q.q2) * q.q1;
    Eigen::ComplexEigenSolver<CMatrix> eig(phi);
    const RVector mags = eig.eigenvalues().cwiseAbs();
    std::vector<double> sorted(mags.data(), mags.data() + mags.size());
    std::sort(sorted.rbegin(), sorted.rend());
    EXPECT_NEAR(phi.trace().real(), sorted[0], 1e-9 * sorted[0]);
    EXPECT_LT(sorted[1], 1e-9 * sorted[0]);
  }
}

TEST(Kernels, DopplerScanMatchesReference) {
  std::mt19937_64 rng(4);
  const CVector col = testing::random_vector(7, rng);
  const auto grid = linspace(-600.0, 600.0, 301);
  const RVector a = doppler_scan(col, grid, 35.677e-6), b = doppler_scan_reference(col, grid, 35.677e-6);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12 * b.maxCoeff());
}

TEST(Kernels, AoaObjectiveMatchesReference) {
  const BeamCase c = beam_case(5);
  const auto zg = linspace(0.0, 0.999, 41), xg = linspace(-0.999, 0.999, 43);
  const RVector a = aoa_objective_grid(c.beam, c.combiner, c.tx, 8, 8, 0.5, zg, xg);
  const RVector b = aoa_objective_grid_reference(c.beam, c.combiner, c.tx, 8, 8, 0.5, zg, xg);
  ASSERT_EQ(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    ASSERT_EQ(std::isnan(a(i)), std::isnan(b(i)));
    if (!std::isnan(b(i))) {
      EXPECT_NEAR(a(i), b(i), 1e-9 * std::max(1.0, b(i)));
    }
  }
}

TEST(Kernels, PositionLossesMatchReference) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 50.0);
  std::vector<RangeBearing> obs;
  for (int j = 0; j < 4; ++j)
    obs.push_back({Vec3(n(rng), n(rng), 30.0), Vec3(n(rng), n(rng), n(rng)).normalized(), 300.0 + n(rng)});
  std::vector<Vec3> pts;
  for (int i = 0; i < 500; ++i) pts.emplace_back(n(rng), n(rng), 100.0 + n(rng));
  const LossValues a = position_losses(pts, obs, 0.5), b = position_losses_reference(pts, obs, 0.5);
  EXPECT_LT((a.range_loss - b.range_loss).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((a.direction_loss - b.direction_loss).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kernels, ParetoMaskMatchesBruteForce) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coarse(0, 12);
  std::uniform_real_distribution<double> fine(0.0, 1.0);
  for (int round = 0; round < 40; ++round) {
    const int size = 1 + round * 7;
    RVector f1(size), f2(size);
    for (int i = 0; i < size; ++i) {
      // coarse values on even rounds so ties in either objective are common
      f1(i) = round % 2 ? fine(rng) : coarse(rng);
      f2(i) = round % 2 ? fine(rng) : coarse(rng);
    }
    const auto fast = pareto_mask(f1, f2);
    const auto ref = pareto_mask_reference(f1, f2);
    ASSERT_EQ(fast, ref);
    // independent oracle: strictly dominated by someone
    for (int i = 0; i < size; ++i) {
      bool dominated = false;
      for (int j = 0; j < size; ++j) dominated = dominated || (f1(j) < f1(i) && f2(j) < f2(i));
      EXPECT_EQ(fast[static_cast<std::size_t>(i)], !dominated);
    }
  }
}

}  // namespace
}  // namespace isac
