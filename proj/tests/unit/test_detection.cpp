#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "isac/channel.hpp"
#include "isac/detection.hpp"
#include "isac/error.hpp"
#include "test_support.hpp"

namespace isac {
namespace {

using testing::desk_site;

TEST(EnergyDetector, ZeroSamplesNeverFlag) {
  const std::vector<cd> zeros(448, cd{0.0, 0.0});
  EXPECT_FALSE(detect_beam(zeros, 1.0, 1e-3));
}

TEST(EnergyDetector, ThresholdMonotoneInPfa) {
  double last = 0.0;
  for (double pfa : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
    const double t = energy_threshold(448, pfa);
    EXPECT_GT(t, last);
    last = t;
  }
  EXPECT_THROW(energy_threshold(448, 0.0), Error);
}

TEST(EnergyDetector, FalseAlarmRateIsCalibrated) {
  std::mt19937_64 rng(2024);
  const double sigma2 = 3.0;
  std::normal_distribution<double> n(0.0, std::sqrt(sigma2 / 2.0));
  std::vector<cd> samples(448);
  int alarms = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    for (auto& s : samples) s = cd{n(rng), n(rng)};
    alarms += detect_beam(samples, sigma2, 1e-3) ? 1 : 0;
  }
  const double rate = static_cast<double>(alarms) / trials;
  EXPECT_GE(rate, 0.5e-3);
  EXPECT_LE(rate, 2e-3);
}

TEST(EnergyDetector, AlignedTargetAtDefaultPowerFlags) {
  const BsSite bs = desk_site();
  const PairTruth p = make_pair_truth(bs, 0.8, 1.2, 350.0, 5.0);
  std::mt19937_64 rng(3);
  PairTruth q = p;
  q.alpha = channel_coefficient(bs, p, 0.01, rng);
  const std::vector<PairTruth> pairs{q};
  const double nv = noise_variance(bs, -174.0);
  const auto clean = scan_beam_samples(bs, pairs, {p.elevation, p.azimuth}, 0.0, rng);
  EXPECT_TRUE(detect_beam(clean, nv, 1e-3));
}

TEST(Mdl, PenaltyStrictlyIncreasingAndFlatSpectrumGivesOne) {
  const RVector flat = RVector::Constant(8, 2.0);
  const auto scores = mdl_scores(flat, 4284);
  ASSERT_EQ(scores.size(), 7u);
  for (std::size_t k = 1; k < scores.size(); ++k) EXPECT_GT(scores[k], scores[k - 1]);
  EXPECT_EQ(std::min_element(scores.begin(), scores.end()) - scores.begin(), 0);
}

TEST(Mdl, TwoStrongSourcesAboveNoiseFloor) {
  std::mt19937_64 rng(4);
  const int r = 8, n = 7, m = 612;  // 4284 snapshots
  const CMatrix mixing = testing::random_matrix(r, 2, rng).householderQr().householderQ() * CMatrix::Identity(r, 2);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  Tensor3 y({r, n, m});
  const double amp = std::sqrt(1000.0);  // 30 dB over unit noise
  for (int s = 0; s < n; ++s)
    for (int k = 0; k < m; ++k) {
      const Eigen::Vector2cd src(cd{g(rng), g(rng)}, cd{g(rng), g(rng)});
      const CVector x = amp * mixing * src;
      for (int i = 0; i < r; ++i) y(i, s, k) = x(i) + cd{g(rng), g(rng)};
    }
  EXPECT_EQ(estimate_count_mdl(y), 2);
}

TEST(Mdl, NonFiniteCovarianceThrows) {
  Tensor3 y({4, 2, 3});
  y(0, 0, 0) = cd{std::numeric_limits<double>::infinity(), 0.0};
  try {
    estimate_count_mdl(y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
}

TEST(Mdl, SingleTargetAtDefaultSnr) {
  const BsSite bs = desk_site();
  const double nv = noise_variance(bs, -174.0);
  std::mt19937_64 rng(5);
  int correct = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    auto pairs = testing::random_targets(bs, 1, rng);
    pairs[0].range = 150.0 + 100.0 * (t % 3);
    pairs[0] = make_pair_truth(bs, pairs[0].elevation, pairs[0].azimuth, pairs[0].range, pairs[0].radial_velocity);
    pairs[0].alpha = channel_coefficient(bs, pairs[0], 0.01, rng);
    const auto [tx, rx] = design_alignment_beams(testing::directions_of(pairs), bs, rng);
    correct += estimate_count_mdl(synthesize_rx_tensor(bs, pairs, tx, rx, nv, rng).data) == 1 ? 1 : 0;
  }
  EXPECT_GE(correct, 95);
}

TEST(ScanGrid, CoveringAndNearest) {
  const double step = 10.0 * kPi / 180.0;
  const ScanGrid g = ScanGrid::covering(step);
  EXPECT_EQ(g.vertical_beams, 9);
  EXPECT_EQ(g.horizontal_beams, 18);
  for (int b = 0; b < g.beams(); ++b) {
    const BeamDirection d = g.direction(b);
    EXPECT_EQ(g.nearest(d.elevation, d.azimuth), b);
    EXPECT_EQ(g.nearest(d.elevation + 0.4 * step, d.azimuth - 0.4 * step), b);
  }
  ScanGrid bad;
  bad.horizontal_beams = 0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Detection, FlagsTargetBeamAndCountsIt) {
  const BsSite bs = desk_site();
  std::mt19937_64 rng(6);
  DetectionConfig config;
  const ScanGrid grid = ScanGrid::covering(config.scan_step);
  // target on a beam center
  const BeamDirection center = grid.direction(grid.nearest(0.9, 1.4));
  PairTruth p = make_pair_truth(bs, center.elevation, center.azimuth, 200.0, 8.0);
  p.alpha = channel_coefficient(bs, p, 0.01, rng);
  const std::vector<PairTruth> pairs{p};
  const DetectionMap map = run_detection(bs, pairs, config, noise_variance(bs, -174.0), rng);
  const int beam = grid.nearest(center.elevation, center.azimuth);
  EXPECT_EQ(map.flags[static_cast<std::size_t>(beam)], 1);
  EXPECT_EQ(map.counts[static_cast<std::size_t>(beam)], 1);
  for (std::size_t b = 0; b < map.flags.size(); ++b) {
    if (map.flags[b]) {
      EXPECT_GE(map.counts[b], 1);
    }
  }

  const auto j = nlohmann::json::parse(map.to_json());
  EXPECT_EQ(j.at("total").get<int>(), map.total());
  EXPECT_EQ(j.at("flagged").size(), map.flagged_directions().size());
}

}  // namespace
}  // namespace isac
