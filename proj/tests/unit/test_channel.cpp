#include <gtest/gtest.h>

#include <random>

#include <Eigen/SVD>

#include "isac/channel.hpp"
#include "isac/cp_decomposition.hpp"
#include "isac/error.hpp"
#include "test_support.hpp"

namespace isac {
namespace {

using testing::desk_site;

TEST(Steering, BroadsideIsAllOnes) {
  EXPECT_TRUE(steering_horizontal(0.0, 8).isApprox(CVector::Ones(8)));
}

TEST(Steering, HalfWavelengthEndfire) {
  const CVector a = steering_horizontal(1.0, 2);
  EXPECT_NEAR(std::abs(a(0) - cd(1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a(1) - cd(-1, 0)), 0.0, 1e-15);
}

TEST(Steering, UpaIsKroneckerWithUnitEntries) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  const ArrayConfig array{8, 4, 8, 0.5};
  for (int i = 0; i < 20; ++i) {
    const double x = u(rng), z = u(rng);
    const CVector a = steering_upa(x, z, array);
    const CVector ah = steering_horizontal(x, 8), av = steering_vertical(z, 4);
    EXPECT_EQ(a(0), cd(1.0, 0.0));
    EXPECT_NEAR(a.squaredNorm(), 32.0, 1e-12);
    for (int q = 0; q < 4; ++q)
      for (int p = 0; p < 8; ++p) EXPECT_LT(std::abs(a(q * 8 + p) - av(q) * ah(p)), 1e-14);
  }
}

TEST(ChannelMatrix, EmptySceneIsZero) {
  const BsSite bs = desk_site();
  EXPECT_EQ(channel_matrix(bs, {}, 3, 2).norm(), 0.0);
}

TEST(ChannelMatrix, SingleTargetAtOrigin) {
  const BsSite bs = desk_site();
  const PairTruth p = make_pair_truth(bs, 0.8, 1.1, 250.0, 12.0, cd{0.3, -0.4});
  const CVector a = steering_upa(p.dir_cos_x, p.dir_cos_z, bs.array);
  const std::vector<PairTruth> pairs{p};
  EXPECT_LT((channel_matrix(bs, pairs, 0, 0) - p.alpha * a * a.adjoint()).norm(), 1e-12);
}

TEST(ChannelMatrix, SymbolStepIsDopplerPhasor) {
  const BsSite bs = desk_site();
  const PairTruth p = make_pair_truth(bs, 0.8, 1.1, 250.0, 12.0);
  const std::vector<PairTruth> pairs{p};
  const CMatrix h0 = channel_matrix(bs, pairs, 5, 2), h1 = channel_matrix(bs, pairs, 5, 3);
  const cd expected = std::polar(1.0, 2.0 * kPi * p.doppler * bs.symbol_period);
  for (Eigen::Index i = 0; i < h0.size(); i += 97) EXPECT_LT(std::abs(h1(i) / h0(i) - expected), 1e-12);
}

struct ChannelCase {
  BsSite bs = desk_site();
  std::vector<PairTruth> pairs;
  Beamformer tx, rx;
};

ChannelCase aligned_setup(int targets, std::uint64_t seed) {
  ChannelCase s;
  std::mt19937_64 rng(seed);
  s.pairs = testing::random_targets(s.bs, targets, rng);
  const auto dirs = testing::directions_of(s.pairs);
  std::tie(s.tx, s.rx) = design_alignment_beams(dirs, s.bs, rng);
  return s;
}

TEST(Synthesis, NoiselessSingleTargetIsRankOne) {
  const ChannelCase s = aligned_setup(1, 2);
  std::mt19937_64 rng(0);
  const RxTensor y = synthesize_rx_tensor(s.bs, s.pairs, s.tx, s.rx, 0.0, rng);
  const Eigen::BDCSVD<CMatrix> svd(unfold_mode1(y.data));
  EXPECT_LT(svd.singularValues()(1) / svd.singularValues()(0), 1e-10);
}

TEST(Synthesis, MatchesCpModelFromFactors) {
  const ChannelCase s = aligned_setup(3, 4);
  std::mt19937_64 rng(0);
  const RxTensor y = synthesize_rx_tensor(s.bs, s.pairs, s.tx, s.rx, 0.0, rng);
  const CMatrix f = s.rx.combined();
  const CVector ftx = s.tx.equivalent();
  Tensor3 ref({s.bs.array.rf_chains, s.bs.symbols, s.bs.subcarriers});
  for (const auto& p : s.pairs) {
    // independent construction from H_{m,n}: y = F^H H f
    for (int m = 0; m < s.bs.subcarriers; m += 9)
      for (int n = 0; n < s.bs.symbols; ++n) {
        const std::vector<PairTruth> one{p};
        const CVector v = f.adjoint() * channel_matrix(s.bs, one, m, n) * ftx;
        for (int r = 0; r < s.bs.array.rf_chains; ++r) ref(r, n, m) += v(r);
      }
  }
  double err = 0.0, norm = 0.0;
  for (int m = 0; m < s.bs.subcarriers; m += 9)
    for (int n = 0; n < s.bs.symbols; ++n)
      for (int r = 0; r < s.bs.array.rf_chains; ++r) {
        err += std::norm(y.data(r, n, m) - ref(r, n, m));
        norm += std::norm(ref(r, n, m));
      }
  EXPECT_LT(std::sqrt(err / norm), 1e-10);
}

TEST(Synthesis, RejectsMismatchedBeamformers) {
  ChannelCase s = aligned_setup(1, 6);
  s.rx.analog = CMatrix::Zero(10, 16);
  std::mt19937_64 rng(0);
  try {
    synthesize_rx_tensor(s.bs, s.pairs, s.tx, s.rx, 0.0, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Synthesis, NoiseVarianceMatchesCombinerCovariance) {
  const ChannelCase s = aligned_setup(1, 8);
  const CMatrix f = s.rx.combined();
  const RVector expected = (f.adjoint() * f).diagonal().real() * 2.5;
  std::mt19937_64 rng(99);
  // 10^5 samples per entry of the diagonal
  RVector acc = RVector::Zero(f.cols());
  int samples = 0;
  while (samples < 100000) {
    const Tensor3 n = combined_noise(f, s.bs.symbols, s.bs.subcarriers, 2.5, rng);
    for (int m = 0; m < s.bs.subcarriers; ++m)
      for (int k = 0; k < s.bs.symbols; ++k) {
        for (Eigen::Index r = 0; r < f.cols(); ++r) acc(r) += std::norm(n(r, k, m));
        ++samples;
      }
  }
  for (Eigen::Index r = 0; r < f.cols(); ++r) EXPECT_NEAR(acc(r) / samples / expected(r), 1.0, 0.05);
}

TEST(NoiseVariance, ThermalFloorTimesBandwidth) {
  const BsSite bs = desk_site();
  EXPECT_NEAR(noise_variance(bs, -174.0) / (std::pow(10.0, -20.4) * 64 * 30e3), 1.0, 1e-12);
}

TEST(Alignment, SingleBeamSteersWholeArray) {
  const BsSite bs = desk_site();
  std::mt19937_64 rng(10);
  const BeamDirection dir{0.9, 1.3};
  const std::vector<BeamDirection> flagged{dir};
  const auto [tx, rx] = design_alignment_beams(flagged, bs, rng);
  const CVector a = steering_upa(std::sin(dir.elevation) * std::cos(dir.azimuth), std::cos(dir.elevation), bs.array);
  const CVector f = tx.equivalent();
  EXPECT_LT((f - std::sqrt(bs.tx_power / 64.0) * a).norm(), 1e-9);
  EXPECT_NEAR(f.squaredNorm(), bs.tx_power, 1e-9);
  EXPECT_TRUE(tx.digital.isIdentity());
}

TEST(Alignment, ConstantModulusAndPartialConnection) {
  const BsSite bs = desk_site();
  std::mt19937_64 rng(12);
  const std::vector<BeamDirection> flagged{{0.4, 0.7}, {1.0, 2.0}, {0.8, 1.5}};
  const auto [tx, rx] = design_alignment_beams(flagged, bs, rng);
  for (const CMatrix* m : {&tx.analog, &rx.analog}) {
    double modulus = -1.0;
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      int nonzero = 0;
      for (Eigen::Index c = 0; c < m->cols(); ++c) {
        const double v = std::abs((*m)(i, c));
        if (v == 0.0) continue;
        ++nonzero;
        if (modulus < 0.0) modulus = v;
        EXPECT_NEAR(v, modulus, 1e-12);
        EXPECT_EQ(c, i / bs.array.antennas_per_chain());
      }
      EXPECT_EQ(nonzero, 1);
    }
  }
  // combiner entries have unit modulus once the 1/sqrt(L/R) scale is removed
  const double scale = std::sqrt(static_cast<double>(bs.array.antennas_per_chain()));
  for (Eigen::Index i = 0; i < rx.analog.rows(); ++i)
    EXPECT_NEAR(std::abs(rx.analog.row(i).sum()) * scale, 1.0, 1e-12);
}

TEST(Alignment, TooManyBeams) {
  const BsSite bs = desk_site();
  std::mt19937_64 rng(0);
  std::vector<BeamDirection> flagged(17, BeamDirection{0.5, 1.0});
  try {
    design_alignment_beams(flagged, bs, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManyBeams);
  }
  EXPECT_THROW(design_alignment_beams({}, bs, rng), Error);
}

TEST(Alignment, ArrayGainOverIsotropicTransmit) {
  BsSite bs = desk_site();
  bs.array = {16, 16, 16, 0.5};
  std::mt19937_64 rng(14);
  const PairTruth p = make_pair_truth(bs, 0.9, 1.2, 300.0, 0.0);
  const std::vector<PairTruth> pairs{p};
  const std::vector<BeamDirection> dirs{{p.elevation, p.azimuth}};
  const auto [tx, rx] = design_alignment_beams(dirs, bs, rng);
  std::mt19937_64 noise_rng(0);
  const double aligned = synthesize_rx_tensor(bs, pairs, tx, rx, 0.0, noise_rng).data.frobenius_norm();

  // isotropic reference: same power on random element phases, averaged over draws
  std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
  const int l = bs.array.elements();
  double iso = 0.0;
  const int draws = 200;
  for (int d = 0; d < draws; ++d) {
    CVector w(l);
    for (int i = 0; i < l; ++i) w(i) = std::polar(std::sqrt(bs.tx_power / l), ph(rng));
    const Beamformer iso_tx{partially_connected(w, bs.array.rf_chains), CMatrix::Identity(16, 16)};
    const double e = synthesize_rx_tensor(bs, pairs, iso_tx, rx, 0.0, noise_rng).data.frobenius_norm();
    iso += e * e;
  }
  const double gain_db = 10.0 * std::log10(aligned * aligned / (iso / draws));
  EXPECT_GE(gain_db, 10.0 * std::log10(l / 4.0));
}

}  // namespace
}  // namespace isac
