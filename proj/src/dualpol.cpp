#include "isac/dualpol.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "isac/error.hpp"

namespace isac {

PolarizationFactors draw_polarization(const XpdModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> xpd(model.mean_db, model.std_db);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  PolarizationFactors f;
  f.xpd_db = xpd(rng);
  const double cross = std::sqrt(1.0 / db_to_linear(f.xpd_db));
  for (int d = 0; d < 2; ++d)
    for (int e = 0; e < 2; ++e) f.gamma(d, e) = std::polar(d == e ? 1.0 : cross, phase(rng));
  return f;
}

RxTensor4 synthesize_dualpol(const BsSite& bs, std::span<const PairTruth> pairs,
                             std::span<const PolarizationFactors> pol, const Beamformer& tx, const Beamformer& rx,
                             double noise_variance, std::mt19937_64& rng) {
  if (pol.size() != pairs.size()) throw Error(ErrorCode::ShapeMismatch, "one polarization record per target");
  const int r = bs.array.rf_chains, nsym = bs.symbols, nsc = bs.subcarriers;
  if (tx.analog.rows() != bs.array.elements() || rx.analog.rows() != bs.array.elements() ||
      tx.combined().cols() != r || rx.combined().cols() != r)
    throw Error(ErrorCode::ShapeMismatch, "beamformer dimensions disagree with the BS array");

  const CMatrix combiner = rx.combined();
  const CVector f_tx = tx.equivalent();
  RxTensor4 out;
  out.noise_variance = noise_variance;
  out.data = Tensor4({r, 2, nsc, nsym});
  for (int p = 0; p < 2; ++p) {
    const Tensor3 n = combined_noise(combiner, nsym, nsc, noise_variance, rng);
    for (int i = 0; i < r; ++i)
      for (int m = 0; m < nsc; ++m)
        for (int s = 0; s < nsym; ++s) out.data(i, p, m, s) = n(i, s, m);
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& pr = pairs[k];
    const CVector b = pr.alpha * beam_signature(bs.array, pr.dir_cos_x, pr.dir_cos_z, combiner, f_tx);
    const Eigen::Vector2cd eta = pol[k].eta();
    const CVector o = doppler_phasor(pr.doppler, nsym, bs.symbol_period);
    const CVector g = delay_phasor(pr.delay, nsc, bs.subcarrier_spacing);
    for (int i = 0; i < r; ++i)
      for (int p = 0; p < 2; ++p)
        for (int m = 0; m < nsc; ++m) {
          const cd c = b(i) * eta(p) * g(m);
          for (int s = 0; s < nsym; ++s) out.data(i, p, m, s) += c * o(s);
        }
  }
  return out;
}

CMatrix unfold_dualpol(const Tensor4& z) {
  const Eigen::Index r = z.dim(0), m = z.dim(2), n = z.dim(3);
  if (z.dim(1) != 2) throw Error(ErrorCode::ShapeMismatch, "polarization axis must have length 2");
  CMatrix out(m * 2 * n, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index p = 0; p < 2; ++p)
      for (Eigen::Index k = 0; k < m; ++k)
        for (Eigen::Index s = 0; s < n; ++s) out(k * 2 * n + s * 2 + p, i) = z(i, p, k, s);
  return out;
}

Tensor3 polarization_slice(const Tensor4& z, int pol) {
  const Eigen::Index r = z.dim(0), m = z.dim(2), n = z.dim(3);
  Tensor3 out({r, n, m});
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < m; ++k)
      for (Eigen::Index s = 0; s < n; ++s) out(i, s, k) = z(i, pol, k, s);
  return out;
}

Eigen::Matrix<cd, 2, Eigen::Dynamic> unvec_combined(const CVector& e) {
  if (e.size() % 2 != 0) throw Error(ErrorCode::ShapeMismatch, "combined factor length must be even");
  return Eigen::Map<const Eigen::Matrix<cd, 2, Eigen::Dynamic>>(e.data(), 2, e.size() / 2);
}

DualPolFactors decompose_dualpol(const Tensor4& z, int targets, const SmoothingPlan& plan) {
  const int n2 = static_cast<int>(2 * z.dim(3));
  DualPolFactors out;
  out.base = decompose(smooth(unfold_dualpol(z), n2, plan), targets, plan);
  out.doppler.resize(z.dim(3), targets);
  out.polarization.resize(2, targets);
  out.rank1_ratio.resize(targets);
  for (int k = 0; k < targets; ++k) {
    const CMatrix ek = unvec_combined(out.base.a2.col(k));
    Eigen::JacobiSVD<CMatrix> svd(ek, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = svd.singularValues();
    out.rank1_ratio(k) = s(0) > 0.0 ? s(1) / s(0) : 1.0;
    out.polarization.col(k) = s(0) * svd.matrixU().col(0);
    out.doppler.col(k) = svd.matrixV().col(0).conjugate();
  }
  return out;
}

EstimateSet estimate_dualpol(int bs_id, const BsSite& bs, const Tensor4& z, const Beamformer& tx,
                             const Beamformer& rx, int targets, const SearchGrids& grids,
                             std::optional<SmoothingPlan> plan) {
  if (z.dim(0) != bs.array.rf_chains || z.dim(1) != 2 || z.dim(2) != bs.subcarriers || z.dim(3) != bs.symbols)
    throw Error(ErrorCode::ShapeMismatch, "dual-pol tensor shape disagrees with the BS");
  const SmoothingPlan p = plan.value_or(SmoothingPlan::balanced(bs.subcarriers));
  const DualPolFactors f = decompose_dualpol(z, targets, p);
  EstimateSet out;
  out.bs_id = bs_id;
  out.targets = estimate_from_factors(bs, f.base.a1, f.doppler, f.base.generators, rx.combined(), tx.equivalent(),
                                      grids);
  return out;
}

}  // namespace isac
