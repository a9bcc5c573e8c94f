#include "isac/channel.hpp"

#include <cmath>

#include "isac/error.hpp"

namespace isac {

namespace {

CVector phase_ramp(double step, int count) {
  CVector v(count);
  for (int i = 0; i < count; ++i) v(i) = phasor(step * i);
  return v;
}

}  // namespace

CVector steering_horizontal(double dir_cos_x, int count, double spacing_wavelengths) {
  return phase_ramp(2.0 * kPi * spacing_wavelengths * dir_cos_x, count);
}

CVector steering_vertical(double dir_cos_z, int count, double spacing_wavelengths) {
  return phase_ramp(2.0 * kPi * spacing_wavelengths * dir_cos_z, count);
}

CVector steering_upa(double dir_cos_x, double dir_cos_z, const ArrayConfig& array) {
  const CVector ah = steering_horizontal(dir_cos_x, array.horizontal, array.spacing_wavelengths);
  const CVector av = steering_vertical(dir_cos_z, array.vertical, array.spacing_wavelengths);
  CVector a(array.elements());
  for (int q = 0; q < array.vertical; ++q) a.segment(q * array.horizontal, array.horizontal) = av(q) * ah;
  return a;
}

CVector doppler_phasor(double doppler, int symbols, double symbol_period) {
  return phase_ramp(2.0 * kPi * symbol_period * doppler, symbols);
}

CVector delay_phasor(double delay, int subcarriers, double subcarrier_spacing) {
  return phase_ramp(-2.0 * kPi * subcarrier_spacing * delay, subcarriers);
}

CMatrix channel_matrix(const BsSite& bs, std::span<const PairTruth> pairs, int subcarrier, int symbol) {
  const int l = bs.array.elements();
  CMatrix h = CMatrix::Zero(l, l);
  for (const auto& p : pairs) {
    const CVector a = steering_upa(p.dir_cos_x, p.dir_cos_z, bs.array);
    const cd phase = phasor(-2.0 * kPi * subcarrier * bs.subcarrier_spacing * p.delay) *
                     phasor(2.0 * kPi * p.doppler * symbol * bs.symbol_period);
    h.noalias() += (p.alpha * phase) * (a * a.adjoint());
  }
  return h;
}

CVector beam_signature(const ArrayConfig& array, double dir_cos_x, double dir_cos_z, const CMatrix& combiner,
                       const CVector& tx_vector) {
  const CVector a = steering_upa(dir_cos_x, dir_cos_z, array);
  return (combiner.adjoint() * a) * a.dot(tx_vector);  // a.dot(f) = a^H f
}

double noise_variance(const BsSite& bs, double noise_psd_dbm_hz) {
  return dbm_to_watts(noise_psd_dbm_hz) * bs.subcarriers * bs.subcarrier_spacing;
}

Tensor3 combined_noise(const CMatrix& combiner, int symbols, int subcarriers, double noise_variance,
                       std::mt19937_64& rng) {
  const Eigen::Index r = combiner.cols();
  Tensor3 out({r, symbols, subcarriers});
  if (noise_variance <= 0.0) return out;

  // F^H n has covariance sigma^2 F^H F; colour white R-dim draws with its square root.
  const CMatrix cov = noise_variance * (combiner.adjoint() * combiner);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov);
  const RVector ev = eig.eigenvalues().cwiseMax(0.0);
  const CMatrix root = eig.eigenvectors() * ev.cwiseSqrt().asDiagonal();

  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CVector w(r);
  for (int m = 0; m < subcarriers; ++m) {
    for (int n = 0; n < symbols; ++n) {
      for (Eigen::Index i = 0; i < r; ++i) w(i) = cd{normal(rng), normal(rng)};
      const CVector s = root * w;
      for (Eigen::Index i = 0; i < r; ++i) out(i, n, m) = s(i);
    }
  }
  return out;
}

RxTensor synthesize_rx_tensor(const BsSite& bs, std::span<const PairTruth> pairs, const Beamformer& tx,
                              const Beamformer& rx, double noise_variance, std::mt19937_64& rng) {
  const int l = bs.array.elements();
  const int r = bs.array.rf_chains;
  if (tx.analog.rows() != l || rx.analog.rows() != l || tx.analog.cols() != r || rx.analog.cols() != r ||
      tx.digital.rows() != r || rx.digital.rows() != r || tx.digital.cols() != r || rx.digital.cols() != r)
    throw Error(ErrorCode::ShapeMismatch, "beamformer dimensions disagree with the BS array");

  const int nsym = bs.symbols;
  const int nsc = bs.subcarriers;
  const CMatrix combiner = rx.combined();
  const CVector f_tx = tx.equivalent();

  RxTensor out;
  out.noise_variance = noise_variance;
  out.data = combined_noise(combiner, nsym, nsc, noise_variance, rng);

  for (const auto& p : pairs) {
    const CVector b = p.alpha * beam_signature(bs.array, p.dir_cos_x, p.dir_cos_z, combiner, f_tx);
    const CVector o = doppler_phasor(p.doppler, nsym, bs.symbol_period);
    const CVector g = delay_phasor(p.delay, nsc, bs.subcarrier_spacing);
    for (int i = 0; i < r; ++i)
      for (int n = 0; n < nsym; ++n) {
        const cd bo = b(i) * o(n);
        for (int m = 0; m < nsc; ++m) out.data(i, n, m) += bo * g(m);
      }
  }
  return out;
}

CMatrix partially_connected(const CVector& weights, int rf_chains) {
  const Eigen::Index l = weights.size();
  if (rf_chains < 1 || l % rf_chains != 0) throw Error(ErrorCode::ShapeMismatch, "L must be divisible by R");
  const Eigen::Index per = l / rf_chains;
  CMatrix f = CMatrix::Zero(l, rf_chains);
  for (int c = 0; c < rf_chains; ++c) f.col(c).segment(c * per, per) = weights.segment(c * per, per);
  return f;
}

std::pair<Beamformer, Beamformer> design_alignment_beams(std::span<const BeamDirection> flagged, const BsSite& bs,
                                                         std::mt19937_64& rng) {
  const int r = bs.array.rf_chains;
  const int l = bs.array.elements();
  const int beams = static_cast<int>(flagged.size());
  if (beams < 1) throw Error(ErrorCode::NullInput, "no flagged beam to align with");
  if (beams > r) throw Error(ErrorCode::TooManyBeams, "more flagged beams than RF chains");

  const int per = l / r;
  const double tx_scale = std::sqrt(bs.tx_power / l);
  CVector tx_weights(l);
  for (int c = 0; c < r; ++c) {
    // chain c belongs to group c * N' / R; group sizes differ by at most one chain
    const auto& dir = flagged[static_cast<std::size_t>(c * beams / r)];
    const CVector a = steering_upa(std::sin(dir.elevation) * std::cos(dir.azimuth), std::cos(dir.elevation), bs.array);
    tx_weights.segment(c * per, per) = tx_scale * a.segment(c * per, per);
  }

  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  const double rx_scale = 1.0 / std::sqrt(static_cast<double>(per));
  CVector rx_weights(l);
  for (int i = 0; i < l; ++i) rx_weights(i) = std::polar(rx_scale, phase(rng));

  Beamformer tx{partially_connected(tx_weights, r), CMatrix::Identity(r, r)};
  Beamformer rx{partially_connected(rx_weights, r), CMatrix::Identity(r, r)};
  return {std::move(tx), std::move(rx)};
}

}  // namespace isac
