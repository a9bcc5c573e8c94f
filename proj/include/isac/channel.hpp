#pragma once

#include <random>
#include <span>
#include <utility>

#include "isac/geometry.hpp"
#include "isac/tensor_data.hpp"
#include "isac/types.hpp"

namespace isac {

/// Horizontal steering vector: element i is exp(j 2 pi i (d/lambda) dir_cos_x).
CVector steering_horizontal(double dir_cos_x, int count, double spacing_wavelengths = 0.5);
/// Vertical steering vector: element i is exp(j 2 pi i (d/lambda) dir_cos_z).
CVector steering_vertical(double dir_cos_z, int count, double spacing_wavelengths = 0.5);
/// UPA steering a_v(z) (x) a_h(x); antenna index is v * P + h.
CVector steering_upa(double dir_cos_x, double dir_cos_z, const ArrayConfig& array);

/// Doppler phasor over OFDM symbols: exp(j 2 pi Ts f n).
CVector doppler_phasor(double doppler, int symbols, double symbol_period);
/// Delay phasor over subcarriers: exp(-j 2 pi df tau m).
CVector delay_phasor(double delay, int subcarriers, double subcarrier_spacing);

/// Hybrid precoder or combiner: L x R analog stage followed by an R x R digital stage.
struct Beamformer {
  CMatrix analog;
  CMatrix digital;

  CMatrix combined() const { return analog * digital; }
  /// F e, the equivalent single-stream vector.
  CVector equivalent() const { return combined() * CVector::Ones(digital.cols()); }
};

/// H_{m,n} = sum_k alpha_k a_k a_k^H exp(-j2pi m df tau_k) exp(j2pi f_k n Ts).
CMatrix channel_matrix(const BsSite& bs, std::span<const PairTruth> pairs, int subcarrier, int symbol);

/// Beam-domain signature b = F_RX^H a a^H f_TX for one direction.
CVector beam_signature(const ArrayConfig& array, double dir_cos_x, double dir_cos_z, const CMatrix& combiner,
                       const CVector& tx_vector);

struct RxTensor {
  Tensor3 data;  // R x N x M
  double noise_variance = 0.0;
};

/// Per-sample noise variance N0 * M * df, with N0 given in dBm/Hz.
double noise_variance(const BsSite& bs, double noise_psd_dbm_hz);

/// Draws n ~ CN(0, noise_variance I_L) per (m, n) and returns F_RX^H n samples, R x N x M.
Tensor3 combined_noise(const CMatrix& combiner, int symbols, int subcarriers, double noise_variance,
                       std::mt19937_64& rng);

/// Matched-filtered echo tensor: sum_k alpha_k b_k o o(f_k) o g(tau_k) + F_RX^H n.
RxTensor synthesize_rx_tensor(const BsSite& bs, std::span<const PairTruth> pairs, const Beamformer& tx,
                              const Beamformer& rx, double noise_variance, std::mt19937_64& rng);

struct BeamDirection {
  double elevation = 0.0;
  double azimuth = 0.0;
};

/// Alignment beams: chain groups of the analog precoder steer toward the
/// flagged directions; the combiner gets random unit-circle phases.
/// Returns {precoder, combiner}.
std::pair<Beamformer, Beamformer> design_alignment_beams(std::span<const BeamDirection> flagged, const BsSite& bs,
                                                         std::mt19937_64& rng);

/// Partially-connected analog matrix whose non-zeros are taken from `weights`
/// (antenna order); chain r owns antennas [r L/R, (r+1) L/R).
CMatrix partially_connected(const CVector& weights, int rf_chains);

}  // namespace isac
