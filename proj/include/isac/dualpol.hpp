#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "isac/channel.hpp"
#include "isac/cp_decomposition.hpp"
#include "isac/estimation.hpp"
#include "isac/tensor_data.hpp"

namespace isac {

/// Per-target polarization coupling; gamma(d, e) = sqrt(r) exp(j phase) for
/// receive polarization d and transmit polarization e (0 = V, 1 = H).
struct PolarizationFactors {
  Eigen::Matrix2cd gamma = Eigen::Matrix2cd::Identity();
  double xpd_db = 0.0;

  /// eta = [gamma_VV + gamma_VH, gamma_HV + gamma_HH].
  Eigen::Vector2cd eta() const { return gamma.rowwise().sum(); }
};

struct XpdModel {
  double mean_db = 8.0;
  double std_db = 4.0;
};

/// Log-normal XPD per target, four independent uniform phases.
PolarizationFactors draw_polarization(const XpdModel& model, std::mt19937_64& rng);

struct RxTensor4 {
  Tensor4 data;  // R x 2 x M x N
  double noise_variance = 0.0;
};

/// Z = sum_k alpha_k b_k o eta_k o g(tau_k) o o(f_k) + noise; both branches share
/// the beamformers and get independent F_RX^H n noise.
RxTensor4 synthesize_dualpol(const BsSite& bs, std::span<const PairTruth> pairs,
                             std::span<const PolarizationFactors> pol, const Beamformer& tx, const Beamformer& rx,
                             double noise_variance, std::mt19937_64& rng);

/// (2 N M) x R unfolding with row m * 2N + n * 2 + pol.
CMatrix unfold_dualpol(const Tensor4& z);

/// Polarization slice as a single-pol R x N x M tensor.
Tensor3 polarization_slice(const Tensor4& z, int pol);

/// E_k[p, n] = e_k[n * 2 + p].
Eigen::Matrix<cd, 2, Eigen::Dynamic> unvec_combined(const CVector& e);

struct DualPolFactors {
  FactorMatrices base;  // a2 is the combined 2N x K factor
  CMatrix doppler;      // N x K, o_k = conj(v_1)
  CMatrix polarization; // 2 x K, eta_k = sigma_1 u_1
  RVector rank1_ratio;  // sigma_2 / sigma_1 of each E_k
};

inline constexpr double kRank1MismatchRatio = 0.1;

DualPolFactors decompose_dualpol(const Tensor4& z, int targets, const SmoothingPlan& plan);

EstimateSet estimate_dualpol(int bs_id, const BsSite& bs, const Tensor4& z, const Beamformer& tx,
                             const Beamformer& rx, int targets, const SearchGrids& grids,
                             std::optional<SmoothingPlan> plan = std::nullopt);

}  // namespace isac
