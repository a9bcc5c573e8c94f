#pragma once

#include <optional>
#include <vector>

#include "isac/channel.hpp"
#include "isac/cp_decomposition.hpp"
#include "isac/geometry.hpp"
#include "isac/types.hpp"

namespace isac {

/// Uniform grid of `points` values over [lo, hi].
struct SearchGrid1D {
  double lo = 0.0;
  double hi = 0.0;
  int points = 1;

  double step() const { return points > 1 ? (hi - lo) / (points - 1) : 0.0; }
  double value(int i) const { return lo + step() * i; }
  std::vector<double> values() const;
  void validate() const;
};

struct SearchGrids {
  SearchGrid1D doppler;  // Hz
  SearchGrid1D psi;      // cos(elevation)
  SearchGrid1D theta;    // sin(elevation) cos(azimuth)

  /// Doppler over +-1.5 * 2 v_max / lambda with 601 points; psi over
  /// [0, 0.999] and theta over [-0.999, 0.999] with 512 points each.
  static SearchGrids defaults(const BsSite& bs, double max_speed);
};

struct TargetEstimate {
  double delay = 0.0;
  double range = 0.0;
  double doppler = 0.0;
  double radial_velocity = 0.0;
  double psi = 0.0;
  double theta_virtual = 0.0;
  double elevation = 0.0;
  double azimuth = 0.0;
  cd alpha{0.0, 0.0};
  cd lambda1{0.0, 0.0};
  cd lambda2{0.0, 0.0};
  cd lambda3{0.0, 0.0};
  int doppler_index = 0;
  int psi_index = 0;
  int theta_index = 0;
  bool grid_exhausted = false;
};

struct EstimateSet {
  int bs_id = 0;
  std::vector<TargetEstimate> targets;
};

struct DelayRange {
  double delay = 0.0;
  double range = 0.0;
};

/// tau = angle(z) / (-2 pi df) with the angle taken in (-2 pi, 0].
DelayRange delay_range(cd generator, double subcarrier_spacing);

struct DopplerEstimate {
  double doppler = 0.0;
  double radial_velocity = 0.0;
  int index = 0;
};

/// Correlation peak of the Doppler column over the grid.
DopplerEstimate doppler_velocity(const CVector& column, const SearchGrid1D& grid, double symbol_period,
                                 double wavelength);

struct AoaEstimate {
  double psi = 0.0;
  double theta_virtual = 0.0;
  double elevation = 0.0;
  double azimuth = 0.0;
  int psi_index = 0;
  int theta_index = 0;
  bool grid_exhausted = false;
};

/// (elevation, azimuth) from virtual angles; throws DegenerateElevation when
/// sin(elevation) < 1e-6.
std::pair<double, double> angles_from_virtual(double psi, double theta_virtual);

/// Reduced-dimension AoA: psi by the generalized Rayleigh quotient trace,
/// then theta by matching the principal eigenvector to a_p(theta).
AoaEstimate aoa_grq(const CVector& beam, const CMatrix& combiner, const ArrayConfig& array,
                    const SearchGrids& grids);

/// Exhaustive 2-D search of |b^H b(theta, psi)|^2 / ||b(theta, psi)||^2.
/// Throws NullInput for an all-zero beam vector.
AoaEstimate aoa_2d_oracle(const CVector& beam, const CMatrix& combiner, const CVector& tx,
                          const ArrayConfig& array, const SearchGrids& grids);

struct ScaleResolution {
  cd lambda1;
  cd lambda2;
  cd lambda3;
  cd alpha;
};

/// lambda1 = b(est)^+ b_hat, lambda2 = o(est)^+ o_hat, lambda3 = 1 / (lambda1 lambda2),
/// alpha = (lambda3 g(est))^+ g_hat. Throws SingularScale.
ScaleResolution resolve_scaling_and_alpha(const CVector& beam_hat, const CVector& doppler_hat,
                                          const CVector& delay_hat, const CVector& beam_model,
                                          const CVector& doppler_model, const CVector& delay_model);

inline constexpr double kSingularScale = 1e-12;

/// Per-target parameter extraction from recovered beam and Doppler columns
/// and delay generators.
std::vector<TargetEstimate> estimate_from_factors(const BsSite& bs, const CMatrix& beams, const CMatrix& dopplers,
                                                  const CVector& generators, const CMatrix& combiner,
                                                  const CVector& tx, const SearchGrids& grids);

/// Unfold, smooth, decompose and extract parameters from one echo tensor.
EstimateSet estimate_parameters(int bs_id, const BsSite& bs, const Tensor3& y, const Beamformer& tx,
                                const Beamformer& rx, int targets, const SearchGrids& grids,
                                std::optional<SmoothingPlan> plan = std::nullopt);

}  // namespace isac
