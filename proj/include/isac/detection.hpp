#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "isac/channel.hpp"
#include "isac/geometry.hpp"
#include "isac/types.hpp"

namespace isac {

/// Beam-scan grid: elevation theta_i = theta0 + i dtheta (i < vertical_beams),
/// azimuth phi_j = phi0 + j dphi (j < horizontal_beams).
struct ScanGrid {
  double theta0 = 0.0;
  double phi0 = 0.0;
  double dtheta = 0.0;
  double dphi = 0.0;
  int horizontal_beams = 1;
  int vertical_beams = 1;

  int beams() const { return horizontal_beams * vertical_beams; }
  BeamDirection direction(int beam) const;
  /// Nearest grid beam to an arbitrary direction.
  int nearest(double elevation, double azimuth) const;
  void validate() const;

  /// Covers elevation (0, pi/2] and azimuth [0, pi] with the given step in radians.
  static ScanGrid covering(double step);
};

struct DetectionMap {
  std::vector<int> flags;   // one per beam
  std::vector<int> counts;  // per-beam target count, meaningful where flagged
  ScanGrid grid;

  int total() const;
  std::vector<BeamDirection> flagged_directions() const;
  std::string to_json() const;
};

/// Chi-square (Gamma(MN, 1)) threshold on sum |y|^2 / sigma^2 for a given
/// false-alarm probability.
double energy_threshold(std::size_t samples, double pfa);

/// Energy detector; returns true iff the normalized energy exceeds the threshold.
bool detect_beam(std::span<const cd> samples, double noise_variance, double pfa);

/// Scalar scan samples y = f_RX^H H f_TX + f_RX^H n over all (m, n), with
/// f_TX = sqrt(P_T / L) a and unit-norm f_RX = a / sqrt(L).
std::vector<cd> scan_beam_samples(const BsSite& bs, std::span<const PairTruth> pairs, const BeamDirection& beam,
                                  double noise_variance, std::mt19937_64& rng);

/// MDL(k) for k = 1..R-1 from descending eigenvalues and a sample count.
std::vector<double> mdl_scores(const RVector& eigenvalues_desc, std::size_t samples);

/// Model-order estimate from the R x R sample covariance of the echo tensor.
/// Throws RankDeficient when the covariance is not finite.
int estimate_count_mdl(const Tensor3& y);

struct DetectionConfig {
  double pfa = 1e-3;
  double scan_step = 10.0 * kPi / 180.0;
};

/// Full scan: energy detection per beam, then alignment toward each flagged
/// beam alone and MDL counting on the aligned tensor.
DetectionMap run_detection(const BsSite& bs, std::span<const PairTruth> pairs, const DetectionConfig& config,
                           double noise_variance, std::mt19937_64& rng);

}  // namespace isac
