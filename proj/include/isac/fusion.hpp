#pragma once

#include <optional>
#include <span>
#include <vector>

#include "isac/estimation.hpp"
#include "isac/geometry.hpp"
#include "isac/kernels.hpp"
#include "isac/types.hpp"

namespace isac {

/// p = d * T(phi_B) [sin(el) cos(az), sin(el) sin(az), cos(el)] + p_B.
Vec3 back_project(const BsSite& bs, double elevation, double azimuth, double range);

struct AssociationResult {
  std::vector<std::vector<int>> groups;  // vertex indices per group
  std::vector<int> removed;              // vertices dropped as isolated false detections
};

/// Graph over per-station positions with edges only between different stations.
/// Drops vertices whose shortest edge exceeds `threshold`, builds the minimum
/// spanning forest (Kruskal) and cuts the longest edges until `expected_groups`
/// components remain. Without `expected_groups` the count is the number of
/// threshold-graph components of size >= 2. Throws EmptyGraph.
AssociationResult associate(std::span<const Vec3> positions, std::span<const int> station, double threshold,
                            std::optional<int> expected_groups = std::nullopt);

enum class SelectionRule { RangeDominant, DirectionDominant };

struct FusionConfig {
  double threshold = 20.0;  // association gate, m
  double beta1 = 0.5;
  double beta2 = 0.5;
  int lattice_points = 11;        // per axis, odd
  double lattice_half_width = 15.0;  // m
  SelectionRule rule = SelectionRule::RangeDominant;
  /// Pareto points whose primary loss is within this of the minimum count as
  /// tied and are ranked by the secondary loss; 0 keeps the strict rule.
  double tie_tolerance = 0.0;

  void validate() const;
};

Vec3 mean_fusion(std::span<const Vec3> positions);

/// n^3 lattice points on a cube of the given half-width around `center`.
std::vector<Vec3> build_lattice(const Vec3& center, int points_per_axis, double half_width);

struct PositionFusion {
  Vec3 position = Vec3::Zero();
  Vec3 seed = Vec3::Zero();
  double range_loss = 0.0;
  double direction_loss = 0.0;
  std::size_t pareto_size = 0;
};

/// Mean-fusion seed, lattice objectives, strict-dominance Pareto filter and
/// selection by the configured rule. One member returns its own back-projection.
PositionFusion fuse_position(std::span<const kernels::RangeBearing> members, const FusionConfig& config);

/// Station-to-point geometry that replaces a member's angle and range estimates.
struct Calibrated {
  Vec3 direction = Vec3::UnitZ();  // global unit vector
  double elevation = 0.0;
  double azimuth = 0.0;
  double range = 0.0;
};
Calibrated calibrate(const BsSite& bs, const Vec3& position);

/// One member's radial-velocity observation in the global frame.
struct RadialObservation {
  Vec3 direction = Vec3::UnitZ();
  double range = 0.0;
  double radial_velocity = 0.0;
};

/// Weighted least squares with weights 1 / range^beta2. Throws
/// RankDeficientGeometry for < 3 members or cond(Omega^T W Omega) > 1e10.
Vec3 fuse_velocity_wls(std::span<const RadialObservation> obs, double beta2);

struct ResidualFusion {
  Vec3 velocity = Vec3::Zero();
  std::vector<unsigned> subsets;     // member bitmasks that produced an estimate
  std::vector<double> residuals;     // Res(X_i), same order
};

/// WLS over every subset of >= 3 members, combined with inverse-residual weights.
ResidualFusion fuse_velocity_residual(std::span<const RadialObservation> obs, double beta2);

struct MemberRef {
  int bs_id = 0;
  int target = 0;
};

struct FusedTrack {
  std::vector<MemberRef> members;
  Vec3 position = Vec3::Zero();
  Vec3 mean_position = Vec3::Zero();
  double range_loss = 0.0;
  double direction_loss = 0.0;
  std::size_t pareto_size = 0;
  std::optional<Vec3> velocity;      // residual-weighted
  std::optional<Vec3> velocity_wls;  // plain WLS over all members
  std::vector<double> residuals;
};

struct SceneFusion {
  std::vector<FusedTrack> tracks;
  std::vector<MemberRef> removed;
};

/// Association, position fusion, calibration and velocity fusion for all
/// estimate sets. `sites[bs_id]` must describe each set's station.
SceneFusion fuse_scene(std::span<const BsSite> sites, std::span<const EstimateSet> estimates,
                       const FusionConfig& config, std::optional<int> expected_tracks = std::nullopt);

}  // namespace isac
