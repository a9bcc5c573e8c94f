#include "isac/fusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>

#include "isac/error.hpp"

namespace isac {

namespace {

struct DisjointSets {
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(b)] = a;
    return true;
  }
  std::vector<int> parent;
};

struct Edge {
  int a;
  int b;
  double w;
};

std::vector<std::vector<int>> components(const std::vector<int>& vertices, std::span<const Edge> edges) {
  const int n = static_cast<int>(vertices.size());
  DisjointSets ds(n);
  for (const auto& e : edges) ds.unite(e.a, e.b);
  std::vector<std::vector<int>> out;
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int root = ds.find(i);
    if (slot[static_cast<std::size_t>(root)] < 0) {
      slot[static_cast<std::size_t>(root)] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[static_cast<std::size_t>(slot[static_cast<std::size_t>(root)])].push_back(vertices[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace

Vec3 back_project(const BsSite& bs, double elevation, double azimuth, double range) {
  return range * global_direction(bs, elevation, azimuth) + bs.position;
}

AssociationResult associate(std::span<const Vec3> positions, std::span<const int> station, double threshold,
                            std::optional<int> expected_groups) {
  if (positions.size() != station.size()) throw Error(ErrorCode::ShapeMismatch, "one station id per position");
  const int n = static_cast<int>(positions.size());
  AssociationResult out;

  std::vector<double> shortest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (station[static_cast<std::size_t>(a)] == station[static_cast<std::size_t>(b)]) continue;
      const double w = (positions[static_cast<std::size_t>(a)] - positions[static_cast<std::size_t>(b)]).norm();
      shortest[static_cast<std::size_t>(a)] = std::min(shortest[static_cast<std::size_t>(a)], w);
      shortest[static_cast<std::size_t>(b)] = std::min(shortest[static_cast<std::size_t>(b)], w);
    }

  std::vector<int> kept;
  for (int v = 0; v < n; ++v) {
    if (shortest[static_cast<std::size_t>(v)] > threshold)
      out.removed.push_back(v);
    else
      kept.push_back(v);
  }
  if (kept.empty()) throw Error(ErrorCode::EmptyGraph, "every vertex was removed as a false detection");

  // local indices into `kept`
  std::vector<Edge> edges;
  const int m = static_cast<int>(kept.size());
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      const int va = kept[static_cast<std::size_t>(a)], vb = kept[static_cast<std::size_t>(b)];
      if (station[static_cast<std::size_t>(va)] == station[static_cast<std::size_t>(vb)]) continue;
      edges.push_back({a, b, (positions[static_cast<std::size_t>(va)] - positions[static_cast<std::size_t>(vb)]).norm()});
    }
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.w < y.w; });

  int groups = 0;
  if (expected_groups) {
    groups = *expected_groups;
  } else {
    std::vector<Edge> gated;
    std::copy_if(edges.begin(), edges.end(), std::back_inserter(gated), [&](const Edge& e) { return e.w <= threshold; });
    for (const auto& c : components(kept, gated))
      if (c.size() >= 2) ++groups;
    groups = std::max(groups, 1);
  }

  std::vector<Edge> mst;
  DisjointSets ds(m);
  for (const auto& e : edges)
    if (ds.unite(e.a, e.b)) mst.push_back(e);
  const int forest = m - static_cast<int>(mst.size());
  const int cut = std::clamp(groups - forest, 0, static_cast<int>(mst.size()));
  mst.resize(mst.size() - static_cast<std::size_t>(cut));  // mst is ascending: drop the longest
  out.groups = components(kept, mst);
  return out;
}

void FusionConfig::validate() const {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidConfig, "association threshold must be positive");
  if (!(beta1 > 0.0) || !(beta2 > 0.0)) throw Error(ErrorCode::InvalidConfig, "weighting factors must be positive");
  if (lattice_points < 1 || lattice_points % 2 == 0)
    throw Error(ErrorCode::InvalidConfig, "lattice points per axis must be odd");
  if (!(lattice_half_width > 0.0)) throw Error(ErrorCode::InvalidConfig, "lattice half-width must be positive");
  if (!(tie_tolerance >= 0.0)) throw Error(ErrorCode::InvalidConfig, "tie tolerance must be non-negative");
}

Vec3 mean_fusion(std::span<const Vec3> positions) {
  if (positions.empty()) throw Error(ErrorCode::NullInput, "no positions to fuse");
  Vec3 acc = Vec3::Zero();
  for (const auto& p : positions) acc += p;
  return acc / static_cast<double>(positions.size());
}

std::vector<Vec3> build_lattice(const Vec3& center, int points_per_axis, double half_width) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(points_per_axis) * points_per_axis * points_per_axis);
  const double step = points_per_axis > 1 ? 2.0 * half_width / (points_per_axis - 1) : 0.0;
  const int h = points_per_axis / 2;
  for (int i = -h; i <= h; ++i)
    for (int j = -h; j <= h; ++j)
      for (int k = -h; k <= h; ++k) out.push_back(center + step * Vec3(i, j, k));
  return out;
}

PositionFusion fuse_position(std::span<const kernels::RangeBearing> members, const FusionConfig& config) {
  if (members.empty()) throw Error(ErrorCode::NullInput, "empty group");
  std::vector<Vec3> projections;
  for (const auto& m : members) projections.push_back(m.station + m.range * m.direction);
  PositionFusion out;
  out.seed = mean_fusion(projections);
  if (members.size() == 1) {
    out.position = out.seed;
    out.pareto_size = 1;
    return out;
  }

  const auto lattice = build_lattice(out.seed, config.lattice_points, config.lattice_half_width);
  const auto loss = kernels::position_losses(lattice, members, config.beta1);
  const auto keep = kernels::pareto_mask(loss.range_loss, loss.direction_loss);

  const bool by_range = config.rule == SelectionRule::RangeDominant;
  const RVector& primary = by_range ? loss.range_loss : loss.direction_loss;
  const RVector& secondary = by_range ? loss.direction_loss : loss.range_loss;
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    if (!keep[i]) continue;
    ++out.pareto_size;
    floor = std::min(floor, primary(static_cast<Eigen::Index>(i)));
  }
  const double cap = floor + config.tie_tolerance;
  std::size_t best = lattice.size();
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (!keep[i] || primary(ii) > cap) continue;
    if (best == lattice.size()) {
      best = i;
      continue;
    }
    const auto bb = static_cast<Eigen::Index>(best);
    if (secondary(ii) < secondary(bb) || (secondary(ii) == secondary(bb) && primary(ii) < primary(bb))) best = i;
  }
  out.position = lattice[best];
  out.range_loss = loss.range_loss(static_cast<Eigen::Index>(best));
  out.direction_loss = loss.direction_loss(static_cast<Eigen::Index>(best));
  return out;
}

Calibrated calibrate(const BsSite& bs, const Vec3& position) {
  const Vec3 offset = position - bs.position;
  Calibrated c;
  c.range = offset.norm();
  if (!(c.range > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "fused position coincides with the BS");
  c.direction = offset / c.range;
  std::tie(c.elevation, c.azimuth) = local_angles(bs, c.direction);
  return c;
}

Vec3 fuse_velocity_wls(std::span<const RadialObservation> obs, double beta2) {
  if (obs.size() < 3) throw Error(ErrorCode::RankDeficientGeometry, "velocity fusion needs at least 3 members");
  Mat3 normal = Mat3::Zero();
  Vec3 rhs = Vec3::Zero();
  for (const auto& o : obs) {
    const double w = std::pow(o.range, -beta2);
    normal += w * o.direction * o.direction.transpose();
    rhs += w * o.radial_velocity * o.direction;
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(normal, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(2);
  if (!(lo > 0.0) || hi / lo > 1e10) throw Error(ErrorCode::RankDeficientGeometry, "ill-conditioned geometry");
  return normal.ldlt().solve(rhs);
}

ResidualFusion fuse_velocity_residual(std::span<const RadialObservation> obs, double beta2) {
  const std::size_t j = obs.size();
  if (j < 3) throw Error(ErrorCode::RankDeficientGeometry, "velocity fusion needs at least 3 members");
  if (j > 20) throw Error(ErrorCode::InvalidConfig, "too many members for subset enumeration");

  ResidualFusion out;
  std::vector<Vec3> estimates;
  std::vector<RadialObservation> subset;
  for (unsigned mask = 0; mask < (1u << j); ++mask) {
    if (std::popcount(mask) < 3) continue;
    subset.clear();
    for (std::size_t i = 0; i < j; ++i)
      if (mask & (1u << i)) subset.push_back(obs[i]);
    Vec3 v;
    try {
      v = fuse_velocity_wls(subset, beta2);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficientGeometry) throw;
      continue;
    }
    double res = 0.0;
    for (const auto& o : obs) {
      const double err = o.direction.dot(v) - o.radial_velocity;
      res += std::pow(o.range, -beta2) * err * err;
    }
    if (res == 0.0) {
      out.velocity = v;
      out.subsets = {mask};
      out.residuals = {0.0};
      return out;
    }
    out.subsets.push_back(mask);
    out.residuals.push_back(res);
    estimates.push_back(v);
  }
  if (estimates.empty()) throw Error(ErrorCode::RankDeficientGeometry, "no well-conditioned subset");

  Vec3 acc = Vec3::Zero();
  double wsum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    acc += estimates[i] / out.residuals[i];
    wsum += 1.0 / out.residuals[i];
  }
  out.velocity = acc / wsum;
  return out;
}

SceneFusion fuse_scene(std::span<const BsSite> sites, std::span<const EstimateSet> estimates,
                       const FusionConfig& config, std::optional<int> expected_tracks) {
  config.validate();
  std::vector<Vec3> positions;
  std::vector<int> station;
  std::vector<MemberRef> refs;
  std::vector<kernels::RangeBearing> views;
  std::vector<double> radials;
  std::set<int> stations;
  for (const auto& set : estimates) {
    if (set.bs_id < 0 || static_cast<std::size_t>(set.bs_id) >= sites.size())
      throw Error(ErrorCode::ShapeMismatch, "estimate set refers to an unknown BS");
    const BsSite& bs = sites[static_cast<std::size_t>(set.bs_id)];
    for (std::size_t t = 0; t < set.targets.size(); ++t) {
      const auto& e = set.targets[t];
      const Vec3 dir = global_direction(bs, e.elevation, e.azimuth);
      views.push_back({bs.position, dir, e.range});
      positions.push_back(bs.position + e.range * dir);
      station.push_back(set.bs_id);
      refs.push_back({set.bs_id, static_cast<int>(t)});
      radials.push_back(e.radial_velocity);
      stations.insert(set.bs_id);
    }
  }

  SceneFusion out;
  if (positions.empty()) return out;
  AssociationResult assoc;
  if (stations.size() < 2) {
    for (int v = 0; v < static_cast<int>(positions.size()); ++v) assoc.groups.push_back({v});
  } else {
    assoc = associate(positions, station, config.threshold, expected_tracks);
  }
  for (int v : assoc.removed) out.removed.push_back(refs[static_cast<std::size_t>(v)]);

  for (const auto& group : assoc.groups) {
    FusedTrack track;
    std::vector<kernels::RangeBearing> members;
    for (int v : group) {
      track.members.push_back(refs[static_cast<std::size_t>(v)]);
      members.push_back(views[static_cast<std::size_t>(v)]);
    }
    const PositionFusion pf = fuse_position(members, config);
    track.position = pf.position;
    track.mean_position = pf.seed;
    track.range_loss = pf.range_loss;
    track.direction_loss = pf.direction_loss;
    track.pareto_size = pf.pareto_size;

    if (group.size() >= 3) {
      std::vector<RadialObservation> obs;
      for (int v : group) {
        const Calibrated c = calibrate(sites[static_cast<std::size_t>(station[static_cast<std::size_t>(v)])], pf.position);
        obs.push_back({c.direction, c.range, radials[static_cast<std::size_t>(v)]});
      }
      try {
        track.velocity_wls = fuse_velocity_wls(obs, config.beta2);
        const ResidualFusion rf = fuse_velocity_residual(obs, config.beta2);
        track.velocity = rf.velocity;
        track.residuals = rf.residuals;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::RankDeficientGeometry) throw;
      }
    }
    out.tracks.push_back(std::move(track));
  }
  return out;
}

}  // namespace isac
