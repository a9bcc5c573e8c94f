#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "isac/channel.hpp"
#include "isac/estimation.hpp"
#include "isac/geometry.hpp"
#include "isac/types.hpp"

namespace isac::testing {

inline BsSite desk_site() {
  BsSite bs;
  bs.array = {8, 8, 16, 0.5};
  bs.subcarriers = 64;
  bs.symbols = 7;
  return bs;
}

inline CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cd{n(rng), n(rng)};
  return m;
}

inline CVector random_vector(Eigen::Index size, std::mt19937_64& rng) { return random_matrix(size, 1, rng).col(0); }

/// |x^H y| / (|x| |y|)
inline double collinearity(const CVector& x, const CVector& y) {
  return std::abs(x.dot(y)) / (x.norm() * y.norm());
}

/// Targets in the front half-space with well separated delays (ranges at least `min_gap` apart).
inline std::vector<PairTruth> random_targets(const BsSite& bs, int count, std::mt19937_64& rng,
                                             double min_gap = 20.0) {
  std::uniform_real_distribution<double> el(0.3, 1.3), az(0.4, 2.7), range(100.0, 900.0), vel(-25.0, 25.0),
      ph(0.0, 2.0 * kPi);
  std::vector<PairTruth> out;
  while (static_cast<int>(out.size()) < count) {
    const double r = range(rng);
    if (std::any_of(out.begin(), out.end(), [&](const PairTruth& p) { return std::abs(p.range - r) < min_gap; }))
      continue;
    out.push_back(make_pair_truth(bs, el(rng), az(rng), r, vel(rng), std::polar(1.0, ph(rng))));
  }
  return out;
}

inline std::vector<BeamDirection> directions_of(const std::vector<PairTruth>& pairs) {
  std::vector<BeamDirection> out;
  for (const auto& p : pairs) out.push_back({p.elevation, p.azimuth});
  return out;
}

/// Minimum-cost assignment of rows to columns by enumerating permutations
/// (square cost matrix, tiny sizes only).
template <typename Cost>
std::vector<int> best_permutation(int n, Cost cost) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += cost(i, perm[static_cast<std::size_t>(i)]);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Exhaustive-permutation grouping oracle: each station's points are matched
/// to station 0's by the minimum-sum-of-distances permutation. Returns
/// groups[k] = (station, index) pairs sorted, one group per station-0 point.
inline std::vector<std::vector<std::pair<int, int>>> permutation_grouping(
    const std::vector<std::vector<Vec3>>& per_station) {
  const int k = static_cast<int>(per_station.front().size());
  std::vector<std::vector<std::pair<int, int>>> groups(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) groups[static_cast<std::size_t>(i)].push_back({0, i});
  for (std::size_t j = 1; j < per_station.size(); ++j) {
    const auto perm = best_permutation(k, [&](int a, int b) {
      return (per_station.front()[static_cast<std::size_t>(a)] - per_station[j][static_cast<std::size_t>(b)]).norm();
    });
    for (int i = 0; i < k; ++i)
      groups[static_cast<std::size_t>(i)].push_back({static_cast<int>(j), perm[static_cast<std::size_t>(i)]});
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end());
  return groups;
}

/// Noiseless-friendly scene whose virtual angles and Doppler lie exactly on
/// the default search grids.
struct OnGridScene {
  BsSite bs = desk_site();
  std::vector<PairTruth> pairs;
  Beamformer tx, rx;
  SearchGrids grids;
};

inline OnGridScene on_grid_scene(int targets, std::uint64_t seed) {
  OnGridScene s;
  s.grids = SearchGrids::defaults(s.bs, 100.0 / 3.6);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ang(60, 450), dop(20, 580);
  std::uniform_real_distribution<double> range(100.0, 800.0), ph(0.0, 2.0 * kPi);
  while (static_cast<int>(s.pairs.size()) < targets) {
    const double z = s.grids.psi.value(ang(rng)), x = s.grids.theta.value(ang(rng));
    if (x * x + z * z > 0.9) continue;
    const double r = range(rng);
    bool close = false;
    for (const auto& p : s.pairs) close = close || std::abs(p.range - r) < 20.0;
    if (close) continue;
    const double f = s.grids.doppler.value(dop(rng));
    const auto [el, az] = angles_from_virtual(z, x);
    PairTruth p = make_pair_truth(s.bs, el, az, r, f * s.bs.wavelength() / 2.0, std::polar(1e-3, ph(rng)));
    p.dir_cos_x = x;
    p.dir_cos_z = z;
    p.doppler = f;
    s.pairs.push_back(p);
  }
  std::tie(s.tx, s.rx) = design_alignment_beams(directions_of(s.pairs), s.bs, rng);
  return s;
}

}  // namespace isac::testing
