#include "isac/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "isac/error.hpp"

namespace isac {

void ArrayConfig::validate() const {
  if (horizontal < 1 || vertical < 1 || rf_chains < 1)
    throw Error(ErrorCode::InvalidConfig, "array dimensions must be positive");
  if (elements() % rf_chains != 0)
    throw Error(ErrorCode::InvalidConfig, "P*Q must be divisible by the RF-chain count");
  if (!(spacing_wavelengths > 0.0)) throw Error(ErrorCode::InvalidConfig, "antenna spacing must be positive");
}

void BsSite::validate() const {
  array.validate();
  if (subcarriers < 1 || symbols < 1) throw Error(ErrorCode::InvalidConfig, "M and N must be positive");
  if (!(subcarrier_spacing > 0.0) || !(symbol_period > 0.0))
    throw Error(ErrorCode::InvalidConfig, "subcarrier spacing and symbol period must be positive");
  if (!(carrier_frequency > 0.0)) throw Error(ErrorCode::InvalidConfig, "carrier frequency must be positive");
  if (!(tx_power >= 0.0)) throw Error(ErrorCode::InvalidConfig, "transmit power must be non-negative");
}

Mat3 transform_matrix(double panel_azimuth) {
  const double c = std::cos(panel_azimuth);
  const double s = std::sin(panel_azimuth);
  Mat3 t;
  t << c, s, 0.0,
      -s, c, 0.0,
      0.0, 0.0, 1.0;
  return t;
}

Vec3 local_direction(double elevation, double azimuth) {
  const double st = std::sin(elevation);
  return {st * std::cos(azimuth), st * std::sin(azimuth), std::cos(elevation)};
}

Vec3 global_direction(const BsSite& bs, double elevation, double azimuth) {
  return transform_matrix(bs.panel_azimuth) * local_direction(elevation, azimuth);
}

std::pair<double, double> local_angles(const BsSite& bs, const Vec3& global_dir) {
  const Vec3 local = transform_matrix(bs.panel_azimuth).transpose() * global_dir.normalized();
  const double elevation = std::acos(std::clamp(local.z(), -1.0, 1.0));
  double azimuth = std::atan2(local.y(), local.x());
  if (azimuth < 0.0) azimuth += 2.0 * kPi;
  return {elevation, azimuth};
}

PairTruth make_pair_truth(const BsSite& bs, double elevation, double azimuth, double range,
                          double radial_velocity, cd alpha) {
  PairTruth p;
  p.elevation = elevation;
  p.azimuth = azimuth;
  p.dir_cos_x = std::sin(elevation) * std::cos(azimuth);
  p.dir_cos_z = std::cos(elevation);
  p.range = range;
  p.delay = 2.0 * range / kSpeedOfLight;
  p.radial_velocity = radial_velocity;
  p.doppler = 2.0 * radial_velocity / bs.wavelength();
  p.alpha = alpha;
  return p;
}

PairTruth pair_truth(const BsSite& bs, const UavTruth& uav) {
  const Vec3 offset = uav.position - bs.position;
  const double range = offset.norm();
  if (!(range > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "UAV coincides with BS");
  const Vec3 r = offset / range;
  const auto [elevation, azimuth] = local_angles(bs, r);
  return make_pair_truth(bs, elevation, azimuth, range, r.dot(uav.velocity), {0.0, 0.0});
}

double path_loss_db(double frequency_hz, double range_m, double rcs_m2) {
  return 103.4 + 20.0 * std::log10(frequency_hz / 1e6) + 40.0 * std::log10(range_m / 1e3) -
         10.0 * std::log10(rcs_m2);
}

cd channel_coefficient(const BsSite& bs, const PairTruth& pair, double rcs, std::mt19937_64& rng) {
  if (!(pair.range > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "zero range");
  const double magnitude = std::sqrt(std::pow(10.0, -path_loss_db(bs.carrier_frequency, pair.range, rcs) / 10.0));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  return std::polar(magnitude, phase(rng));
}

void SceneLayout::validate() const {
  if (num_bs < 1 || num_uavs < 0) throw Error(ErrorCode::InvalidConfig, "need at least one BS");
  if (!(height_max >= height_min) || !(speed_max >= speed_min) || speed_min < 0.0)
    throw Error(ErrorCode::InvalidConfig, "inverted height or speed range");
  if (!(uav_disk_radius < bs_circle_radius))
    throw Error(ErrorCode::InvalidConfig, "UAV disk must lie inside the BS circle (front half-space)");
  if (!(rcs > 0.0)) throw Error(ErrorCode::InvalidConfig, "rcs must be positive");
}

std::vector<BsSite> place_sites(const SceneLayout& layout, const BsSite& prototype) {
  std::vector<BsSite> sites;
  sites.reserve(static_cast<std::size_t>(layout.num_bs));
  for (int j = 0; j < layout.num_bs; ++j) {
    const double beta = 2.0 * kPi * j / layout.num_bs;
    BsSite s = prototype;
    s.position = {layout.bs_circle_radius * std::cos(beta), layout.bs_circle_radius * std::sin(beta),
                  layout.bs_height};
    // local +y (panel normal) must point at the circle center: T * e_y = -[cos b, sin b, 0]
    s.panel_azimuth = std::atan2(-std::cos(beta), -std::sin(beta));
    sites.push_back(s);
  }
  return sites;
}

Scene generate_scene(const SceneLayout& layout, const BsSite& prototype, std::mt19937_64& rng) {
  layout.validate();
  Scene scene;
  scene.sites = place_sites(layout, prototype);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  constexpr int kMaxAttempts = 100000;
  int attempts = 0;
  while (static_cast<int>(scene.uavs.size()) < layout.num_uavs) {
    if (++attempts > kMaxAttempts)
      throw Error(ErrorCode::InvalidConfig, "cannot place UAVs with the requested minimum spacing");
    const double rad = layout.uav_disk_radius * std::sqrt(unit(rng));
    const double ang = angle(rng);
    const double h = layout.height_min + (layout.height_max - layout.height_min) * unit(rng);
    UavTruth u;
    u.position = {rad * std::cos(ang), rad * std::sin(ang), h};
    u.rcs = layout.rcs;

    bool ok = std::all_of(scene.uavs.begin(), scene.uavs.end(), [&](const UavTruth& o) {
      return (o.position - u.position).norm() > layout.min_uav_spacing;
    });
    if (!ok) continue;

    const double speed = layout.speed_min + (layout.speed_max - layout.speed_min) * unit(rng);
    const double vz = 2.0 * unit(rng) - 1.0;
    const double va = angle(rng);
    const double vr = std::sqrt(std::max(0.0, 1.0 - vz * vz));
    u.velocity = speed * Vec3{vr * std::cos(va), vr * std::sin(va), vz};
    scene.uavs.push_back(u);
  }
  return scene;
}

}  // namespace isac
