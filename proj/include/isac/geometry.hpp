#pragma once

#include <random>
#include <span>
#include <vector>

#include "isac/types.hpp"

namespace isac {

/// Uniform planar array with a partially-connected hybrid front end.
struct ArrayConfig {
  int horizontal = 8;   // antennas along the local x-axis
  int vertical = 8;     // antennas along the local z-axis
  int rf_chains = 16;
  double spacing_wavelengths = 0.5;

  int elements() const { return horizontal * vertical; }
  int antennas_per_chain() const { return elements() / rf_chains; }
  void validate() const;
};

struct BsSite {
  Vec3 position = Vec3::Zero();
  double panel_azimuth = 0.0;  // rad, rotation between local and global x-axes
  double carrier_frequency = 4.9e9;
  ArrayConfig array;
  int subcarriers = 64;
  int symbols = 7;
  double subcarrier_spacing = 30e3;
  double symbol_period = 35.677e-6;
  double tx_power = 631.0;  // W

  double wavelength() const { return kSpeedOfLight / carrier_frequency; }
  void validate() const;
};

struct UavTruth {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double rcs = 0.01;  // m^2
};

/// Ground-truth sensing parameters of one BS/UAV pair (local BS frame).
struct PairTruth {
  double elevation = 0.0;  // zenith angle, rad
  double azimuth = 0.0;    // rad, in [0, pi] for front half-space targets
  double dir_cos_x = 0.0;  // sin(elevation) cos(azimuth)
  double dir_cos_z = 1.0;  // cos(elevation)
  double range = 0.0;
  double delay = 0.0;
  double radial_velocity = 0.0;
  double doppler = 0.0;
  cd alpha{0.0, 0.0};
};

/// Rotation taking local panel coordinates to the global frame.
Mat3 transform_matrix(double panel_azimuth);

/// [sin(el) cos(az), sin(el) sin(az), cos(el)].
Vec3 local_direction(double elevation, double azimuth);

/// Unit vector from the BS toward (elevation, azimuth) in the global frame.
Vec3 global_direction(const BsSite& bs, double elevation, double azimuth);

/// Elevation/azimuth of a global direction as seen from the BS panel.
std::pair<double, double> local_angles(const BsSite& bs, const Vec3& global_dir);

/// Builds a PairTruth from explicit local parameters, keeping the derived
/// fields (direction cosines, delay, doppler) consistent.
PairTruth make_pair_truth(const BsSite& bs, double elevation, double azimuth, double range,
                          double radial_velocity, cd alpha = {1.0, 0.0});

/// Throws DegenerateGeometry when the UAV sits on the BS.
PairTruth pair_truth(const BsSite& bs, const UavTruth& uav);

/// Monostatic path loss in dB (frequency in Hz, range in m, RCS in m^2).
double path_loss_db(double frequency_hz, double range_m, double rcs_m2);

/// Path-loss magnitude with a uniform random phase.
cd channel_coefficient(const BsSite& bs, const PairTruth& pair, double rcs, std::mt19937_64& rng);

struct SceneLayout {
  int num_bs = 3;
  double bs_circle_radius = 450.0;
  double bs_height = 30.0;
  int num_uavs = 3;
  double uav_disk_radius = 400.0;
  double height_min = 35.0;
  double height_max = 300.0;
  double speed_min = 5.0 / 3.6;
  double speed_max = 100.0 / 3.6;
  double rcs = 0.01;
  double min_uav_spacing = 60.0;  // rejection-sampling constraint between UAVs

  void validate() const;
};

struct Scene {
  std::vector<BsSite> sites;
  std::vector<UavTruth> uavs;
};

/// BSs evenly spaced on a circle, panels facing the circle center.
std::vector<BsSite> place_sites(const SceneLayout& layout, const BsSite& prototype);

Scene generate_scene(const SceneLayout& layout, const BsSite& prototype, std::mt19937_64& rng);

}  // namespace isac
