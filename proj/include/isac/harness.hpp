#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isac/detection.hpp"
#include "isac/dualpol.hpp"
#include "isac/estimation.hpp"
#include "isac/fusion.hpp"
#include "isac/geometry.hpp"

namespace isac {

enum class SweepAxis { None, TxPower, NumBs, NumUavs };

const char* to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

struct ExperimentConfig {
  BsSite bs;  // prototype; position and panel azimuth are set per site
  SceneLayout layout;
  double tx_power_dbm = 58.0;
  double noise_psd_dbm_hz = -174.0;
  bool noiseless = false;

  SweepAxis sweep = SweepAxis::None;
  std::vector<double> sweep_values;
  int trials = 100;
  double trim_fraction = 0.05;
  std::uint64_t seed = 1;

  bool bypass_detection = true;
  bool dualpol = false;
  double alignment_step_deg = 5.0;  // scan grid used to quantize alignment beams
  DetectionConfig detection;
  XpdModel xpd;
  FusionConfig fusion;

  int doppler_points = 601;
  int angle_points = 512;
  /// Snap true virtual angles and Doppler onto the search grids (exact-recovery tests).
  bool on_grid_targets = false;

  void validate() const;
  SearchGrids grids() const;
  /// Prototype with the configured transmit power applied.
  BsSite site_prototype() const;
};

/// Full-scale defaults: P=16, Q=24, R=64, M=612, N=7, J=4, K=4, 58 dBm.
ExperimentConfig default_config();
/// Desk-scale preset: P=8, Q=8, R=16, M=64, K=3, J=3.
ExperimentConfig desk_config();

std::string config_to_json(const ExperimentConfig& config);
/// Overlays the keys present in `text` onto `base`. Throws InvalidConfig.
ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig& base);

/// Per-pair errors at one BS after scoring-only matching to ground truth.
struct PairError {
  int bs_id = 0;
  int uav = 0;
  double aoa_deg = 0.0;  // sqrt(d_theta^2 + d_phi^2) in degrees
  double range = 0.0;
  double radial_velocity = 0.0;
  double doppler = 0.0;
};

struct TrackError {
  int uav = 0;
  int members = 0;
  double position = 0.0;
  double position_mean = 0.0;
  std::optional<double> velocity;
  std::optional<double> velocity_wls;
};

struct TrialResult {
  int sweep_index = 0;
  int trial = 0;
  double sweep_value = 0.0;
  bool ok = true;
  std::string error;
  int uavs = 0;
  int stations = 0;
  std::vector<PairError> pairs;
  std::vector<TrackError> tracks;
  std::vector<int> detected_counts;  // per BS, when detection runs
};

/// Metric name -> per-trial mean squared error (+inf when the trial failed
/// or could not produce the metric although it applies).
std::map<std::string, double> trial_mse(const TrialResult& r);

/// Metric names in emission order.
const std::vector<std::string>& metric_names();

/// sqrt of the mean over the kept trials after dropping the largest
/// floor(trim * n) values.
double trimmed_rmse(std::vector<double> mse, double trim_fraction);

/// Runs one trial end to end. `sweep_index` selects the sweep point.
TrialResult run_trial(const ExperimentConfig& config, int sweep_index, int trial);

/// Config with the sweep value at `sweep_index` applied.
ExperimentConfig at_sweep_point(const ExperimentConfig& config, int sweep_index);

struct MetricRow {
  double sweep = 0.0;
  std::string metric;
  double value = 0.0;
  int trials = 0;
};

struct ExperimentResult {
  std::vector<MetricRow> rows;
  std::vector<TrialResult> trials;
  double wall_seconds = 0.0;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

std::string metrics_csv(const std::vector<MetricRow>& rows);
std::string trials_jsonl(const std::vector<TrialResult>& trials);

/// Writes metrics.csv, trials.jsonl, config.echo.json and timing.json.
void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace isac
