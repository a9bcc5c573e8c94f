#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include <nlohmann/json.hpp>

#include "isac/cp_decomposition.hpp"
#include "isac/error.hpp"
#include "isac/harness.hpp"
#include "isac/io.hpp"

namespace isac {
namespace {

TEST(TrimmedRmse, DropsLargestErrors) {
  const std::vector<double> mse{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
                                1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 400.0};
  EXPECT_NEAR(trimmed_rmse(mse, 0.0), std::sqrt(419.0 / 20.0), 1e-12);
  EXPECT_NEAR(trimmed_rmse(mse, 0.05), 1.0, 1e-12);
  EXPECT_LT(trimmed_rmse(mse, 0.05), trimmed_rmse(mse, 0.0));
}

TEST(TrimmedRmse, FailedTrialsFallIntoTheTrimmedTail) {
  std::vector<double> mse(20, 4.0);
  mse[3] = std::numeric_limits<double>::infinity();
  EXPECT_NEAR(trimmed_rmse(mse, 0.05), 2.0, 1e-12);
  EXPECT_TRUE(std::isinf(trimmed_rmse(mse, 0.0)));
}

TEST(Presets, PaperDefaults) {
  const ExperimentConfig c = default_config();
  EXPECT_EQ(c.bs.symbol_period, 35.677e-6);
  EXPECT_EQ(c.bs.array.horizontal, 16);
  EXPECT_EQ(c.bs.array.vertical, 24);
  EXPECT_EQ(c.bs.array.rf_chains, 64);
  EXPECT_EQ(c.bs.subcarriers, 612);
  EXPECT_EQ(c.bs.symbols, 7);
  EXPECT_EQ(c.bs.subcarrier_spacing, 30e3);
  EXPECT_EQ(c.bs.carrier_frequency, 4.9e9);
  EXPECT_EQ(c.layout.num_bs, 4);
  EXPECT_EQ(c.layout.num_uavs, 4);
  EXPECT_EQ(c.tx_power_dbm, 58.0);
  EXPECT_EQ(c.fusion.beta1, 0.5);
  EXPECT_EQ(c.fusion.beta2, 0.5);
  EXPECT_NO_THROW(c.validate());
}

TEST(Presets, DeskPresetSatisfiesUniqueness) {
  const ExperimentConfig c = desk_config();
  EXPECT_EQ(c.bs.array.horizontal, 8);
  EXPECT_EQ(c.bs.array.vertical, 8);
  EXPECT_EQ(c.bs.array.rf_chains, 16);
  EXPECT_EQ(c.bs.subcarriers, 64);
  EXPECT_EQ(c.layout.num_bs, 3);
  EXPECT_EQ(c.layout.num_uavs, 3);
  const SmoothingPlan plan = SmoothingPlan::balanced(c.bs.subcarriers);
  EXPECT_TRUE(check_uniqueness(plan, c.layout.num_uavs, c.bs.symbols, c.bs.array.rf_chains));
  EXPECT_NO_THROW(c.validate());
}

TEST(ConfigJson, RoundTripAndOverlay) {
  ExperimentConfig c = desk_config();
  c.sweep = SweepAxis::TxPower;
  c.sweep_values = {60.0, 70.0};
  c.seed = 0xfeedbeefcafeULL;
  c.fusion.rule = SelectionRule::DirectionDominant;
  c.fusion.tie_tolerance = 0.3;
  c.dualpol = true;
  const ExperimentConfig back = config_from_json(config_to_json(c), default_config());
  EXPECT_EQ(config_to_json(back), config_to_json(c));

  const ExperimentConfig partial = config_from_json(R"({"trials": 7, "fusion": {"threshold": 12.5}})", c);
  EXPECT_EQ(partial.trials, 7);
  EXPECT_EQ(partial.fusion.threshold, 12.5);
  EXPECT_EQ(partial.fusion.tie_tolerance, 0.3);

  try {
    config_from_json(R"({"trim_fraction": 0.7})", c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
  EXPECT_THROW(config_from_json(R"({"trials": 0})", c), Error);
  EXPECT_THROW(config_from_json("[1, 2", c), Error);
}

ExperimentConfig small_run() {
  ExperimentConfig c = desk_config();
  c.trials = 3;
  c.sweep = SweepAxis::TxPower;
  c.sweep_values = {70.0, 76.0};
  c.seed = 42;
  return c;
}

TEST(RunExperiment, SameSeedIsBitIdentical) {
  const ExperimentConfig c = small_run();
  const ExperimentResult a = run_experiment(c), b = run_experiment(c);
  EXPECT_EQ(metrics_csv(a.rows), metrics_csv(b.rows));
  EXPECT_EQ(trials_jsonl(a.trials), trials_jsonl(b.trials));
  ExperimentConfig other = c;
  other.seed = 43;
  EXPECT_NE(trials_jsonl(run_experiment(other).trials), trials_jsonl(a.trials));
}

TEST(RunExperiment, RowsCoverEverySweepPointAndMetric) {
  const ExperimentConfig c = small_run();
  const ExperimentResult r = run_experiment(c);
  EXPECT_EQ(r.trials.size(), 6u);
  EXPECT_EQ(r.rows.size(), 2 * metric_names().size());
  const std::string csv = metrics_csv(r.rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sweep,metric,value,trials");
  for (const auto& row : r.rows) {
    EXPECT_GE(row.value, 0.0);
    EXPECT_EQ(row.trials, 3);
  }
}

TEST(RunExperiment, WritesOutputFiles) {
  const auto dir = std::filesystem::temp_directory_path() / ("isac_harness_" + std::to_string(::getpid()));
  ExperimentConfig c = small_run();
  c.trials = 1;
  c.sweep_values = {76.0};
  write_outputs(dir, c, run_experiment(c));
  for (const char* name : {"metrics.csv", "trials.jsonl", "config.echo.json", "timing.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  const auto echo = config_from_json(io::read_file(dir / "config.echo.json"), default_config());
  EXPECT_EQ(config_to_json(echo), config_to_json(c));
  std::filesystem::remove_all(dir);
}

TEST(RunExperiment, NoiselessErrorsWithinGridResolution) {
  ExperimentConfig c = desk_config();
  c.noiseless = true;
  c.trials = 10;
  const ExperimentResult r = run_experiment(c);
  const SearchGrids g = c.grids();
  const double wavelength = c.bs.wavelength();
  const double angle_step = g.psi.step();  // virtual-angle step, same for theta within 2x
  double max_range = c.layout.bs_circle_radius + c.layout.uav_disk_radius + c.layout.height_max;
  for (const auto& row : r.rows) {
    if (row.metric == "range_rmse") {
      EXPECT_LT(row.value, 1e-6);
    }
    if (row.metric == "radial_velocity_rmse") {
      EXPECT_LT(row.value, 0.5 * g.doppler.step() * wavelength / 2.0);
    }
    // one virtual-angle step moves the direction by at most step / sin(elevation) rad
    if (row.metric == "aoa_rmse") {
      EXPECT_LT(row.value, 2.0 * angle_step / std::sin(0.1) * 180.0 / kPi);
    }
    if (row.metric == "position_rmse") {
      EXPECT_LT(row.value, max_range * 2.0 * angle_step);
    }
    EXPECT_TRUE(std::isfinite(row.value)) << row.metric;
  }
}

TEST(RunExperiment, OnGridSingleStationIsExact) {
  ExperimentConfig c = desk_config();
  c.noiseless = true;
  c.on_grid_targets = true;
  c.layout.num_bs = 1;
  c.trials = 5;
  const ExperimentResult r = run_experiment(c);
  for (const auto& row : r.rows) {
    if (row.metric == "range_rmse" || row.metric == "position_rmse") {
      EXPECT_LT(row.value, 1e-6) << row.metric;
    }
    if (row.metric == "aoa_rmse" || row.metric == "radial_velocity_rmse") {
      EXPECT_LT(row.value, 1e-9) << row.metric;
    }
  }
}

TEST(SweepAxis, NamesRoundTrip) {
  for (SweepAxis a : {SweepAxis::None, SweepAxis::TxPower, SweepAxis::NumBs, SweepAxis::NumUavs})
    EXPECT_EQ(sweep_axis_from_string(to_string(a)), a);
  EXPECT_THROW(sweep_axis_from_string("bogus"), Error);
}

}  // namespace
}  // namespace isac
