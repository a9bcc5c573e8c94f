#include "isac/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "isac/channel.hpp"
#include "isac/error.hpp"
#include "isac/io.hpp"

namespace isac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRadToDeg = 180.0 / kPi;

/// Minimum-cost assignment of `rows` items to `cols` items by enumeration.
/// Returns for each row the matched column or -1.
template <typename Cost>
std::vector<int> brute_force_match(int rows, int cols, Cost cost) {
  const int n = std::max(rows, cols);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best(static_cast<std::size_t>(rows), -1);
  double best_cost = kInf;
  do {
    double c = 0.0;
    for (int i = 0; i < rows; ++i)
      if (perm[static_cast<std::size_t>(i)] < cols) c += cost(i, perm[static_cast<std::size_t>(i)]);
    if (c < best_cost) {
      best_cost = c;
      for (int i = 0; i < rows; ++i)
        best[static_cast<std::size_t>(i)] = perm[static_cast<std::size_t>(i)] < cols ? perm[static_cast<std::size_t>(i)] : -1;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double snap(double v, const SearchGrid1D& g) {
  const int i = std::clamp(static_cast<int>(std::lround((v - g.lo) / g.step())), 0, g.points - 1);
  return g.value(i);
}

/// Moves the pair's virtual angles and Doppler onto the search grids.
PairTruth snap_to_grids(const BsSite& bs, const PairTruth& p, const SearchGrids& grids) {
  const double psi = snap(p.dir_cos_z, grids.psi);
  double x = snap(p.dir_cos_x, grids.theta);
  const double limit = std::sqrt(std::max(0.0, 1.0 - psi * psi));
  while (std::abs(x) > limit) x -= std::copysign(grids.theta.step(), x);
  const double f = snap(p.doppler, grids.doppler);
  const auto [el, az] = angles_from_virtual(psi, x);
  PairTruth s = make_pair_truth(bs, el, az, p.range, f * bs.wavelength() / 2.0, p.alpha);
  s.dir_cos_x = x;  // keep the exact grid values
  s.dir_cos_z = psi;
  s.doppler = f;
  return s;
}

double wrap_angle_diff(double a, double b) {
  double d = std::fmod(a - b, 2.0 * kPi);
  if (d > kPi) d -= 2.0 * kPi;
  if (d < -kPi) d += 2.0 * kPi;
  return d;
}

template <typename T>
void overlay(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None: return "none";
    case SweepAxis::TxPower: return "tx_power";
    case SweepAxis::NumBs: return "num_bs";
    case SweepAxis::NumUavs: return "num_uavs";
  }
  return "none";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "none") return SweepAxis::None;
  if (name == "tx_power") return SweepAxis::TxPower;
  if (name == "num_bs") return SweepAxis::NumBs;
  if (name == "num_uavs") return SweepAxis::NumUavs;
  throw Error(ErrorCode::InvalidConfig, "unknown sweep axis '" + name + "'");
}

void ExperimentConfig::validate() const {
  bs.validate();
  layout.validate();
  fusion.validate();
  if (trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) throw Error(ErrorCode::InvalidConfig, "trim fraction in [0, 0.5)");
  if (sweep != SweepAxis::None && sweep_values.empty())
    throw Error(ErrorCode::InvalidConfig, "sweep axis given without sweep values");
  if (doppler_points < 2 || angle_points < 2) throw Error(ErrorCode::InvalidConfig, "grids need >= 2 points");
  if (on_grid_targets && (layout.num_bs != 1 || sweep == SweepAxis::NumBs))
    throw Error(ErrorCode::InvalidConfig, "on-grid targets are defined for a single BS");
  if (!(alignment_step_deg > 0.0)) throw Error(ErrorCode::InvalidConfig, "alignment step must be positive");
}

SearchGrids ExperimentConfig::grids() const {
  SearchGrids g = SearchGrids::defaults(bs, layout.speed_max);
  g.doppler.points = doppler_points;
  g.psi.points = angle_points;
  g.theta.points = angle_points;
  return g;
}

BsSite ExperimentConfig::site_prototype() const {
  BsSite p = bs;
  p.tx_power = dbm_to_watts(tx_power_dbm);
  return p;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.bs.array = {16, 24, 64, 0.5};
  c.bs.subcarriers = 612;
  c.bs.symbols = 7;
  c.bs.carrier_frequency = 4.9e9;
  c.bs.subcarrier_spacing = 30e3;
  c.bs.symbol_period = 35.677e-6;
  c.layout.num_bs = 4;
  c.layout.num_uavs = 4;
  c.tx_power_dbm = 58.0;
  c.trials = 1000;
  return c;
}

ExperimentConfig desk_config() {
  ExperimentConfig c;
  c.bs.array = {8, 8, 16, 0.5};
  c.bs.subcarriers = 64;
  c.bs.symbols = 7;
  c.layout.num_bs = 3;
  c.layout.num_uavs = 3;
  c.trials = 100;
  // the 8x8 array and 64 subcarriers lose about 18 dB of gain against the full-scale preset
  c.tx_power_dbm = 76.0;
  c.fusion.lattice_points = 61;
  c.fusion.lattice_half_width = 7.5;
  c.fusion.tie_tolerance = 0.1;
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["bs"] = {{"horizontal", c.bs.array.horizontal},
             {"vertical", c.bs.array.vertical},
             {"rf_chains", c.bs.array.rf_chains},
             {"spacing_wavelengths", c.bs.array.spacing_wavelengths},
             {"carrier_frequency", c.bs.carrier_frequency},
             {"subcarriers", c.bs.subcarriers},
             {"symbols", c.bs.symbols},
             {"subcarrier_spacing", c.bs.subcarrier_spacing},
             {"symbol_period", c.bs.symbol_period}};
  j["layout"] = {{"num_bs", c.layout.num_bs},
                 {"bs_circle_radius", c.layout.bs_circle_radius},
                 {"bs_height", c.layout.bs_height},
                 {"num_uavs", c.layout.num_uavs},
                 {"uav_disk_radius", c.layout.uav_disk_radius},
                 {"height_min", c.layout.height_min},
                 {"height_max", c.layout.height_max},
                 {"speed_min", c.layout.speed_min},
                 {"speed_max", c.layout.speed_max},
                 {"rcs", c.layout.rcs},
                 {"min_uav_spacing", c.layout.min_uav_spacing}};
  j["tx_power_dbm"] = c.tx_power_dbm;
  j["noise_psd_dbm_hz"] = c.noise_psd_dbm_hz;
  j["noiseless"] = c.noiseless;
  j["sweep"] = to_string(c.sweep);
  j["sweep_values"] = c.sweep_values;
  j["trials"] = c.trials;
  j["trim_fraction"] = c.trim_fraction;
  j["seed"] = c.seed;
  j["bypass_detection"] = c.bypass_detection;
  j["dualpol"] = c.dualpol;
  j["alignment_step_deg"] = c.alignment_step_deg;
  j["detection"] = {{"pfa", c.detection.pfa}, {"scan_step_deg", c.detection.scan_step * kRadToDeg}};
  j["xpd"] = {{"mean_db", c.xpd.mean_db}, {"std_db", c.xpd.std_db}};
  j["fusion"] = {{"threshold", c.fusion.threshold},
                 {"beta1", c.fusion.beta1},
                 {"beta2", c.fusion.beta2},
                 {"lattice_points", c.fusion.lattice_points},
                 {"lattice_half_width", c.fusion.lattice_half_width},
                 {"tie_tolerance", c.fusion.tie_tolerance},
                 {"rule", c.fusion.rule == SelectionRule::RangeDominant ? "range_dominant" : "direction_dominant"}};
  j["doppler_points"] = c.doppler_points;
  j["angle_points"] = c.angle_points;
  j["on_grid_targets"] = c.on_grid_targets;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig& base) {
  ExperimentConfig c = base;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("bs")) {
      const auto& b = j.at("bs");
      overlay(b, "horizontal", c.bs.array.horizontal);
      overlay(b, "vertical", c.bs.array.vertical);
      overlay(b, "rf_chains", c.bs.array.rf_chains);
      overlay(b, "spacing_wavelengths", c.bs.array.spacing_wavelengths);
      overlay(b, "carrier_frequency", c.bs.carrier_frequency);
      overlay(b, "subcarriers", c.bs.subcarriers);
      overlay(b, "symbols", c.bs.symbols);
      overlay(b, "subcarrier_spacing", c.bs.subcarrier_spacing);
      overlay(b, "symbol_period", c.bs.symbol_period);
    }
    if (j.contains("layout")) {
      const auto& l = j.at("layout");
      overlay(l, "num_bs", c.layout.num_bs);
      overlay(l, "bs_circle_radius", c.layout.bs_circle_radius);
      overlay(l, "bs_height", c.layout.bs_height);
      overlay(l, "num_uavs", c.layout.num_uavs);
      overlay(l, "uav_disk_radius", c.layout.uav_disk_radius);
      overlay(l, "height_min", c.layout.height_min);
      overlay(l, "height_max", c.layout.height_max);
      overlay(l, "speed_min", c.layout.speed_min);
      overlay(l, "speed_max", c.layout.speed_max);
      overlay(l, "rcs", c.layout.rcs);
      overlay(l, "min_uav_spacing", c.layout.min_uav_spacing);
    }
    overlay(j, "tx_power_dbm", c.tx_power_dbm);
    overlay(j, "noise_psd_dbm_hz", c.noise_psd_dbm_hz);
    overlay(j, "noiseless", c.noiseless);
    if (j.contains("sweep")) c.sweep = sweep_axis_from_string(j.at("sweep").get<std::string>());
    overlay(j, "sweep_values", c.sweep_values);
    overlay(j, "trials", c.trials);
    overlay(j, "trim_fraction", c.trim_fraction);
    overlay(j, "seed", c.seed);
    overlay(j, "bypass_detection", c.bypass_detection);
    overlay(j, "dualpol", c.dualpol);
    overlay(j, "alignment_step_deg", c.alignment_step_deg);
    if (j.contains("detection")) {
      const auto& d = j.at("detection");
      overlay(d, "pfa", c.detection.pfa);
      if (d.contains("scan_step_deg")) c.detection.scan_step = d.at("scan_step_deg").get<double>() / kRadToDeg;
    }
    if (j.contains("xpd")) {
      overlay(j.at("xpd"), "mean_db", c.xpd.mean_db);
      overlay(j.at("xpd"), "std_db", c.xpd.std_db);
    }
    if (j.contains("fusion")) {
      const auto& f = j.at("fusion");
      overlay(f, "threshold", c.fusion.threshold);
      overlay(f, "beta1", c.fusion.beta1);
      overlay(f, "beta2", c.fusion.beta2);
      overlay(f, "lattice_points", c.fusion.lattice_points);
      overlay(f, "lattice_half_width", c.fusion.lattice_half_width);
      overlay(f, "tie_tolerance", c.fusion.tie_tolerance);
      if (f.contains("rule")) {
        const auto rule = f.at("rule").get<std::string>();
        if (rule == "range_dominant")
          c.fusion.rule = SelectionRule::RangeDominant;
        else if (rule == "direction_dominant")
          c.fusion.rule = SelectionRule::DirectionDominant;
        else
          throw Error(ErrorCode::InvalidConfig, "unknown selection rule '" + rule + "'");
      }
    }
    overlay(j, "doppler_points", c.doppler_points);
    overlay(j, "angle_points", c.angle_points);
    overlay(j, "on_grid_targets", c.on_grid_targets);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config parse error: ") + e.what());
  }
  c.validate();
  return c;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "aoa_rmse",      "range_rmse",          "radial_velocity_rmse",   "position_rmse",
      "position_mean_fusion_rmse", "true_velocity_rmse", "true_velocity_wls_rmse"};
  return names;
}

std::map<std::string, double> trial_mse(const TrialResult& r) {
  std::map<std::string, double> out;
  const bool velocity_applies = r.stations >= 3;
  const auto fail_all = [&] {
    for (const auto& n : metric_names()) out[n] = kInf;
    if (!velocity_applies) {
      out.erase("true_velocity_rmse");
      out.erase("true_velocity_wls_rmse");
    }
  };
  if (!r.ok) {
    fail_all();
    return out;
  }

  const std::size_t expected_pairs = static_cast<std::size_t>(r.uavs) * static_cast<std::size_t>(r.stations);
  double aoa = 0.0, range = 0.0, radial = 0.0;
  for (const auto& p : r.pairs) {
    aoa += p.aoa_deg * p.aoa_deg;
    range += p.range * p.range;
    radial += p.radial_velocity * p.radial_velocity;
  }
  const bool pairs_complete = r.pairs.size() == expected_pairs && expected_pairs > 0;
  const double np = static_cast<double>(r.pairs.size());
  out["aoa_rmse"] = pairs_complete ? aoa / np : kInf;
  out["range_rmse"] = pairs_complete ? range / np : kInf;
  out["radial_velocity_rmse"] = pairs_complete ? radial / np : kInf;

  const bool tracks_complete = static_cast<int>(r.tracks.size()) == r.uavs && r.uavs > 0;
  double pos = 0.0, pos_mean = 0.0, vel = 0.0, vel_wls = 0.0;
  int scored = 0;
  for (const auto& t : r.tracks) {
    pos += t.position * t.position;
    pos_mean += t.position_mean * t.position_mean;
    // velocity is only defined for tracks seen by at least three stations
    if (t.members >= 3 && t.velocity && t.velocity_wls) {
      vel += *t.velocity * *t.velocity;
      vel_wls += *t.velocity_wls * *t.velocity_wls;
      ++scored;
    }
  }
  const double nt = static_cast<double>(r.tracks.size());
  out["position_rmse"] = tracks_complete ? pos / nt : kInf;
  out["position_mean_fusion_rmse"] = tracks_complete ? pos_mean / nt : kInf;
  if (velocity_applies) {
    const bool vel_ok = tracks_complete && scored > 0;
    out["true_velocity_rmse"] = vel_ok ? vel / scored : kInf;
    out["true_velocity_wls_rmse"] = vel_ok ? vel_wls / scored : kInf;
  }
  return out;
}

double trimmed_rmse(std::vector<double> mse, double trim_fraction) {
  if (mse.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(mse.begin(), mse.end());
  const auto drop = static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(mse.size())));
  const std::size_t keep = mse.size() - drop;
  double acc = 0.0;
  for (std::size_t i = 0; i < keep; ++i) acc += mse[i];
  return std::sqrt(acc / static_cast<double>(keep));
}

ExperimentConfig at_sweep_point(const ExperimentConfig& config, int sweep_index) {
  ExperimentConfig c = config;
  if (config.sweep == SweepAxis::None) return c;
  const double v = config.sweep_values.at(static_cast<std::size_t>(sweep_index));
  switch (config.sweep) {
    case SweepAxis::TxPower: c.tx_power_dbm = v; break;
    case SweepAxis::NumBs: c.layout.num_bs = static_cast<int>(std::lround(v)); break;
    case SweepAxis::NumUavs: c.layout.num_uavs = static_cast<int>(std::lround(v)); break;
    case SweepAxis::None: break;
  }
  return c;
}

TrialResult run_trial(const ExperimentConfig& base, int sweep_index, int trial) {
  const ExperimentConfig config = at_sweep_point(base, sweep_index);
  TrialResult result;
  result.sweep_index = sweep_index;
  result.trial = trial;
  result.sweep_value = base.sweep == SweepAxis::None ? 0.0 : base.sweep_values.at(static_cast<std::size_t>(sweep_index));
  result.uavs = config.layout.num_uavs;
  result.stations = config.layout.num_bs;

  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(sweep_index), static_cast<std::uint32_t>(trial)};
  std::mt19937_64 rng(seq);

  try {
    config.validate();
    const BsSite proto = config.site_prototype();
    Scene scene = generate_scene(config.layout, proto, rng);
    const SearchGrids grids = config.grids();
    const int k_true = static_cast<int>(scene.uavs.size());

    std::vector<EstimateSet> sets;
    std::vector<std::vector<PairTruth>> truths;
    for (int j = 0; j < static_cast<int>(scene.sites.size()); ++j) {
      const BsSite& bs = scene.sites[static_cast<std::size_t>(j)];
      std::vector<PairTruth> pairs;
      for (auto& uav : scene.uavs) {
        PairTruth p = pair_truth(bs, uav);
        p.alpha = channel_coefficient(bs, p, uav.rcs, rng);
        if (config.on_grid_targets) {
          p = snap_to_grids(bs, p, grids);
          uav.position = back_project(bs, p.elevation, p.azimuth, p.range);
        }
        pairs.push_back(p);
      }
      const double nv = config.noiseless ? 0.0 : noise_variance(bs, config.noise_psd_dbm_hz);

      std::vector<BeamDirection> flagged;
      int k_est = k_true;
      if (config.bypass_detection) {
        const ScanGrid scan = ScanGrid::covering(config.alignment_step_deg / kRadToDeg);
        std::set<int> beams;
        for (const auto& p : pairs) beams.insert(scan.nearest(p.elevation, p.azimuth));
        for (int b : beams) flagged.push_back(scan.direction(b));
      } else {
        const DetectionMap map = run_detection(bs, pairs, config.detection, std::max(nv, 1e-30), rng);
        flagged = map.flagged_directions();
        k_est = map.total();
        result.detected_counts.push_back(k_est);
        if (k_est < 1) throw Error(ErrorCode::NullInput, "no target detected at BS " + std::to_string(j));
      }
      auto [tx, rx] = design_alignment_beams(flagged, bs, rng);

      EstimateSet set;
      if (config.dualpol) {
        std::vector<PolarizationFactors> pol;
        for (std::size_t k = 0; k < pairs.size(); ++k) pol.push_back(draw_polarization(config.xpd, rng));
        const RxTensor4 z = synthesize_dualpol(bs, pairs, pol, tx, rx, nv, rng);
        set = estimate_dualpol(j, bs, z.data, tx, rx, k_est, grids);
      } else {
        const RxTensor y = synthesize_rx_tensor(bs, pairs, tx, rx, nv, rng);
        set = estimate_parameters(j, bs, y.data, tx, rx, k_est, grids);
      }
      sets.push_back(std::move(set));
      truths.push_back(std::move(pairs));
    }

    // scoring-only matching of per-BS estimates to true UAVs
    for (std::size_t j = 0; j < sets.size(); ++j) {
      const BsSite& bs = scene.sites[j];
      const auto& est = sets[j].targets;
      const auto match = brute_force_match(static_cast<int>(est.size()), k_true, [&](int e, int u) {
        const auto& t = est[static_cast<std::size_t>(e)];
        return (back_project(bs, t.elevation, t.azimuth, t.range) - scene.uavs[static_cast<std::size_t>(u)].position).norm();
      });
      for (std::size_t e = 0; e < est.size(); ++e) {
        const int u = match[e];
        if (u < 0) continue;
        const auto& t = est[e];
        const auto& p = truths[j][static_cast<std::size_t>(u)];
        PairError pe;
        pe.bs_id = static_cast<int>(j);
        pe.uav = u;
        pe.aoa_deg = std::hypot(t.elevation - p.elevation, wrap_angle_diff(t.azimuth, p.azimuth)) * kRadToDeg;
        pe.range = t.range - p.range;
        pe.radial_velocity = t.radial_velocity - p.radial_velocity;
        pe.doppler = t.doppler - p.doppler;
        result.pairs.push_back(pe);
      }
    }

    const SceneFusion fused = fuse_scene(scene.sites, sets, config.fusion, k_true);
    const auto match = brute_force_match(static_cast<int>(fused.tracks.size()), k_true, [&](int t, int u) {
      return (fused.tracks[static_cast<std::size_t>(t)].position - scene.uavs[static_cast<std::size_t>(u)].position).norm();
    });
    for (std::size_t t = 0; t < fused.tracks.size(); ++t) {
      const int u = match[t];
      if (u < 0) continue;
      const auto& tr = fused.tracks[t];
      const auto& uav = scene.uavs[static_cast<std::size_t>(u)];
      TrackError te;
      te.uav = u;
      te.members = static_cast<int>(tr.members.size());
      te.position = (tr.position - uav.position).norm();
      te.position_mean = (tr.mean_position - uav.position).norm();
      if (tr.velocity) te.velocity = (*tr.velocity - uav.velocity).norm();
      if (tr.velocity_wls) te.velocity_wls = (*tr.velocity_wls - uav.velocity).norm();
      result.tracks.push_back(te);
    }
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const int points = config.sweep == SweepAxis::None ? 1 : static_cast<int>(config.sweep_values.size());
  const int total = points * config.trials;

  ExperimentResult out;
  out.trials.resize(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < total; ++i) out.trials[static_cast<std::size_t>(i)] = run_trial(config, i / config.trials, i % config.trials);

  for (int s = 0; s < points; ++s) {
    std::map<std::string, std::vector<double>> per_metric;
    for (int t = 0; t < config.trials; ++t)
      for (const auto& [name, v] : trial_mse(out.trials[static_cast<std::size_t>(s * config.trials + t)]))
        per_metric[name].push_back(v);
    const double sweep = config.sweep == SweepAxis::None ? 0.0 : config.sweep_values[static_cast<std::size_t>(s)];
    for (const auto& name : metric_names()) {
      const auto it = per_metric.find(name);
      if (it == per_metric.end()) continue;
      out.rows.push_back({sweep, name, trimmed_rmse(it->second, config.trim_fraction),
                          static_cast<int>(it->second.size())});
    }
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::ostringstream ss;
  ss << "sweep,metric,value,trials\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.10g", r.sweep);
    ss << buf << ',' << r.metric << ',';
    std::snprintf(buf, sizeof(buf), "%.10g", r.value);
    ss << buf << ',' << r.trials << '\n';
  }
  return ss.str();
}

std::string trials_jsonl(const std::vector<TrialResult>& trials) {
  std::ostringstream ss;
  for (const auto& r : trials) {
    nlohmann::json j;
    j["sweep"] = r.sweep_value;
    j["trial"] = r.trial;
    j["ok"] = r.ok;
    if (!r.ok) j["error"] = r.error;
    nlohmann::json mse;
    for (const auto& [k, v] : trial_mse(r)) mse[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf");
    j["mse"] = mse;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : r.pairs)
      pairs.push_back({{"bs_id", p.bs_id}, {"uav", p.uav}, {"aoa_deg", p.aoa_deg}, {"range", p.range},
                       {"radial_velocity", p.radial_velocity}});
    j["pairs"] = pairs;
    nlohmann::json tracks = nlohmann::json::array();
    for (const auto& t : r.tracks)
      tracks.push_back({{"uav", t.uav},
                        {"members", t.members},
                        {"position", t.position},
                        {"position_mean", t.position_mean},
                        {"velocity", t.velocity ? nlohmann::json(*t.velocity) : nlohmann::json(nullptr)},
                        {"velocity_wls", t.velocity_wls ? nlohmann::json(*t.velocity_wls) : nlohmann::json(nullptr)}});
    j["tracks"] = tracks;
    if (!r.detected_counts.empty()) j["detected_counts"] = r.detected_counts;
    ss << j.dump() << '\n';
  }
  return ss.str();
}

void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& config, const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  io::write_file(dir / "metrics.csv", metrics_csv(result.rows));
  io::write_file(dir / "trials.jsonl", trials_jsonl(result.trials));
  io::write_file(dir / "config.echo.json", config_to_json(config) + "\n");
  nlohmann::json timing = {{"wall_seconds", result.wall_seconds}, {"trials", result.trials.size()}};
  io::write_file(dir / "timing.json", timing.dump(2) + "\n");
}

}  // namespace isac
