#include "isac/detection.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "isac/error.hpp"

namespace isac {

BeamDirection ScanGrid::direction(int beam) const {
  const int i = beam / horizontal_beams;
  const int j = beam % horizontal_beams;
  return {theta0 + i * dtheta, phi0 + j * dphi};
}

int ScanGrid::nearest(double elevation, double azimuth) const {
  const auto snap = [](double v, double start, double step, int count) {
    const int idx = step > 0.0 ? static_cast<int>(std::lround((v - start) / step)) : 0;
    return std::clamp(idx, 0, count - 1);
  };
  return snap(elevation, theta0, dtheta, vertical_beams) * horizontal_beams +
         snap(azimuth, phi0, dphi, horizontal_beams);
}

void ScanGrid::validate() const {
  if (horizontal_beams < 1 || vertical_beams < 1) throw Error(ErrorCode::InvalidConfig, "scan grid needs beams");
  if ((vertical_beams > 1 && !(dtheta > 0.0)) || (horizontal_beams > 1 && !(dphi > 0.0)))
    throw Error(ErrorCode::InvalidConfig, "scan steps must be positive");
}

ScanGrid ScanGrid::covering(double step) {
  ScanGrid g;
  g.dtheta = step;
  g.dphi = step;
  g.theta0 = 0.5 * step;
  g.phi0 = 0.5 * step;
  g.vertical_beams = std::max(1, static_cast<int>(std::ceil(0.5 * kPi / step)));
  g.horizontal_beams = std::max(1, static_cast<int>(std::ceil(kPi / step)));
  return g;
}

int DetectionMap::total() const {
  int k = 0;
  for (std::size_t b = 0; b < flags.size(); ++b)
    if (flags[b]) k += counts[b];
  return k;
}

std::vector<BeamDirection> DetectionMap::flagged_directions() const {
  std::vector<BeamDirection> out;
  for (std::size_t b = 0; b < flags.size(); ++b)
    if (flags[b]) out.push_back(grid.direction(static_cast<int>(b)));
  return out;
}

std::string DetectionMap::to_json() const {
  nlohmann::json j;
  j["grid"] = {{"theta0", grid.theta0}, {"phi0", grid.phi0}, {"dtheta", grid.dtheta}, {"dphi", grid.dphi},
               {"horizontal_beams", grid.horizontal_beams}, {"vertical_beams", grid.vertical_beams}};
  nlohmann::json beams = nlohmann::json::array();
  for (std::size_t b = 0; b < flags.size(); ++b) {
    if (!flags[b]) continue;
    const auto d = grid.direction(static_cast<int>(b));
    beams.push_back({{"beam", b}, {"theta", d.elevation}, {"phi", d.azimuth}, {"count", counts[b]}});
  }
  j["flagged"] = beams;
  j["total"] = total();
  return j.dump();
}

double energy_threshold(std::size_t samples, double pfa) {
  if (samples == 0 || !(pfa > 0.0) || !(pfa < 1.0))
    throw Error(ErrorCode::InvalidConfig, "threshold needs samples > 0 and pfa in (0, 1)");
  return boost::math::gamma_q_inv(static_cast<double>(samples), pfa);
}

bool detect_beam(std::span<const cd> samples, double noise_variance, double pfa) {
  if (samples.empty()) return false;
  if (!(noise_variance > 0.0)) throw Error(ErrorCode::InvalidConfig, "noise variance must be positive");
  double energy = 0.0;
  for (const cd& s : samples) energy += std::norm(s);
  return energy / noise_variance > energy_threshold(samples.size(), pfa);
}

std::vector<cd> scan_beam_samples(const BsSite& bs, std::span<const PairTruth> pairs, const BeamDirection& beam,
                                  double noise_variance, std::mt19937_64& rng) {
  const int l = bs.array.elements();
  const CVector a = steering_upa(std::sin(beam.elevation) * std::cos(beam.azimuth), std::cos(beam.elevation), bs.array);
  const CVector f_tx = std::sqrt(bs.tx_power / l) * a;
  const CVector f_rx = a / std::sqrt(static_cast<double>(l));

  std::vector<cd> out(static_cast<std::size_t>(bs.subcarriers) * bs.symbols, cd{0.0, 0.0});
  for (const auto& p : pairs) {
    const CVector ak = steering_upa(p.dir_cos_x, p.dir_cos_z, bs.array);
    const cd gain = p.alpha * f_rx.dot(ak) * ak.dot(f_tx);
    const CVector o = doppler_phasor(p.doppler, bs.symbols, bs.symbol_period);
    const CVector g = delay_phasor(p.delay, bs.subcarriers, bs.subcarrier_spacing);
    for (int m = 0; m < bs.subcarriers; ++m)
      for (int n = 0; n < bs.symbols; ++n) out[static_cast<std::size_t>(m) * bs.symbols + n] += gain * g(m) * o(n);
  }
  if (noise_variance > 0.0) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * noise_variance));
    for (auto& s : out) s += cd{normal(rng), normal(rng)};
  }
  return out;
}

std::vector<double> mdl_scores(const RVector& ev, std::size_t samples) {
  const Eigen::Index r = ev.size();
  const double ns = static_cast<double>(samples);
  std::vector<double> scores;
  for (Eigen::Index k = 1; k < r; ++k) {
    const Eigen::Index tail = r - k;
    double log_sum = 0.0, sum = 0.0;
    for (Eigen::Index i = k; i < r; ++i) {
      const double v = std::max(ev(i), 1e-300);
      log_sum += std::log(v);
      sum += v;
    }
    const double log_ratio = log_sum / tail - std::log(sum / tail);
    const double kk = static_cast<double>(k);
    scores.push_back(-static_cast<double>(tail) * ns * log_ratio + 0.5 * kk * (2.0 * r - kk) * std::log(ns));
  }
  return scores;
}

int estimate_count_mdl(const Tensor3& y) {
  const Eigen::Index r = y.dim(0);
  if (r < 2) throw Error(ErrorCode::InvalidConfig, "MDL needs at least two RF chains");
  const Eigen::Index samples = y.dim(1) * y.dim(2);
  Eigen::Map<const CMatrix> data(y.data().data(), samples, r);  // row-major R x (NM) viewed as (NM) x R
  const CMatrix cov = data.transpose() * data.conjugate() / static_cast<double>(samples);
  if (!cov.allFinite()) throw Error(ErrorCode::RankDeficient, "sample covariance is not finite");
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov, Eigen::EigenvaluesOnly);
  const RVector ev = eig.eigenvalues().reverse();
  const auto scores = mdl_scores(ev, static_cast<std::size_t>(samples));
  return static_cast<int>(std::min_element(scores.begin(), scores.end()) - scores.begin()) + 1;
}

DetectionMap run_detection(const BsSite& bs, std::span<const PairTruth> pairs, const DetectionConfig& config,
                           double noise_variance, std::mt19937_64& rng) {
  DetectionMap map;
  map.grid = ScanGrid::covering(config.scan_step);
  map.grid.validate();
  const int beams = map.grid.beams();
  map.flags.assign(static_cast<std::size_t>(beams), 0);
  map.counts.assign(static_cast<std::size_t>(beams), 0);

  for (int b = 0; b < beams; ++b) {
    const auto samples = scan_beam_samples(bs, pairs, map.grid.direction(b), noise_variance, rng);
    if (!detect_beam(samples, noise_variance, config.pfa)) continue;
    map.flags[static_cast<std::size_t>(b)] = 1;
    const BeamDirection dir = map.grid.direction(b);
    auto [tx, rx] = design_alignment_beams(std::span<const BeamDirection>(&dir, 1), bs, rng);
    const RxTensor y = synthesize_rx_tensor(bs, pairs, tx, rx, noise_variance, rng);
    map.counts[static_cast<std::size_t>(b)] = estimate_count_mdl(y.data);
  }
  return map;
}

}  // namespace isac
