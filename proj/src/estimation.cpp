#include "isac/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "isac/error.hpp"
#include "isac/kernels.hpp"

namespace isac {

namespace {

int argmax(const RVector& v) {
  int best = -1;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isnan(v(i))) continue;
    if (best < 0 || v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

std::vector<double> SearchGrid1D::values() const {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = value(i);
  return out;
}

void SearchGrid1D::validate() const {
  if (points < 1 || (points > 1 && !(hi > lo))) throw Error(ErrorCode::InvalidConfig, "invalid search grid");
}

SearchGrids SearchGrids::defaults(const BsSite& bs, double max_speed) {
  const double fmax = 1.5 * 2.0 * max_speed / bs.wavelength();
  return {{-fmax, fmax, 601}, {0.0, 0.999, 512}, {-0.999, 0.999, 512}};
}

DelayRange delay_range(cd generator, double subcarrier_spacing) {
  double angle = std::arg(generator);  // (-pi, pi]
  if (angle > 0.0) angle -= 2.0 * kPi;
  const double tau = angle / (-2.0 * kPi * subcarrier_spacing);
  return {tau, tau * kSpeedOfLight / 2.0};
}

DopplerEstimate doppler_velocity(const CVector& column, const SearchGrid1D& grid, double symbol_period,
                                 double wavelength) {
  const auto values = grid.values();
  const RVector scores = kernels::doppler_scan(column, values, symbol_period);
  const int idx = std::max(argmax(scores), 0);
  const double f = values[static_cast<std::size_t>(idx)];
  return {f, f * wavelength / 2.0, idx};
}

std::pair<double, double> angles_from_virtual(double psi, double theta_virtual) {
  const double elevation = std::acos(std::clamp(psi, -1.0, 1.0));
  const double s = std::sin(elevation);
  if (std::abs(s) < 1e-6) throw Error(ErrorCode::DegenerateElevation, "azimuth undefined at the array normal");
  return {elevation, std::acos(std::clamp(theta_virtual / s, -1.0, 1.0))};
}

AoaEstimate aoa_grq(const CVector& beam, const CMatrix& combiner, const ArrayConfig& array,
                    const SearchGrids& grids) {
  if (beam.size() != combiner.cols()) throw Error(ErrorCode::ShapeMismatch, "beam vector length must equal R");
  if (beam.squaredNorm() == 0.0) throw Error(ErrorCode::NullInput, "all-zero beam vector");
  const auto blocks = kernels::combiner_blocks(combiner, array.horizontal, array.vertical);
  const auto psi_values = grids.psi.values();
  const RVector traces = kernels::grq_trace_scan(blocks, beam, psi_values, array.spacing_wavelengths);

  AoaEstimate out;
  out.psi_index = std::max(argmax(traces), 0);
  out.psi = psi_values[static_cast<std::size_t>(out.psi_index)];
  out.grid_exhausted = out.psi_index == 0 || out.psi_index == grids.psi.points - 1;

  const auto g = kernels::grq_matrices(blocks, beam, out.psi, array.spacing_wavelengths);
  const CMatrix phi = kernels::hermitian_pinv(g.q2) * g.q1;
  Eigen::ComplexEigenSolver<CMatrix> eig(phi, true);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::EigSolverFailure, "EVD of Phi did not converge");
  Eigen::Index top = 0;
  eig.eigenvalues().cwiseAbs().maxCoeff(&top);
  CVector ap = eig.eigenvectors().col(top);
  if (std::abs(ap(0)) == 0.0) throw Error(ErrorCode::SingularScale, "principal eigenvector has a zero first entry");
  ap /= ap(0);

  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grids.theta.points; ++i) {
    const double x = grids.theta.value(i);
    const double err = (steering_horizontal(x, array.horizontal, array.spacing_wavelengths) - ap).squaredNorm();
    if (err < best) {
      best = err;
      out.theta_index = i;
    }
  }
  out.theta_virtual = grids.theta.value(out.theta_index);
  std::tie(out.elevation, out.azimuth) = angles_from_virtual(out.psi, out.theta_virtual);
  return out;
}

AoaEstimate aoa_2d_oracle(const CVector& beam, const CMatrix& combiner, const CVector& tx,
                          const ArrayConfig& array, const SearchGrids& grids) {
  if (beam.squaredNorm() == 0.0) throw Error(ErrorCode::NullInput, "all-zero beam vector");
  const auto z = grids.psi.values();
  const auto x = grids.theta.values();
  const RVector obj = kernels::aoa_objective_grid(beam, combiner, tx, array.horizontal, array.vertical,
                                                  array.spacing_wavelengths, z, x);
  const int idx = argmax(obj);
  if (idx < 0) throw Error(ErrorCode::NullInput, "no admissible grid point");
  AoaEstimate out;
  out.psi_index = idx / grids.theta.points;
  out.theta_index = idx % grids.theta.points;
  out.psi = z[static_cast<std::size_t>(out.psi_index)];
  out.theta_virtual = x[static_cast<std::size_t>(out.theta_index)];
  out.grid_exhausted = out.psi_index == 0 || out.psi_index == grids.psi.points - 1;
  std::tie(out.elevation, out.azimuth) = angles_from_virtual(out.psi, out.theta_virtual);
  return out;
}

ScaleResolution resolve_scaling_and_alpha(const CVector& beam_hat, const CVector& doppler_hat,
                                          const CVector& delay_hat, const CVector& beam_model,
                                          const CVector& doppler_model, const CVector& delay_model) {
  const auto project = [](const CVector& model, const CVector& est) {
    const double n2 = model.squaredNorm();
    if (!(n2 > 0.0)) throw Error(ErrorCode::SingularScale, "zero model vector");
    return model.dot(est) / n2;  // model^+ est
  };
  ScaleResolution s;
  s.lambda1 = project(beam_model, beam_hat);
  s.lambda2 = project(doppler_model, doppler_hat);
  if (std::abs(s.lambda1) < kSingularScale || std::abs(s.lambda2) < kSingularScale)
    throw Error(ErrorCode::SingularScale, "scaling factor below tolerance");
  s.lambda3 = 1.0 / (s.lambda1 * s.lambda2);
  s.alpha = project(CVector(s.lambda3 * delay_model), delay_hat);
  return s;
}

std::vector<TargetEstimate> estimate_from_factors(const BsSite& bs, const CMatrix& beams, const CMatrix& dopplers,
                                                  const CVector& generators, const CMatrix& combiner,
                                                  const CVector& tx, const SearchGrids& grids) {
  const Eigen::Index k_count = generators.size();
  std::vector<TargetEstimate> out(static_cast<std::size_t>(k_count));
  for (Eigen::Index k = 0; k < k_count; ++k) {
    TargetEstimate& t = out[static_cast<std::size_t>(k)];
    const auto dr = delay_range(generators(k), bs.subcarrier_spacing);
    t.delay = dr.delay;
    t.range = dr.range;

    const CVector o_hat = dopplers.col(k);
    const auto dv = doppler_velocity(o_hat, grids.doppler, bs.symbol_period, bs.wavelength());
    t.doppler = dv.doppler;
    t.radial_velocity = dv.radial_velocity;
    t.doppler_index = dv.index;

    const CVector b_hat = beams.col(k);
    const auto aoa = aoa_grq(b_hat, combiner, bs.array, grids);
    t.psi = aoa.psi;
    t.theta_virtual = aoa.theta_virtual;
    t.elevation = aoa.elevation;
    t.azimuth = aoa.azimuth;
    t.psi_index = aoa.psi_index;
    t.theta_index = aoa.theta_index;
    t.grid_exhausted = aoa.grid_exhausted;

    CVector g_hat(bs.subcarriers);
    cd p{1.0, 0.0};
    for (int m = 0; m < bs.subcarriers; ++m) {
      g_hat(m) = p;
      p *= generators(k);
    }
    const auto s = resolve_scaling_and_alpha(
        b_hat, o_hat, g_hat, beam_signature(bs.array, t.theta_virtual, t.psi, combiner, tx),
        doppler_phasor(t.doppler, bs.symbols, bs.symbol_period),
        delay_phasor(t.delay, bs.subcarriers, bs.subcarrier_spacing));
    t.lambda1 = s.lambda1;
    t.lambda2 = s.lambda2;
    t.lambda3 = s.lambda3;
    t.alpha = s.alpha;
  }
  return out;
}

EstimateSet estimate_parameters(int bs_id, const BsSite& bs, const Tensor3& y, const Beamformer& tx,
                                const Beamformer& rx, int targets, const SearchGrids& grids,
                                std::optional<SmoothingPlan> plan) {
  if (y.dim(0) != bs.array.rf_chains || y.dim(1) != bs.symbols || y.dim(2) != bs.subcarriers)
    throw Error(ErrorCode::ShapeMismatch, "echo tensor shape disagrees with the BS");
  const SmoothingPlan p = plan.value_or(SmoothingPlan::balanced(bs.subcarriers));
  const CMatrix ys = smooth(unfold_mode1(y), bs.symbols, p);
  const FactorMatrices f = decompose(ys, targets, p);
  EstimateSet out;
  out.bs_id = bs_id;
  out.targets = estimate_from_factors(bs, f.a1, f.a2, f.generators, rx.combined(), tx.equivalent(), grids);
  return out;
}

}  // namespace isac
