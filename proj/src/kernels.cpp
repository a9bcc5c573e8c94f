#include "isac/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "isac/channel.hpp"
#include "isac/error.hpp"

namespace isac::kernels {

std::vector<CMatrix> combiner_blocks(const CMatrix& combiner, int horizontal, int vertical) {
  if (combiner.rows() != static_cast<Eigen::Index>(horizontal) * vertical)
    throw Error(ErrorCode::ShapeMismatch, "combiner rows must equal P*Q");
  const CMatrix fh = combiner.adjoint();
  std::vector<CMatrix> blocks;
  blocks.reserve(static_cast<std::size_t>(vertical));
  for (int q = 0; q < vertical; ++q) blocks.push_back(fh.middleCols(q * horizontal, horizontal));
  return blocks;
}

CMatrix projected_combiner(const std::vector<CMatrix>& blocks, double psi, double spacing_wavelengths) {
  const int vertical = static_cast<int>(blocks.size());
  const CVector av = steering_vertical(psi, vertical, spacing_wavelengths);
  CMatrix m = CMatrix::Zero(blocks.front().rows(), blocks.front().cols());
  for (int q = 0; q < vertical; ++q) m += av(q) * blocks[static_cast<std::size_t>(q)];
  return m;
}

CMatrix hermitian_pinv(const CMatrix& h, double rel_cutoff) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  const RVector& ev = eig.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  RVector inv = RVector::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i)) > rel_cutoff * top) inv(i) = 1.0 / ev(i);
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().adjoint();
}

GrqPair grq_matrices(const std::vector<CMatrix>& blocks, const CVector& beam, double psi,
                     double spacing_wavelengths) {
  const CMatrix m = projected_combiner(blocks, psi, spacing_wavelengths);
  const CVector q = m.adjoint() * beam;
  return {q * q.adjoint(), m.adjoint() * m};
}

RVector grq_trace_scan(const std::vector<CMatrix>& blocks, const CVector& beam, std::span<const double> psi_grid,
                       double spacing_wavelengths) {
  const auto count = static_cast<Eigen::Index>(psi_grid.size());
  RVector out(count);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < count; ++i) {
    const CMatrix m = projected_combiner(blocks, psi_grid[static_cast<std::size_t>(i)], spacing_wavelengths);
    const CVector q = m.adjoint() * beam;
    const CMatrix q2 = m.adjoint() * m;
    out(i) = std::real(q.dot(hermitian_pinv(q2) * q));
  }
  return out;
}

RVector doppler_scan(const CVector& column, std::span<const double> doppler_grid, double symbol_period) {
  const auto count = static_cast<Eigen::Index>(doppler_grid.size());
  const Eigen::Index n = column.size();
  RVector out(count);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < count; ++i) {
    const cd step = phasor(2.0 * kPi * symbol_period * doppler_grid[static_cast<std::size_t>(i)]);
    cd p{1.0, 0.0}, acc{0.0, 0.0};
    for (Eigen::Index k = 0; k < n; ++k) {
      acc += std::conj(column(k)) * p;
      p *= step;
    }
    out(i) = std::norm(acc);
  }
  return out;
}

RVector aoa_objective_grid(const CVector& beam, const CMatrix& combiner, const CVector& tx, int horizontal,
                           int vertical, double spacing_wavelengths, std::span<const double> z_grid,
                           std::span<const double> x_grid) {
  const auto blocks = combiner_blocks(combiner, horizontal, vertical);
  const auto nz = static_cast<Eigen::Index>(z_grid.size());
  const auto nx = static_cast<Eigen::Index>(x_grid.size());
  RVector out(nz * nx);
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index iz = 0; iz < nz; ++iz) {
    const double z = z_grid[static_cast<std::size_t>(iz)];
    // F^H a = M(z) a_p(x) and a^H f = a_p(x)^H f_z with f_z = sum_q conj(a_v[q]) f_q
    const CMatrix m = projected_combiner(blocks, z, spacing_wavelengths);
    const CVector av = steering_vertical(z, vertical, spacing_wavelengths);
    CVector fz = CVector::Zero(horizontal);
    for (int q = 0; q < vertical; ++q) fz += std::conj(av(q)) * tx.segment(q * horizontal, horizontal);
    const CVector mh_beam = m.adjoint() * beam;
    for (Eigen::Index ix = 0; ix < nx; ++ix) {
      const double x = x_grid[static_cast<std::size_t>(ix)];
      if (x * x + z * z > 1.0) {
        out(iz * nx + ix) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const CVector ap = steering_horizontal(x, horizontal, spacing_wavelengths);
      const cd gain = ap.dot(fz);
      const double norm2 = (m * ap).squaredNorm() * std::norm(gain);
      out(iz * nx + ix) = norm2 > 0.0 ? std::norm(mh_beam.dot(ap) * gain) / norm2 : 0.0;
    }
  }
  return out;
}

LossValues position_losses(std::span<const Vec3> points, std::span<const RangeBearing> obs, double beta) {
  const auto count = static_cast<Eigen::Index>(points.size());
  LossValues out{RVector(count), RVector(count)};
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < count; ++i) {
    const Vec3& p = points[static_cast<std::size_t>(i)];
    double wsum = 0.0, fr = 0.0, fd = 0.0;
    for (const auto& o : obs) {
      const Vec3 diff = p - o.station;
      const double d = std::max(diff.norm(), 1e-9);
      const double w = std::pow(d, -beta);
      wsum += w;
      fr += w * std::abs(d - o.range);
      fd += w * (diff / d - o.direction).norm();
    }
    out.range_loss(i) = fr / wsum;
    out.direction_loss(i) = fd / wsum;
  }
  return out;
}

std::vector<bool> pareto_mask(const RVector& f1, const RVector& f2) {
  const auto count = static_cast<std::size_t>(f1.size());
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f1(a) < f1(b); });

  std::vector<bool> keep(count, true);
  double best_before = std::numeric_limits<double>::infinity();  // min f2 among strictly smaller f1
  std::size_t g = 0;
  while (g < count) {
    std::size_t end = g;
    double group_min = std::numeric_limits<double>::infinity();
    while (end < count && f1(order[end]) == f1(order[g])) {
      group_min = std::min(group_min, f2(order[end]));
      ++end;
    }
    for (std::size_t i = g; i < end; ++i)
      if (best_before < f2(order[i])) keep[order[i]] = false;
    best_before = std::min(best_before, group_min);
    g = end;
  }
  return keep;
}

}  // namespace isac::kernels
