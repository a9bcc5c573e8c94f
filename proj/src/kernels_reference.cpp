#include <cmath>
#include <limits>

#include "isac/channel.hpp"
#include "isac/kernels.hpp"

namespace isac::kernels {

RVector grq_trace_scan_reference(const std::vector<CMatrix>& blocks, const CVector& beam,
                                 std::span<const double> psi_grid, double spacing_wavelengths) {
  RVector out(static_cast<Eigen::Index>(psi_grid.size()));
  for (std::size_t i = 0; i < psi_grid.size(); ++i) {
    const GrqPair g = grq_matrices(blocks, beam, psi_grid[i], spacing_wavelengths);
    const CMatrix phi = hermitian_pinv(g.q2) * g.q1;
    out(static_cast<Eigen::Index>(i)) = std::real(phi.trace());
  }
  return out;
}

RVector doppler_scan_reference(const CVector& column, std::span<const double> doppler_grid, double symbol_period) {
  RVector out(static_cast<Eigen::Index>(doppler_grid.size()));
  for (std::size_t i = 0; i < doppler_grid.size(); ++i) {
    const CVector o = doppler_phasor(doppler_grid[i], static_cast<int>(column.size()), symbol_period);
    out(static_cast<Eigen::Index>(i)) = std::norm(column.dot(o));
  }
  return out;
}

RVector aoa_objective_grid_reference(const CVector& beam, const CMatrix& combiner, const CVector& tx, int horizontal,
                                     int vertical, double spacing_wavelengths, std::span<const double> z_grid,
                                     std::span<const double> x_grid) {
  ArrayConfig array;
  array.horizontal = horizontal;
  array.vertical = vertical;
  array.spacing_wavelengths = spacing_wavelengths;
  const std::size_t nx = x_grid.size();
  RVector out(static_cast<Eigen::Index>(z_grid.size() * nx));
  for (std::size_t iz = 0; iz < z_grid.size(); ++iz) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double x = x_grid[ix], z = z_grid[iz];
      double value = std::numeric_limits<double>::quiet_NaN();
      if (x * x + z * z <= 1.0) {
        const CVector b = beam_signature(array, x, z, combiner, tx);
        const double n2 = b.squaredNorm();
        value = n2 > 0.0 ? std::norm(beam.dot(b)) / n2 : 0.0;
      }
      out(static_cast<Eigen::Index>(iz * nx + ix)) = value;
    }
  }
  return out;
}

LossValues position_losses_reference(std::span<const Vec3> points, std::span<const RangeBearing> obs, double beta) {
  const auto count = static_cast<Eigen::Index>(points.size());
  const auto j = static_cast<Eigen::Index>(obs.size());
  LossValues out{RVector(count), RVector(count)};
  for (Eigen::Index i = 0; i < count; ++i) {
    RVector w(j), range_err(j), dir_err(j);
    for (Eigen::Index s = 0; s < j; ++s) {
      const auto& o = obs[static_cast<std::size_t>(s)];
      const Vec3 diff = points[static_cast<std::size_t>(i)] - o.station;
      const double d = std::max(diff.norm(), 1e-9);
      w(s) = 1.0 / std::pow(d, beta);
      range_err(s) = std::abs(d - o.range);
      dir_err(s) = (diff.normalized() - o.direction).norm();
    }
    out.range_loss(i) = w.dot(range_err) / w.sum();
    out.direction_loss(i) = w.dot(dir_err) / w.sum();
  }
  return out;
}

std::vector<bool> pareto_mask_reference(const RVector& f1, const RVector& f2) {
  const Eigen::Index count = f1.size();
  std::vector<bool> keep(static_cast<std::size_t>(count), true);
  for (Eigen::Index a = 0; a < count; ++a)
    for (Eigen::Index b = 0; b < count; ++b)
      if (f1(a) > f1(b) && f2(a) > f2(b)) {
        keep[static_cast<std::size_t>(a)] = false;
        break;
      }
  return keep;
}

}  // namespace isac::kernels
