#pragma once

#include <span>
#include <vector>

#include "isac/types.hpp"

namespace isac::kernels {

// Grid-scan kernels shared by estimation and fusion. Each has an OpenMP
// version and a plain serial reference that evaluates the textbook form.

/// Per-vertical-index blocks of F_RX^H: block q is R x P and holds the
/// columns of F_RX^H for antennas q*P .. q*P+P-1.
std::vector<CMatrix> combiner_blocks(const CMatrix& combiner, int horizontal, int vertical);

/// M(psi) = F_RX^H [a_q(psi) (x) I_P] = sum_q a_q(psi)[q] * block_q.
CMatrix projected_combiner(const std::vector<CMatrix>& blocks, double psi, double spacing_wavelengths);

/// Hermitian pseudo-inverse via eigendecomposition with a relative cutoff.
CMatrix hermitian_pinv(const CMatrix& h, double rel_cutoff = 1e-10);

/// Q1(psi) = M^H b b^H M and Q2(psi) = M^H M.
struct GrqPair {
  CMatrix q1;
  CMatrix q2;
};
GrqPair grq_matrices(const std::vector<CMatrix>& blocks, const CVector& beam, double psi, double spacing_wavelengths);

/// Tr(Q2^+ Q1) over the psi grid via the rank-one form q^H Q2^+ q.
RVector grq_trace_scan(const std::vector<CMatrix>& blocks, const CVector& beam, std::span<const double> psi_grid,
                       double spacing_wavelengths);
/// Same objective with Phi = Q2^+ Q1 formed explicitly and its trace taken.
RVector grq_trace_scan_reference(const std::vector<CMatrix>& blocks, const CVector& beam,
                                 std::span<const double> psi_grid, double spacing_wavelengths);

/// |o^H o(f)|^2 over a Doppler grid.
RVector doppler_scan(const CVector& column, std::span<const double> doppler_grid, double symbol_period);
RVector doppler_scan_reference(const CVector& column, std::span<const double> doppler_grid, double symbol_period);

/// |b^H b(x, z)|^2 / ||b(x, z)||^2 with b(x, z) = F^H a a^H f_TX, row-major
/// over (z index, x index). NaN where x^2 + z^2 > 1.
RVector aoa_objective_grid(const CVector& beam, const CMatrix& combiner, const CVector& tx, int horizontal,
                           int vertical, double spacing_wavelengths, std::span<const double> z_grid,
                           std::span<const double> x_grid);
RVector aoa_objective_grid_reference(const CVector& beam, const CMatrix& combiner, const CVector& tx, int horizontal,
                                     int vertical, double spacing_wavelengths, std::span<const double> z_grid,
                                     std::span<const double> x_grid);

/// One station's view of a target for the position objectives.
struct RangeBearing {
  Vec3 station = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit radial direction estimate
  double range = 0.0;
};

/// Range loss f_r and direction loss f_d at each candidate point, weights
/// 1 / d(p)^beta evaluated at the candidate.
struct LossValues {
  RVector range_loss;
  RVector direction_loss;
};
LossValues position_losses(std::span<const Vec3> points, std::span<const RangeBearing> obs, double beta);
LossValues position_losses_reference(std::span<const Vec3> points, std::span<const RangeBearing> obs, double beta);

/// Non-dominated mask under strict dominance (a point is dropped only if some
/// other point is strictly smaller in both objectives). Sort-and-sweep.
std::vector<bool> pareto_mask(const RVector& f1, const RVector& f2);
/// Quadratic all-pairs version.
std::vector<bool> pareto_mask_reference(const RVector& f1, const RVector& f2);

}  // namespace isac::kernels
