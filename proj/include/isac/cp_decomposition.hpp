#pragma once

#include <cstdint>

#include "isac/tensor_data.hpp"
#include "isac/types.hpp"

namespace isac {

/// Mode-1 unfolding Y_(1)^T of an R x N x M tensor: MN x R with row m*N + n,
/// matching the column order of A3 (.) A2.
CMatrix unfold_mode1(const Tensor3& y);

/// Inverse of unfold_mode1.
Tensor3 refold_mode1(const CMatrix& unfolding, Eigen::Index symbols, Eigen::Index subcarriers);

/// Column-wise Kronecker product: column k is a_k (x) b_k.
CMatrix khatri_rao(const CMatrix& a, const CMatrix& b);

/// Split of the M subcarriers into overlapping windows, first + second = M + 1.
struct SmoothingPlan {
  int first = 0;   // rows kept per block (L1)
  int second = 0;  // number of blocks (L2)

  static SmoothingPlan balanced(int subcarriers);
  int subcarriers() const { return first + second - 1; }
  /// Throws PlanInvalid.
  void validate(int subcarriers) const;
};

/// Generic uniqueness condition: min((L1 - 1) * I2, L2 * I1) >= K.
bool check_uniqueness(const SmoothingPlan& plan, int targets, int second_mode_len, int first_mode_len);

/// Stacks the L2 shifted row windows of the unfolding side by side:
/// (L1 * I2) x (L2 * I1). `second_mode_len` is the row-block size I2.
CMatrix smooth(const CMatrix& unfolding, int second_mode_len, const SmoothingPlan& plan);

struct FactorMatrices {
  CMatrix a1;  // I1 x K, beam-domain signatures (absorbs alpha and the inverse eigvec scale)
  CMatrix a2;  // I2 x K, Doppler phasors up to a column scale
  CMatrix a3;  // M x K, unit-modulus Vandermonde delay phasors
  CVector generators;         // normalized eigenvalues z_k / |z_k|
  CVector eigenvalues;        // raw eigenvalues of U1^+ U2, same order as the columns
  CMatrix eigenvectors;       // M, column k pairs with eigenvalue k
  CMatrix eigenvectors_inv_t;  // M^{-T}

  CMatrix u;  // truncated left singular vectors, (L1 I2) x K
  RVector singular_values;  // leading K values
  CMatrix v;  // truncated right singular vectors, (L2 I1) x K

  Eigen::Index targets() const { return a3.cols(); }
};

struct TruncatedSvd {
  CMatrix u;
  RVector s;
  CMatrix v;
};

/// Leading `rank` singular triplets. Exact for moderate sizes, a seeded
/// randomized range finder for very large matrices.
TruncatedSvd truncated_svd(const CMatrix& a, int rank);

/// Seeded randomized range finder with power iterations followed by an exact
/// SVD of the projected matrix.
TruncatedSvd randomized_svd(const CMatrix& a, int rank, int oversample = 12, int power_iterations = 3,
                            std::uint64_t seed = 0x5eed);

/// Shift-invariance decomposition of a smoothed unfolding.
/// Throws PlanInvalid, RankDeficient, EigSolverFailure or DuplicateGenerators.
FactorMatrices decompose(const CMatrix& smoothed, int targets, const SmoothingPlan& plan);

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kDuplicateGeneratorTolerance = 1e-6;

}  // namespace isac
