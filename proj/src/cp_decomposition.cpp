#include "isac/cp_decomposition.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "isac/error.hpp"

namespace isac {

CMatrix unfold_mode1(const Tensor3& y) {
  const Eigen::Index r = y.dim(0), n = y.dim(1), m = y.dim(2);
  CMatrix out(m * n, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index s = 0; s < n; ++s)
      for (Eigen::Index k = 0; k < m; ++k) out(k * n + s, i) = y(i, s, k);
  return out;
}

Tensor3 refold_mode1(const CMatrix& unfolding, Eigen::Index symbols, Eigen::Index subcarriers) {
  if (unfolding.rows() != symbols * subcarriers)
    throw Error(ErrorCode::ShapeMismatch, "unfolding rows must equal N*M");
  const Eigen::Index r = unfolding.cols();
  Tensor3 y({r, symbols, subcarriers});
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index s = 0; s < symbols; ++s)
      for (Eigen::Index k = 0; k < subcarriers; ++k) y(i, s, k) = unfolding(k * symbols + s, i);
  return y;
}

CMatrix khatri_rao(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::ShapeMismatch, "Khatri-Rao needs equal column counts");
  CMatrix out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index k = 0; k < a.cols(); ++k)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out.col(k).segment(i * b.rows(), b.rows()) = a(i, k) * b.col(k);
  return out;
}

SmoothingPlan SmoothingPlan::balanced(int subcarriers) {
  const int first = (subcarriers + 2) / 2;  // ceil((M + 1) / 2)
  return {first, subcarriers + 1 - first};
}

void SmoothingPlan::validate(int m) const {
  if (first < 2 || second < 1 || first + second != m + 1)
    throw Error(ErrorCode::PlanInvalid, "smoothing plan needs L1 >= 2, L2 >= 1 and L1 + L2 = M + 1 (L1=" +
                                            std::to_string(first) + ", L2=" + std::to_string(second) +
                                            ", M=" + std::to_string(m) + ")");
}

bool check_uniqueness(const SmoothingPlan& plan, int targets, int second_mode_len, int first_mode_len) {
  const long a = static_cast<long>(plan.first - 1) * second_mode_len;
  const long b = static_cast<long>(plan.second) * first_mode_len;
  return std::min(a, b) >= targets;
}

CMatrix smooth(const CMatrix& unfolding, int second_mode_len, const SmoothingPlan& plan) {
  if (second_mode_len < 1 || unfolding.rows() % second_mode_len != 0)
    throw Error(ErrorCode::PlanInvalid, "unfolding rows are not a multiple of the block size");
  const int m = static_cast<int>(unfolding.rows() / second_mode_len);
  plan.validate(m);
  const Eigen::Index n = second_mode_len;
  const Eigen::Index r = unfolding.cols();
  CMatrix out(plan.first * n, plan.second * r);
  // block l is rows [l N, (l + L1) N) of the unfolding; a gather, not a product with J_l (x) I_N
  for (int l = 0; l < plan.second; ++l) out.middleCols(l * r, r) = unfolding.middleRows(l * n, plan.first * n);
  return out;
}

TruncatedSvd truncated_svd(const CMatrix& a, int rank) {
  TruncatedSvd out;
  const Eigen::Index small = std::min(a.rows(), a.cols());
  if (rank > small) throw Error(ErrorCode::RankDeficient, "requested rank exceeds matrix dimensions");

  constexpr double kExactLimit = 4e6;  // entries
  if (static_cast<double>(a.rows()) * static_cast<double>(a.cols()) <= kExactLimit) {
    Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU().leftCols(rank);
    out.s = svd.singularValues().head(rank);
    out.v = svd.matrixV().leftCols(rank);
    return out;
  }

  return randomized_svd(a, rank);
}

TruncatedSvd randomized_svd(const CMatrix& a, int rank, int oversample, int power_iterations, std::uint64_t seed) {
  TruncatedSvd out;
  const Eigen::Index small = std::min(a.rows(), a.cols());
  if (rank > small) throw Error(ErrorCode::RankDeficient, "requested rank exceeds matrix dimensions");
  const Eigen::Index sketch = std::min<Eigen::Index>(small, rank + oversample);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix omega(a.cols(), sketch);
  for (Eigen::Index j = 0; j < sketch; ++j)
    for (Eigen::Index i = 0; i < a.cols(); ++i) omega(i, j) = cd{normal(rng), normal(rng)};

  CMatrix q = Eigen::HouseholderQR<CMatrix>(a * omega).householderQ() * CMatrix::Identity(a.rows(), sketch);
  for (int it = 0; it < power_iterations; ++it) {
    CMatrix z = Eigen::HouseholderQR<CMatrix>(a.adjoint() * q).householderQ() * CMatrix::Identity(a.cols(), sketch);
    q = Eigen::HouseholderQR<CMatrix>(a * z).householderQ() * CMatrix::Identity(a.rows(), sketch);
  }
  const CMatrix b = q.adjoint() * a;
  Eigen::BDCSVD<CMatrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.u = q * svd.matrixU().leftCols(rank);
  out.s = svd.singularValues().head(rank);
  out.v = svd.matrixV().leftCols(rank);
  return out;
}

FactorMatrices decompose(const CMatrix& smoothed, int targets, const SmoothingPlan& plan) {
  if (targets < 1) throw Error(ErrorCode::NullInput, "need at least one target");
  if (smoothed.rows() % plan.first != 0 || smoothed.cols() % plan.second != 0)
    throw Error(ErrorCode::PlanInvalid, "smoothed matrix shape does not match the plan");
  const int n = static_cast<int>(smoothed.rows() / plan.first);   // I2
  const int r = static_cast<int>(smoothed.cols() / plan.second);  // I1
  const int m = plan.subcarriers();
  if (!check_uniqueness(plan, targets, n, r))
    throw Error(ErrorCode::PlanInvalid, "uniqueness condition min((L1-1)I2, L2 I1) >= K violated");
  if (!smoothed.allFinite()) throw Error(ErrorCode::RankDeficient, "non-finite input");

  FactorMatrices f;
  TruncatedSvd svd = truncated_svd(smoothed, targets);
  const double s1 = svd.s(0);
  const double sk = svd.s(targets - 1);
  if (!(s1 > 0.0) || !(sk > kRankTolerance * s1))
    throw Error(ErrorCode::RankDeficient, "sigma_K / sigma_1 below tolerance");
  f.u = std::move(svd.u);
  f.singular_values = std::move(svd.s);
  f.v = std::move(svd.v);

  const Eigen::Index shift_rows = static_cast<Eigen::Index>(plan.first - 1) * n;
  const CMatrix u1 = f.u.topRows(shift_rows);
  const CMatrix u2 = f.u.middleRows(n, shift_rows);
  const CMatrix xi = u1.completeOrthogonalDecomposition().solve(u2);

  Eigen::ComplexEigenSolver<CMatrix> eig(xi, true);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::EigSolverFailure, "EVD of U1^+ U2 did not converge");
  f.eigenvalues = eig.eigenvalues();
  f.eigenvectors = eig.eigenvectors();

  f.generators.resize(targets);
  for (int k = 0; k < targets; ++k) {
    const double mag = std::abs(f.eigenvalues(k));
    if (!(mag > 0.0) || !std::isfinite(mag)) throw Error(ErrorCode::EigSolverFailure, "zero or non-finite eigenvalue");
    f.generators(k) = f.eigenvalues(k) / mag;
  }
  for (int a = 0; a < targets; ++a)
    for (int b = a + 1; b < targets; ++b)
      if (std::abs(f.generators(a) - f.generators(b)) < kDuplicateGeneratorTolerance)
        throw Error(ErrorCode::DuplicateGenerators, "two targets share a delay generator");

  Eigen::FullPivLU<CMatrix> lu(f.eigenvectors);
  if (!lu.isInvertible()) throw Error(ErrorCode::EigSolverFailure, "eigenvector matrix is singular");
  f.eigenvectors_inv_t = lu.inverse().transpose();

  f.a3.resize(m, targets);
  for (int k = 0; k < targets; ++k) {
    cd p{1.0, 0.0};
    for (int i = 0; i < m; ++i) {
      f.a3(i, k) = p;
      p *= f.generators(k);
    }
  }

  // a2_k = (a^(L1)^H / L1 (x) I_N) U m_k
  const CMatrix um = f.u * f.eigenvectors;
  f.a2 = CMatrix::Zero(n, targets);
  for (int k = 0; k < targets; ++k)
    for (int i = 0; i < plan.first; ++i) f.a2.col(k) += std::conj(f.a3(i, k)) * um.col(k).segment(i * n, n);
  f.a2 /= static_cast<double>(plan.first);

  // a1_k = (a^(L2)^H / L2 (x) I_R) V^* Sigma p_k
  const CMatrix w = f.v.conjugate() * f.singular_values.cast<cd>().asDiagonal() * f.eigenvectors_inv_t;
  f.a1 = CMatrix::Zero(r, targets);
  for (int k = 0; k < targets; ++k)
    for (int l = 0; l < plan.second; ++l) f.a1.col(k) += std::conj(f.a3(l, k)) * w.col(k).segment(l * r, r);
  f.a1 /= static_cast<double>(plan.second);

  return f;
}

}  // namespace isac
