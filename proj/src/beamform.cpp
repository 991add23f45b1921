#include "qosmimo/beamform.hpp"

#include <cmath>
#include <string>

#include "qosmimo/errors.hpp"
#include "qosmimo/kernels.hpp"

namespace qosmimo {

namespace {

// Pivoted QR of the column-equilibrated stack G D^-1 = Q R P^T. In this
// basis G (G^H G)^-1 = Q R^-H P^T D^-1, so every quantity we need comes from
// R^-1 and, for the beams themselves, the thin Q.
struct ZfFactor {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr;
  Eigen::MatrixXcd r_inv;
  Eigen::VectorXd col_norm;
  std::vector<Eigen::Index> slot;  // slot[j] = pivoted position of original column j
};

ZfFactor factor(const CsiView& csi, std::span<const int> set) {
  const Eigen::Index s = static_cast<Eigen::Index>(set.size());
  const Eigen::Index L = csi.L();
  const Eigen::Index n = s + L;
  const Eigen::Index M = csi.M();
  if (s == 0) throw UsageError("zf_vectors: empty set");
  if (M < n) {
    throw UsageError("zf_vectors: M=" + std::to_string(M) + " < |S|+L=" + std::to_string(n));
  }

  ZfFactor f;
  f.col_norm.resize(n);
  Eigen::MatrixXcd g(M, n);
  for (Eigen::Index i = 0; i < s; ++i) {
    const int k = set[static_cast<std::size_t>(i)];
    if (k < 0 || k >= csi.K()) throw UsageError("zf_vectors: SU index " + std::to_string(k) + " out of range");
    g.col(i) = csi.hhat_su.col(k);
  }
  if (L > 0) g.rightCols(L) = csi.hhat_pr;

  const std::vector<int> members(set.begin(), set.end());
  for (Eigen::Index j = 0; j < n; ++j) {
    const double nrm = g.col(j).norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw SingularityError(members, INFINITY);
    f.col_norm(j) = nrm;
    g.col(j) /= nrm;
  }

  f.qr.compute(g);
  const Eigen::MatrixXcd r = f.qr.matrixR().topLeftCorner(n, n).triangularView<Eigen::Upper>();
  f.r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXcd::Identity(n, n));
  // ||R||_F ||R^-1||_F bounds the 2-norm condition from above (within a factor n).
  const double cond = r.norm() * f.r_inv.norm();
  if (!std::isfinite(cond) || cond > kMaxCondition) throw SingularityError(members, cond);

  f.slot.assign(static_cast<std::size_t>(n), 0);
  const auto& perm = f.qr.colsPermutation().indices();
  for (Eigen::Index c = 0; c < n; ++c) f.slot[static_cast<std::size_t>(perm(c))] = c;
  return f;
}

}  // namespace

int BeamSet::position(int k) const {
  for (std::size_t i = 0; i < set.size(); ++i)
    if (set[i] == k) return static_cast<int>(i);
  throw UsageError("SU " + std::to_string(k) + " is not in the beam set");
}

BeamSet BeamSet::restricted(std::span<const int> members) const {
  BeamSet out;
  out.null_count = null_count;
  out.set.assign(members.begin(), members.end());
  out.vectors.resize(vectors.rows(), static_cast<Eigen::Index>(members.size()));
  out.gains.resize(static_cast<Eigen::Index>(members.size()));
  for (std::size_t i = 0; i < members.size(); ++i) {
    const int p = position(members[i]);
    out.vectors.col(static_cast<Eigen::Index>(i)) = vectors.col(p);
    out.gains(static_cast<Eigen::Index>(i)) = gains(p);
  }
  return out;
}

Eigen::VectorXd zf_gains(const CsiView& csi, std::span<const int> set) {
  const ZfFactor f = factor(csi, set);
  const Eigen::Index s = static_cast<Eigen::Index>(set.size());
  Eigen::VectorXd gains(s);
  // hhat_k^H w_k = 1, so |hhat_k^H v_k|^2 = 1 / ||w_k||^2 with ||w_k|| = ||row of R^-1|| / d_k.
  for (Eigen::Index i = 0; i < s; ++i) {
    const double row = f.r_inv.row(f.slot[static_cast<std::size_t>(i)]).squaredNorm();
    gains(i) = f.col_norm(i) * f.col_norm(i) / row;
  }
  return gains;
}

BeamSet zf_vectors(const CsiView& csi, std::span<const int> set) {
  const ZfFactor f = factor(csi, set);
  const Eigen::Index s = static_cast<Eigen::Index>(set.size());
  const Eigen::Index n = f.r_inv.rows();

  Eigen::MatrixXcd q = f.qr.householderQ() * Eigen::MatrixXcd::Identity(csi.M(), n);
  const Eigen::MatrixXcd w = q * f.r_inv.adjoint();

  BeamSet beams;
  beams.set.assign(set.begin(), set.end());
  beams.null_count = static_cast<int>(n - 1);
  beams.vectors.resize(csi.M(), s);
  beams.gains.resize(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto c = f.slot[static_cast<std::size_t>(i)];
    const double nrm = w.col(c).norm();
    beams.vectors.col(i) = w.col(c) / nrm;
    beams.gains(i) = f.col_norm(i) * f.col_norm(i) / (nrm * nrm);
  }
  return beams;
}

double effective_gain(const BeamSet& beams, const CsiView& csi, int k) {
  const int p = beams.position(k);
  return kernels::dot_abs2(csi.hhat_su.col(k).data(), beams.vectors.col(p).data(),
                           static_cast<std::size_t>(csi.M()));
}

}  // namespace qosmimo
