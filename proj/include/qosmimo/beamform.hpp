#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "qosmimo/channel.hpp"

namespace qosmimo {

/// Largest accepted condition estimate of the column-equilibrated channel matrix.
inline constexpr double kMaxCondition = 1e12;

/// Unit-norm zero-forcing beams for a selected set.
///
/// Column i of `vectors` serves SU `set[i]`. Each beam nulls the estimated
/// channels of the `null_count` other columns of the matrix it was computed
/// from: the co-scheduled SUs of the generating set plus every PR. A beam set
/// restricted to a subset keeps the nulls of its generating set. Beams carry
/// whatever phase the factorization produced; consumers only use magnitudes.
struct BeamSet {
  std::vector<int> set;
  Eigen::MatrixXcd vectors;  // M x |set|
  Eigen::VectorXd gains;     // |hhat_k^H v_k|^2 from the factorization
  int null_count = 0;

  int size() const { return static_cast<int>(set.size()); }
  /// Column of SU k; throws UsageError if k is not a member.
  int position(int k) const;
  /// Keeps only `members` (each must belong to the set), in the given order.
  BeamSet restricted(std::span<const int> members) const;
};

/// Beams for `set` from the estimated channels. Throws SingularityError when the
/// stacked matrix [hhat_S, hhat_R] is rank deficient, UsageError when |S| = 0
/// or M < |S| + L.
BeamSet zf_vectors(const CsiView& csi, std::span<const int> set);

/// Only the effective gains |hhat_k^H v_k|^2, without forming the beams.
Eigen::VectorXd zf_gains(const CsiView& csi, std::span<const int> set);

/// |hhat_k^H v_k|^2 evaluated directly from the beam vector.
double effective_gain(const BeamSet& beams, const CsiView& csi, int k);

}  // namespace qosmimo
