#pragma once

#include <Eigen/Dense>
#include <iosfwd>

#include "qosmimo/model.hpp"
#include "qosmimo/rng.hpp"

namespace qosmimo {

/// True channels for one coherence block. Column k of `h_su` is h_k,
/// column l of `h_pr` is h_l0, entry (l, k) of `h_pt_su` is h_lk.
struct ChannelRealization {
  Eigen::MatrixXcd h_su;     // M x K
  Eigen::MatrixXcd h_pr;     // M x L
  Eigen::MatrixXcd h_pt_su;  // L x K

  int M() const { return static_cast<int>(h_su.rows()); }
  int K() const { return static_cast<int>(h_su.cols()); }
  int L() const { return static_cast<int>(h_pr.cols()); }
};

/// What the SBS knows: noisy estimates plus the measured reverse interference.
struct CsiView {
  Eigen::MatrixXcd hhat_su;  // M x K
  Eigen::MatrixXcd hhat_pr;  // M x L
  double sigma_delta2 = 0.0;
  double sigma_Delta2 = 0.0;
  Eigen::VectorXd rev_interference;  // I_k, watts

  int M() const { return static_cast<int>(hhat_su.rows()); }
  int K() const { return static_cast<int>(hhat_su.cols()); }
  int L() const { return static_cast<int>(hhat_pr.cols()); }
};

/// beta = ref_gain * 10^(shadow_db/10) * d^-exponent. Distances are floored at 1 mm.
double slow_fading(double distance_m, double exponent, double ref_gain, double shadow_db);

/// Random drop, or the configured fixed gains (positions left empty) when present.
Geometry sample_geometry(const NetworkConfig& config, Rng& rng);

ChannelRealization sample_channels(const Geometry& geometry, int M, Rng& rng);

/// I_k = sum_l Pp |h_lk|^2 from the true PT-SU channels.
Eigen::VectorXd reverse_interference(const ChannelRealization& channels, double Pp);

CsiView corrupt_csi(const ChannelRealization& channels, const NetworkConfig& config, Rng& rng);

/// CSV dump: for each block a line "# name rows cols", then one line per
/// matrix row with interleaved re,im values.
void write_channels_csv(std::ostream& os, const ChannelRealization& channels);
ChannelRealization read_channels_csv(std::istream& is);

}  // namespace qosmimo
