#include "qosmimo/channel.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "qosmimo/errors.hpp"

namespace qosmimo {

namespace {

constexpr long kMaxAttempts = 1'000'000;

Geometry::Point uniform_on_disc(double radius, Rng& rng) {
  const double r = radius * std::sqrt(rng.uniform());
  const double phi = 2.0 * M_PI * rng.uniform();
  return {r * std::cos(phi), r * std::sin(phi)};
}

double distance(Geometry::Point a, Geometry::Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void fill_cn(Eigen::Ref<Eigen::MatrixXcd> m, double scale, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = scale * rng.complex_normal();
}

}  // namespace

double slow_fading(double distance_m, double exponent, double ref_gain, double shadow_db) {
  const double d = std::max(distance_m, 1e-3);
  return ref_gain * std::pow(10.0, shadow_db / 10.0) * std::pow(d, -exponent);
}

Geometry sample_geometry(const NetworkConfig& config, Rng& rng) {
  Geometry g;
  if (config.has_fixed_geometry()) {
    g.su_beta = config.fixed_su_beta;
    g.pt_su_beta = config.fixed_pt_su_beta;
    g.pr_beta = config.fixed_pr_beta;
    return g;
  }
  const auto K = static_cast<std::size_t>(config.K);
  const auto L = static_cast<std::size_t>(config.L);
  const Geometry::Point sbs{};
  auto shadow = [&] { return config.shadow_sigma_db * rng.normal(); };
  auto beta = [&](double d) {
    return slow_fading(d, config.pathloss_exp, config.pathloss_ref_gain, shadow());
  };

  g.su_pos.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    long attempts = 0;
    Geometry::Point p;
    do {
      if (++attempts > kMaxAttempts) throw NumericError("sample_geometry: SU placement rejection cap reached");
      p = uniform_on_disc(config.cell_radius_m, rng);
    } while (distance(p, sbs) < config.min_distance_m);
    g.su_pos.push_back(p);
  }
  for (std::size_t l = 0; l < L; ++l) g.pt_pos.push_back(uniform_on_disc(config.cell_radius_m, rng));
  for (std::size_t l = 0; l < L; ++l) g.pr_pos.push_back(uniform_on_disc(config.cell_radius_m, rng));

  g.su_beta.resize(K);
  for (std::size_t k = 0; k < K; ++k) g.su_beta[k] = beta(distance(g.su_pos[k], sbs));
  g.pt_su_beta.resize(L * K);
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t k = 0; k < K; ++k) g.pt_su_beta[l * K + k] = beta(distance(g.pt_pos[l], g.su_pos[k]));
  g.pr_beta.resize(L);
  for (std::size_t l = 0; l < L; ++l) g.pr_beta[l] = beta(distance(g.pr_pos[l], sbs));
  return g;
}

ChannelRealization sample_channels(const Geometry& geometry, int M, Rng& rng) {
  const int K = geometry.K();
  const int L = geometry.L();
  ChannelRealization ch;
  ch.h_su.resize(M, K);
  ch.h_pr.resize(M, L);
  ch.h_pt_su.resize(L, K);
  for (int k = 0; k < K; ++k) fill_cn(ch.h_su.col(k), std::sqrt(geometry.su_beta[static_cast<std::size_t>(k)]), rng);
  for (int l = 0; l < L; ++l) fill_cn(ch.h_pr.col(l), std::sqrt(geometry.pr_beta[static_cast<std::size_t>(l)]), rng);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) ch.h_pt_su(l, k) = std::sqrt(geometry.pt_su(l, k)) * rng.complex_normal();
  return ch;
}

Eigen::VectorXd reverse_interference(const ChannelRealization& channels, double Pp) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(channels.K());
  for (int k = 0; k < channels.K(); ++k)
    for (int l = 0; l < channels.L(); ++l) out(k) += Pp * std::norm(channels.h_pt_su(l, k));
  return out;
}

CsiView corrupt_csi(const ChannelRealization& channels, const NetworkConfig& config, Rng& rng) {
  CsiView csi;
  csi.sigma_delta2 = config.csi_error_su();
  csi.sigma_Delta2 = config.csi_error_pr();
  csi.hhat_su = channels.h_su;
  csi.hhat_pr = channels.h_pr;
  if (csi.sigma_delta2 > 0.0) {
    Eigen::MatrixXcd e(channels.M(), channels.K());
    fill_cn(e, std::sqrt(csi.sigma_delta2), rng);
    csi.hhat_su += e;
  }
  if (csi.sigma_Delta2 > 0.0 && channels.L() > 0) {
    Eigen::MatrixXcd e(channels.M(), channels.L());
    fill_cn(e, std::sqrt(csi.sigma_Delta2), rng);
    csi.hhat_pr += e;
  }
  csi.rev_interference = reverse_interference(channels, config.Pp);
  return csi;
}

namespace {

void write_block(std::ostream& os, const char* name, const Eigen::MatrixXcd& m) {
  os << "# " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << m(i, j).real() << ',' << m(i, j).imag();
    }
    os << '\n';
  }
}

Eigen::MatrixXcd read_block(std::istream& is, const std::string& expected) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("channel CSV: missing block " + expected);
  std::istringstream header(line);
  std::string hash, name;
  Eigen::Index rows = 0, cols = 0;
  header >> hash >> name >> rows >> cols;
  if (hash != "#" || name != expected) throw ConfigError("channel CSV: expected block " + expected + ", got: " + line);
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(is, line)) throw ConfigError("channel CSV: truncated block " + expected);
    std::istringstream row(line);
    for (Eigen::Index j = 0; j < cols; ++j) {
      double re = 0, im = 0;
      char comma = 0;
      if (j) row >> comma;
      row >> re >> comma >> im;
      if (!row) throw ConfigError("channel CSV: malformed row in block " + expected);
      m(i, j) = {re, im};
    }
  }
  return m;
}

}  // namespace

void write_channels_csv(std::ostream& os, const ChannelRealization& channels) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  write_block(os, "h_su", channels.h_su);
  write_block(os, "h_pr", channels.h_pr);
  write_block(os, "h_pt_su", channels.h_pt_su);
  os.precision(old);
}

ChannelRealization read_channels_csv(std::istream& is) {
  ChannelRealization ch;
  ch.h_su = read_block(is, "h_su");
  ch.h_pr = read_block(is, "h_pr");
  ch.h_pt_su = read_block(is, "h_pt_su");
  return ch;
}

}  // namespace qosmimo
