#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gaugenet/dates.hpp"
#include "gaugenet/graph.hpp"

namespace gaugenet {

// Daily discharge records for a gauge network: n days by p gauges,
// values in m^3/s. Full panels loaded under the reject policy cover
// consecutive calendar days; panels produced by row filtering or
// splitting only keep dates strictly increasing.
struct StreamflowPanel {
  std::vector<Day> dates;
  std::vector<std::string> gauge_ids;
  Eigen::MatrixXd q;  // n x p

  long n() const { return q.rows(); }
  int p() const { return static_cast<int>(q.cols()); }

  void validate(bool require_consecutive) const;
};

// Per-gauge mean/stdev of log-space flows removed by standardize().
struct TransformStats {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
};

struct DataSplits {
  StreamflowPanel train;
  StreamflowPanel val;
  StreamflowPanel test;
  std::uint64_t seed = 0;
  double train_fraction_of_early = 0.5;
};

// Recipe for a synthetic network with a known conditional-independence
// structure, used as a recovery oracle in tests and demos.
struct SyntheticSpec {
  int p = 0;
  long n = 0;
  std::vector<std::pair<int, int>> true_edges;  // used when non-empty
  double edge_probability = 0.0;                // else Bernoulli edges
  double precision_offdiag_magnitude = 0.4;
  // theta_ii = diagonal_slack + sum_j |theta_ij|; smaller slack means
  // stronger pairwise coupling (must stay > 0 to keep Theta SPD).
  double diagonal_slack = 1.0;
  std::uint64_t seed = 0;
  double mu_min = 1.0, mu_max = 3.0;
  double sigma_min = 0.3, sigma_max = 0.8;
};

enum class MissingPolicy { reject, drop_rows };

// Panel CSV loader. Header `date,<id>,...`; ISO dates; missing cells are
// empty or NaN. Under drop_rows, rows with any missing value are removed
// and the no-gap requirement relaxes to strictly increasing dates.
StreamflowPanel load_panel(const std::string& path, MissingPolicy on_missing);

// y = ln(q + 1), elementwise. Zero flow maps to zero.
Eigen::MatrixXd to_log(const Eigen::MatrixXd& q);
Eigen::MatrixXd to_log(const StreamflowPanel& panel);

// Column-wise affine map to sample mean 0, sample stdev 1 (n-1 form).
// Throws on a zero-variance column.
std::pair<Eigen::MatrixXd, TransformStats> standardize(const Eigen::MatrixXd& y);

struct InvertResult {
  Eigen::MatrixXd q_hat;
  long clamped = 0;  // entries clipped up to 0
};

// q_hat = exp(z_hat * sigma + mu) - 1 per column, clamped at >= 0.
// Throws compute_error when exp overflows.
InvertResult invert_transform(const Eigen::MatrixXd& z_hat,
                              const TransformStats& stats);

// Chronological last ceil(n/3) rows become the test set; the earlier
// floor(2n/3) rows are shuffled with the seed and halved into train/val.
DataSplits split(const StreamflowPanel& panel, std::uint64_t seed,
                 double train_fraction_of_early = 0.5);

// S = Z^T Z / (n - 1).
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& z);

// The generating graph and precision matrix for a spec. The precision is
// built with -magnitude on the spec'd edges, a diagonally dominant
// diagonal, and is then rescaled so its implied covariance has unit
// variances (standardizing a large sample is then asymptotically a no-op).
std::pair<GaugeGraph, Eigen::MatrixXd> synthetic_truth(const SyntheticSpec& spec);

// Draws n days from the zero-mean Gaussian with covariance inv(Theta_true),
// then maps to discharge via q = exp(z * sigma + mu) - 1.
std::pair<StreamflowPanel, GaugeGraph> generate_synthetic_panel(
    const SyntheticSpec& spec);

}  // namespace gaugenet
