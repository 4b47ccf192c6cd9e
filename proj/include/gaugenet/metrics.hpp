#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gaugenet/graph.hpp"
#include "gaugenet/panel.hpp"

namespace gaugenet {

// Squared Pearson correlation between observed and predicted series.
// Throws when either series is constant.
double r2(const Eigen::VectorXd& obs, const Eigen::VectorXd& pred);

// Nash-Sutcliffe efficiency: 1 - SSE / SST. 1 is perfect, 0 matches the
// mean predictor, unbounded below. Throws on constant obs.
double nse(const Eigen::VectorXd& obs, const Eigen::VectorXd& pred);

struct ScoreReport {
  std::vector<double> per_gauge_r2;   // length q, 0 where not computable
  std::vector<double> per_gauge_nse;  // length q
  double score_val = 0.0;
  double error_val = 0.0;
  double gamma = 0.0;
  std::vector<int> degenerate_targets;  // constant predictions, scored 0
};

// Conditional goodness-of-fit over the target gauges: each target whose
// R^2 exceeds gamma contributes it to score_val, everything else counts 0;
// error_val = (q - score_val) / q. A constant prediction cannot clear the
// threshold, so it scores 0 rather than erroring; constant observations
// are a data defect and throw.
ScoreReport validation_error(const Eigen::MatrixXd& obs_panel,
                             const Eigen::MatrixXd& pred_panel, double gamma,
                             const std::vector<int>& target_indices);

// Mean of the top m_rem values of a descending-sorted NSE list.
double graph_score(const std::vector<double>& nse_desc, int m_rem);

struct ResampleResult {
  double mean = 0.0;
  double stdev = 0.0;
  std::vector<double> per_run;
};

// Re-splits train/val n_runs times with derived seeds (test stays fixed
// by construction), refits the donor regressions on each new training set
// with the same input graph, and collects the test errors.
ResampleResult resample_mean_error(const StreamflowPanel& panel,
                                   const GaugeGraph& graph, int n_runs,
                                   std::uint64_t seed, double gamma = 0.7);

// Welch one-tailed t-test p-value for H1: mean(a) < mean(b).
double one_tailed_t_test(const std::vector<double>& a,
                         const std::vector<double>& b);

}  // namespace gaugenet
