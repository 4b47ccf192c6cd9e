#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gaugenet/graph.hpp"
#include "gaugenet/panel.hpp"

namespace gaugenet {

// Log-space regression of one target gauge on its graph donors.
struct DonorModel {
  int target = -1;
  std::vector<int> donors;
  double beta0 = 0.0;      // intercept
  Eigen::VectorXd betas;   // one slope per donor
};

// 1 = matrix regression in standardized space with training stats,
// 2 = per-target log-space donor regression (default),
// 3 = per-target regression on raw discharge.
enum class InferenceApproach { z_space = 1, log_mlr = 2, raw_mlr = 3 };

struct EvaluationReport {
  std::vector<int> targets;           // evaluated gauges, ascending
  std::vector<double> per_gauge_nse;  // aligned with targets
  std::vector<double> per_gauge_r2;   // 0 where not computable
  double error_test = 0.0;
  double gamma = 0.0;
  Eigen::MatrixXd predictions;        // n_test x |targets|, discharge
  std::vector<int> skipped;           // isolated gauges
};

// OLS fit of log-flow column j on its donors with intercept, via normal
// equations (LLT). Throws on isolated targets and rank-deficient designs.
DonorModel fit_mlr(const Eigen::MatrixXd& y_train, const GaugeGraph& graph,
                   int j);

// Per model: y_hat = beta0 + sum_i beta_i ln(q_donor_i + 1) applied to the
// given discharge panel, then q_hat = exp(y_hat) - 1 clamped at 0.
// Columns follow the model list order.
Eigen::MatrixXd predict_test(const std::vector<DonorModel>& models,
                             const StreamflowPanel& q_test);

// z_hat = z_test * A, inverted with the *training* stats (the stationarity
// assumption of the standardized-space route). Returns discharge.
Eigen::MatrixXd z_space_predict(const Eigen::MatrixXd& z_test,
                                const Eigen::MatrixXd& A,
                                const TransformStats& stats_train,
                                long* clamped = nullptr);

// Fits the donor models on the training split, predicts the test split,
// and reports per-gauge NSE plus the thresholded test error. Isolated
// gauges are skipped and listed. lambda_for_z_space only matters for
// approach 1, where the coefficient matrix comes from a pattern-
// constrained precision fit on the training covariance.
EvaluationReport evaluate(const GaugeGraph& graph, const DataSplits& splits,
                          double gamma,
                          InferenceApproach approach = InferenceApproach::log_mlr,
                          double lambda_for_z_space = 0.05);

}  // namespace gaugenet
