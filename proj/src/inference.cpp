#include "gaugenet/inference.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "gaugenet/errors.hpp"
#include "gaugenet/glasso.hpp"
#include "gaugenet/metrics.hpp"

namespace gaugenet {

namespace {

// OLS with intercept on the given design columns, normal equations + LLT.
std::pair<double, Eigen::VectorXd> ols(const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& y) {
  const long n = x.rows();
  const int k = static_cast<int>(x.cols());
  Eigen::MatrixXd design(n, k + 1);
  design.col(0).setOnes();
  design.rightCols(k) = x;
  const Eigen::MatrixXd xtx = design.transpose() * design;
  const Eigen::VectorXd xty = design.transpose() * y;
  Eigen::LLT<Eigen::MatrixXd> llt(xtx);
  if (llt.info() != Eigen::Success)
    throw compute_error("rank-deficient donor design");
  const Eigen::VectorXd coef = llt.solve(xty);
  return {coef[0], coef.tail(k)};
}

}  // namespace

DonorModel fit_mlr(const Eigen::MatrixXd& y_train, const GaugeGraph& graph,
                   int j) {
  if (j < 0 || j >= graph.p) throw input_error("target index out of range");
  DonorModel model;
  model.target = j;
  model.donors = donors_of(graph, j);
  if (model.donors.empty())
    throw input_error("gauge " + std::to_string(j) + " has no donors");
  const long n = y_train.rows();
  if (n < static_cast<long>(model.donors.size()) + 2)
    throw input_error("too few training rows for " +
                      std::to_string(model.donors.size()) + " donors");
  Eigen::MatrixXd x(n, model.donors.size());
  for (std::size_t d = 0; d < model.donors.size(); ++d)
    x.col(d) = y_train.col(model.donors[d]);
  try {
    std::tie(model.beta0, model.betas) = ols(x, y_train.col(j));
  } catch (const compute_error&) {
    std::string ids;
    for (int d : model.donors) ids += (ids.empty() ? "" : ",") + std::to_string(d);
    throw compute_error("rank-deficient donor design for target " +
                        std::to_string(j) + " (donors " + ids + ")");
  }
  return model;
}

Eigen::MatrixXd predict_test(const std::vector<DonorModel>& models,
                             const StreamflowPanel& q_test) {
  const long n = q_test.n();
  Eigen::MatrixXd out(n, static_cast<int>(models.size()));
  for (std::size_t m = 0; m < models.size(); ++m) {
    const DonorModel& model = models[m];
    Eigen::VectorXd y_hat = Eigen::VectorXd::Constant(n, model.beta0);
    for (std::size_t d = 0; d < model.donors.size(); ++d) {
      const int col = model.donors[d];
      if (col < 0 || col >= q_test.p())
        throw input_error("donor column missing from test panel");
      y_hat += model.betas[d] *
               (q_test.q.col(col).array() + 1.0).log().matrix();
    }
    out.col(static_cast<int>(m)) =
        (y_hat.array().exp() - 1.0).max(0.0).matrix();
  }
  return out;
}

Eigen::MatrixXd z_space_predict(const Eigen::MatrixXd& z_test,
                                const Eigen::MatrixXd& A,
                                const TransformStats& stats_train,
                                long* clamped) {
  if (z_test.cols() != A.rows() || A.rows() != A.cols())
    throw input_error("coefficient matrix shape mismatch");
  const Eigen::MatrixXd z_hat = z_test * A;
  const InvertResult inv = invert_transform(z_hat, stats_train);
  if (clamped) *clamped = inv.clamped;
  return inv.q_hat;
}

EvaluationReport evaluate(const GaugeGraph& graph, const DataSplits& splits,
                          double gamma, InferenceApproach approach,
                          double lambda_for_z_space) {
  if (graph.p != splits.train.p())
    throw input_error("graph size does not match panel");
  EvaluationReport rep;
  rep.gamma = gamma;
  for (int j = 0; j < graph.p; ++j) {
    if (donors_of(graph, j).empty())
      rep.skipped.push_back(j);
    else
      rep.targets.push_back(j);
  }
  if (rep.targets.empty())
    throw input_error("all gauges are isolated, nothing to evaluate");

  const long n_test = splits.test.n();
  rep.predictions.resize(n_test, static_cast<int>(rep.targets.size()));

  if (approach == InferenceApproach::z_space) {
    const auto [z_train, stats_train] = standardize(to_log(splits.train));
    const Eigen::MatrixXd z_test = standardize(to_log(splits.test)).first;
    PenaltySpec pen;
    pen.lambda = lambda_for_z_space;
    pen.zero_pattern = graph;
    const PrecisionEstimate est =
        glasso_fit(sample_covariance(z_train), pen);
    const Eigen::MatrixXd A = precision_to_coefficients(est);
    const Eigen::MatrixXd q_hat = z_space_predict(z_test, A, stats_train);
    for (std::size_t t = 0; t < rep.targets.size(); ++t)
      rep.predictions.col(static_cast<int>(t)) = q_hat.col(rep.targets[t]);
  } else if (approach == InferenceApproach::log_mlr) {
    const Eigen::MatrixXd y_train = to_log(splits.train);
    std::vector<DonorModel> models;
    models.reserve(rep.targets.size());
    for (int j : rep.targets) models.push_back(fit_mlr(y_train, graph, j));
    rep.predictions = predict_test(models, splits.test);
  } else {
    // Raw-space regression, no log transform.
    for (std::size_t t = 0; t < rep.targets.size(); ++t) {
      const int j = rep.targets[t];
      const std::vector<int> donors = donors_of(graph, j);
      Eigen::MatrixXd x(splits.train.n(), donors.size());
      Eigen::MatrixXd x_test(n_test, donors.size());
      for (std::size_t d = 0; d < donors.size(); ++d) {
        x.col(d) = splits.train.q.col(donors[d]);
        x_test.col(d) = splits.test.q.col(donors[d]);
      }
      const auto [b0, b] = ols(x, splits.train.q.col(j));
      rep.predictions.col(static_cast<int>(t)) =
          ((x_test * b).array() + b0).max(0.0).matrix();
    }
  }

  Eigen::MatrixXd obs(n_test, rep.targets.size());
  for (std::size_t t = 0; t < rep.targets.size(); ++t)
    obs.col(static_cast<int>(t)) = splits.test.q.col(rep.targets[t]);
  std::vector<int> cols(rep.targets.size());
  for (std::size_t t = 0; t < cols.size(); ++t) cols[t] = static_cast<int>(t);
  const ScoreReport score = validation_error(obs, rep.predictions, gamma, cols);
  rep.per_gauge_r2 = score.per_gauge_r2;
  rep.per_gauge_nse = score.per_gauge_nse;
  rep.error_test = score.error_val;
  return rep;
}

}  // namespace gaugenet
