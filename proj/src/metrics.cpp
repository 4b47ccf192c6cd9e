#include "gaugenet/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "gaugenet/errors.hpp"
#include "gaugenet/inference.hpp"

namespace gaugenet {

namespace {

struct Moments {
  double mean = 0.0;
  double ss = 0.0;  // centered sum of squares
};

Moments moments(const Eigen::VectorXd& x) {
  Moments m;
  m.mean = x.mean();
  m.ss = (x.array() - m.mean).square().sum();
  return m;
}

}  // namespace

double r2(const Eigen::VectorXd& obs, const Eigen::VectorXd& pred) {
  if (obs.size() != pred.size()) throw input_error("series length mismatch");
  if (obs.size() < 2) throw input_error("need at least 2 points for R^2");
  const Moments mo = moments(obs);
  const Moments mp = moments(pred);
  if (mo.ss <= 0) throw input_error("constant observed series in R^2");
  if (mp.ss <= 0) throw input_error("constant predicted series in R^2");
  const double cov =
      ((obs.array() - mo.mean) * (pred.array() - mp.mean)).sum();
  const double v = (cov * cov) / (mo.ss * mp.ss);
  return std::min(1.0, v);  // guard rounding just above 1
}

double nse(const Eigen::VectorXd& obs, const Eigen::VectorXd& pred) {
  if (obs.size() != pred.size()) throw input_error("series length mismatch");
  if (obs.size() < 2) throw input_error("need at least 2 points for NSE");
  const Moments mo = moments(obs);
  if (mo.ss <= 0) throw input_error("constant observed series in NSE");
  const double sse = (obs - pred).squaredNorm();
  return 1.0 - sse / mo.ss;
}

ScoreReport validation_error(const Eigen::MatrixXd& obs_panel,
                             const Eigen::MatrixXd& pred_panel, double gamma,
                             const std::vector<int>& target_indices) {
  if (obs_panel.rows() != pred_panel.rows() ||
      obs_panel.cols() != pred_panel.cols())
    throw input_error("panel shape mismatch");
  if (target_indices.empty()) throw input_error("no target gauges");

  ScoreReport rep;
  rep.gamma = gamma;
  const int q = static_cast<int>(target_indices.size());
  rep.per_gauge_r2.resize(q, 0.0);
  rep.per_gauge_nse.resize(q, 0.0);
  double score = 0.0;
  for (int t = 0; t < q; ++t) {
    const int j = target_indices[t];
    if (j < 0 || j >= obs_panel.cols())
      throw input_error("target index out of range");
    const Eigen::VectorXd obs = obs_panel.col(j);
    const Eigen::VectorXd pred = pred_panel.col(j);
    double v;
    try {
      v = r2(obs, pred);
    } catch (const input_error&) {
      const Moments mo = moments(obs);
      if (mo.ss <= 0) throw;  // degenerate observations are a data defect
      rep.degenerate_targets.push_back(j);
      v = 0.0;  // a constant prediction cannot clear the threshold
    }
    rep.per_gauge_r2[t] = v;
    rep.per_gauge_nse[t] = nse(obs, pred);
    if (v > gamma) score += v;
  }
  rep.score_val = score;
  rep.error_val = (static_cast<double>(q) - score) / static_cast<double>(q);
  return rep;
}

double graph_score(const std::vector<double>& nse_desc, int m_rem) {
  if (m_rem < 1) throw input_error("m_rem must be >= 1");
  if (static_cast<int>(nse_desc.size()) < m_rem)
    throw input_error("m_rem exceeds NSE list length");
  for (std::size_t i = 1; i < nse_desc.size(); ++i)
    if (nse_desc[i] > nse_desc[i - 1] + 1e-12)
      throw input_error("NSE list not sorted descending");
  double sum = 0.0;
  for (int i = 0; i < m_rem; ++i) sum += nse_desc[i];
  return sum / static_cast<double>(m_rem);
}

ResampleResult resample_mean_error(const StreamflowPanel& panel,
                                   const GaugeGraph& graph, int n_runs,
                                   std::uint64_t seed, double gamma) {
  if (n_runs < 1) throw input_error("need at least one resample run");
  ResampleResult out;
  out.per_run.reserve(n_runs);
  for (int run = 0; run < n_runs; ++run) {
    const DataSplits splits = split(panel, seed + static_cast<std::uint64_t>(run));
    const EvaluationReport rep = evaluate(graph, splits, gamma);
    out.per_run.push_back(rep.error_test);
  }
  double sum = 0.0;
  for (double v : out.per_run) sum += v;
  out.mean = sum / n_runs;
  if (n_runs > 1) {
    double ss = 0.0;
    for (double v : out.per_run) ss += (v - out.mean) * (v - out.mean);
    out.stdev = std::sqrt(ss / (n_runs - 1));
  }
  return out;
}

double one_tailed_t_test(const std::vector<double>& a,
                         const std::vector<double>& b) {
  const auto stats = [](const std::vector<double>& x) {
    if (x.size() < 2) throw input_error("need at least 2 samples per group");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair<double, double>(mean, ss / (x.size() - 1));
  };
  const auto [ma, va] = stats(a);
  const auto [mb, vb] = stats(b);
  if (va <= 0 || vb <= 0) throw input_error("degenerate sample variance");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double se2 = va / na + vb / nb;
  const double t = (ma - mb) / std::sqrt(se2);
  // Welch-Satterthwaite degrees of freedom.
  const double df = se2 * se2 /
                    (va * va / (na * na * (na - 1)) + vb * vb / (nb * nb * (nb - 1)));
  const boost::math::students_t dist(df);
  return boost::math::cdf(dist, t);  // P(T <= t), H1: mean(a) < mean(b)
}

}  // namespace gaugenet
