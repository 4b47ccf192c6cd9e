#include "gaugenet/model_search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "gaugenet/errors.hpp"
#include "gaugenet/metrics.hpp"

namespace gaugenet {

void SearchConfig::validate(int p) const {
  if (!(lambda_min >= 0 && lambda_min <= lambda_max))
    throw input_error("need 0 <= lambda_min <= lambda_max");
  if (res < 1) throw input_error("res must be >= 1");
  if (!(gamma >= 0 && gamma < 1)) throw input_error("gamma must be in [0,1)");
  const int kmax = resolved_k_max(p);
  if (k_min < 0 || k_min > kmax)
    throw input_error("need 0 <= k_min <= k_max");
  if (kmax > complete_edge_count(p))
    throw input_error("k_max exceeds the complete graph");
}

int SearchConfig::resolved_k_max(int p) const {
  return k_max > 0 ? k_max : static_cast<int>(complete_edge_count(p));
}

long SearchConfig::grid_size(int p) const {
  return static_cast<long>(resolved_k_max(p) - k_min + 1) * res;
}

std::vector<double> linear_sequence(double lo, double hi, int res) {
  if (res < 1) throw input_error("res must be >= 1");
  std::vector<double> out(res);
  if (res == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(res - 1);
  for (int i = 0; i < res; ++i) out[i] = lo + step * i;
  out.back() = hi;
  return out;
}

std::vector<CandidatePoint> search_graph_models(const DataSplits& splits,
                                                const SearchConfig& config) {
  const int p = splits.train.p();
  config.validate(p);
  const int k_min = config.k_min;
  const int k_max = config.resolved_k_max(p);
  const std::vector<double> lambdas =
      linear_sequence(config.lambda_min, config.lambda_max, config.res);

  const auto [z_train, stats_train] = standardize(to_log(splits.train));
  const auto [z_val, stats_val] = standardize(to_log(splits.val));
  (void)stats_train;
  const Eigen::MatrixXd s_train = sample_covariance(z_train);

  std::vector<int> targets;
  if (config.target_group.empty()) {
    targets.resize(p);
    for (int j = 0; j < p; ++j) targets[j] = j;
  } else {
    for (const auto& id : config.target_group) {
      const auto it = std::find(splits.train.gauge_ids.begin(),
                                splits.train.gauge_ids.end(), id);
      if (it == splits.train.gauge_ids.end())
        throw input_error("unknown target gauge '" + id + "'");
      targets.push_back(
          static_cast<int>(it - splits.train.gauge_ids.begin()));
    }
    std::sort(targets.begin(), targets.end());
  }

  const int per_lane = k_max - k_min + 1;
  std::vector<CandidatePoint> points(
      static_cast<std::size_t>(per_lane) * lambdas.size());

  // One lane per lambda: unconstrained base fit, then the k sweep with the
  // constrained refit warm-started from the previous k.
  auto run_lane = [&](int r) {
    const double lambda = lambdas[r];
    PenaltySpec base_spec;
    base_spec.lambda = lambda;
    const PrecisionEstimate base =
        glasso_fit(s_train, base_spec, config.glasso);

    PrecisionEstimate prev;
    bool have_prev = false;
    for (int k = k_min; k <= k_max; ++k) {
      const double tau = choose_tau_for_k(base.theta, k);
      GaugeGraph pattern =
          graph_from_precision(base.theta, tau, splits.train.gauge_ids);
      pattern = apply_role_constraints(pattern, config.donor_group,
                                       config.target_group);

      PenaltySpec spec;
      spec.lambda = lambda;
      spec.zero_pattern = pattern;
      const PrecisionEstimate fit = glasso_fit(
          s_train, spec, config.glasso, have_prev ? &prev : nullptr);

      const Eigen::MatrixXd a_train = precision_to_coefficients(fit);
      const Eigen::MatrixXd z_hat = z_val * a_train;
      const Eigen::MatrixXd q_hat = invert_transform(z_hat, stats_val).q_hat;
      const ScoreReport score =
          validation_error(splits.val.q, q_hat, config.gamma, targets);

      CandidatePoint pt;
      pt.k_requested = k;
      pt.edge_count = pattern.edge_count();
      pt.error_val = score.error_val;
      pt.lambda = lambda;
      pt.tau = tau;
      pt.converged = fit.converged;
      pt.graph = std::move(pattern);
      points[static_cast<std::size_t>(r) * per_lane + (k - k_min)] =
          std::move(pt);

      prev = fit;
      have_prev = true;
    }
  };

  const unsigned lanes = static_cast<unsigned>(lambdas.size());
  const unsigned workers =
      std::max(1u, std::min(lanes, std::thread::hardware_concurrency()));
  if (workers == 1) {
    for (unsigned r = 0; r < lanes; ++r) run_lane(static_cast<int>(r));
  } else {
    std::atomic<unsigned> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (unsigned r = next.fetch_add(1); r < lanes; r = next.fetch_add(1)) {
          try {
            run_lane(static_cast<int>(r));
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  return points;
}

ParetoFront pareto_front(const std::vector<CandidatePoint>& points) {
  if (points.empty()) throw input_error("no candidate points");
  // Stable sort by (edges, error); a sweep then keeps strict improvements.
  std::vector<const CandidatePoint*> order;
  order.reserve(points.size());
  for (const auto& pt : points) order.push_back(&pt);
  std::stable_sort(order.begin(), order.end(),
                   [](const CandidatePoint* a, const CandidatePoint* b) {
                     if (a->edge_count != b->edge_count)
                       return a->edge_count < b->edge_count;
                     return a->error_val < b->error_val;
                   });
  ParetoFront front;
  double best = std::numeric_limits<double>::infinity();
  int last_edges = -1;
  for (const CandidatePoint* pt : order) {
    if (pt->edge_count == last_edges) continue;  // higher error at same size
    if (pt->error_val < best) {
      front.points.push_back(*pt);
      best = pt->error_val;
      last_edges = pt->edge_count;
    }
  }
  return front;
}

SelectionPolicy SelectionPolicy::parse(const std::string& text) {
  SelectionPolicy p;
  if (text == "knee") {
    p.kind = Kind::knee;
  } else if (text == "min-error" || text == "min_error") {
    p.kind = Kind::min_error;
  } else if (text.rfind("edges=", 0) == 0) {
    p.kind = Kind::edges;
    try {
      p.k = std::stoi(text.substr(6));
    } catch (const std::exception&) {
      throw input_error("bad edge budget in policy '" + text + "'");
    }
    if (p.k < 0) throw input_error("edge budget must be >= 0");
  } else {
    throw input_error("unknown selection policy '" + text + "'");
  }
  return p;
}

const CandidatePoint& select_from_front(const ParetoFront& front,
                                        const SelectionPolicy& policy) {
  const auto& pts = front.points;
  if (pts.empty()) throw input_error("empty front");
  switch (policy.kind) {
    case SelectionPolicy::Kind::min_error:
      return pts.back();
    case SelectionPolicy::Kind::edges: {
      const CandidatePoint* best = nullptr;
      for (const auto& pt : pts)
        if (pt.edge_count <= policy.k) best = &pt;
      if (!best)
        throw input_error("no front point with <= " + std::to_string(policy.k) +
                          " edges");
      return *best;
    }
    case SelectionPolicy::Kind::knee:
      break;
  }
  if (pts.size() == 1) return pts.front();
  const double x0 = pts.front().edge_count, x1 = pts.back().edge_count;
  const double y0 = pts.front().error_val, y1 = pts.back().error_val;
  const double xr = std::max(x1 - x0, 1e-300);
  const double yr = std::max(std::abs(y0 - y1), 1e-300);
  // Chord endpoints in normalized coordinates are (0, 1) and (1, 0) when
  // error decreases along the front; distance to the chord reduces to
  // |x + y - 1| / sqrt(2), maximized over the interior points.
  std::size_t best = 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double x = (pts[i].edge_count - x0) / xr;
    const double y = (pts[i].error_val - y1) / yr;
    const double d = std::abs(x + y - 1.0);
    if (d > best_d + 1e-15) {
      best_d = d;
      best = i;
    }
  }
  return pts[best];
}

}  // namespace gaugenet
