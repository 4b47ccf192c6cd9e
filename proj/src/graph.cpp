#include "gaugenet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "gaugenet/errors.hpp"

namespace gaugenet {

bool GaugeGraph::has_edge(int i, int j) const {
  if (i == j) return false;
  if (i > j) std::swap(i, j);
  return edges.count({i, j}) > 0;
}

void GaugeGraph::add_edge(int i, int j) {
  if (i == j) throw input_error("self-loop rejected");
  if (i < 0 || j < 0 || i >= p || j >= p)
    throw input_error("edge index out of range");
  if (i > j) std::swap(i, j);
  edges.insert({i, j});
}

std::vector<int> GaugeGraph::neighbors(int j) const {
  std::vector<int> out;
  for (const auto& [a, b] : edges) {
    if (a == j) out.push_back(b);
    if (b == j) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int GaugeGraph::index_of(const std::string& id) const {
  for (int i = 0; i < static_cast<int>(gauge_ids.size()); ++i)
    if (gauge_ids[i] == id) return i;
  return -1;
}

void GaugeGraph::validate() const {
  if (p < 0) throw input_error("negative vertex count");
  if (static_cast<int>(gauge_ids.size()) != p)
    throw input_error("gauge id count does not match vertex count");
  for (const auto& [i, j] : edges) {
    if (i >= j) throw input_error("edge pair not in i<j order");
    if (i < 0 || j >= p) throw input_error("edge index out of range");
  }
  std::set<std::string> ids(gauge_ids.begin(), gauge_ids.end());
  if (static_cast<int>(ids.size()) != p)
    throw input_error("duplicate gauge id in graph");
}

void GaugeCoords::validate() const {
  const std::size_t n = gauge_ids.size();
  if (lat.size() != n || lon.size() != n)
    throw input_error("coordinate column length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lat[i] >= -90.0 && lat[i] <= 90.0))
      throw input_error("latitude out of range for " + gauge_ids[i]);
    if (!(lon[i] >= -180.0 && lon[i] <= 180.0))
      throw input_error("longitude out of range for " + gauge_ids[i]);
  }
}

long complete_edge_count(int p) { return static_cast<long>(p) * (p - 1) / 2; }

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthRadiusKm = 6371.0;
  constexpr double deg = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * deg;
  const double dlon = (lon2 - lon1) * deg;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * deg) * std::cos(lat2 * deg) *
                       std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

static std::vector<std::string> default_ids(int p) {
  std::vector<std::string> ids(p);
  for (int i = 0; i < p; ++i) ids[i] = "g" + std::to_string(i);
  return ids;
}

GaugeGraph graph_from_precision(const Eigen::MatrixXd& theta, double tau,
                                std::vector<std::string> gauge_ids) {
  const int p = static_cast<int>(theta.rows());
  if (theta.cols() != p) throw input_error("precision matrix not square");
  if ((theta - theta.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw input_error("precision matrix not symmetric");
  if (tau < 0) throw input_error("negative threshold");
  GaugeGraph g;
  g.p = p;
  g.gauge_ids = gauge_ids.empty() ? default_ids(p) : std::move(gauge_ids);
  if (static_cast<int>(g.gauge_ids.size()) != p)
    throw input_error("gauge id count does not match matrix size");
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (std::abs(theta(i, j)) > tau) g.edges.insert({i, j});
  return g;
}

double choose_tau_for_k(const Eigen::MatrixXd& theta, int k) {
  const int p = static_cast<int>(theta.rows());
  if (theta.cols() != p || (theta - theta.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw input_error("precision matrix not square symmetric");
  if (k < 0) throw input_error("negative edge budget");
  std::vector<double> mags;
  mags.reserve(complete_edge_count(p));
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) mags.push_back(std::abs(theta(i, j)));
  std::sort(mags.begin(), mags.end());

  auto count_above = [&](double tau) {
    return mags.end() - std::upper_bound(mags.begin(), mags.end(), tau);
  };
  if (count_above(0.0) <= k) return 0.0;
  for (std::size_t i = 0; i < mags.size(); ++i) {
    if (i > 0 && mags[i] == mags[i - 1]) continue;
    if (count_above(mags[i]) <= k) return mags[i];
  }
  return mags.back();  // unreachable: the largest magnitude leaves 0 edges
}

// Shared m-nearest construction for the distance and correlation baselines.
// `score(i, j)` must be symmetric; smaller is closer.
static GaugeGraph nearest_m_graph(int p, std::vector<std::string> ids, int m,
                                  const Eigen::MatrixXd& score) {
  if (m < 1) throw input_error("donor count must be >= 1");
  if (p < m + 1)
    throw input_error("need at least m+1 gauges, have " + std::to_string(p));
  GaugeGraph g;
  g.p = p;
  g.gauge_ids = std::move(ids);
  for (int i = 0; i < p; ++i) {
    std::vector<int> order;
    order.reserve(p - 1);
    for (int j = 0; j < p; ++j)
      if (j != i) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return score(i, a) < score(i, b);  // ties keep lower index first
    });
    for (int r = 0; r < m; ++r) g.add_edge(i, order[r]);
  }
  return g;
}

GaugeGraph dist_graph(const GaugeCoords& coords, int m) {
  coords.validate();
  const int p = static_cast<int>(coords.gauge_ids.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      d(i, j) = d(j, i) =
          haversine_km(coords.lat[i], coords.lon[i], coords.lat[j], coords.lon[j]);
  return nearest_m_graph(p, coords.gauge_ids, m, d);
}

GaugeGraph corr_graph(const Eigen::MatrixXd& z_train, int m,
                      std::vector<std::string> gauge_ids) {
  const int p = static_cast<int>(z_train.cols());
  const long n = z_train.rows();
  if (n < 2) throw input_error("need at least 2 rows for correlations");
  if (gauge_ids.empty()) gauge_ids = default_ids(p);
  Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd centered = z_train.rowwise() - z_train.colwise().mean();
  Eigen::VectorXd norms = centered.colwise().norm();
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      if (norms[i] == 0.0 || norms[j] == 0.0)
        throw input_error("constant column in correlation input");
      const double c = centered.col(i).dot(centered.col(j)) / (norms[i] * norms[j]);
      corr(i, j) = corr(j, i) = -c;  // negate: nearest_m_graph picks smallest
    }
  return nearest_m_graph(p, std::move(gauge_ids), m, corr);
}

GaugeGraph apply_role_constraints(GaugeGraph g,
                                  const std::set<std::string>& donors,
                                  const std::set<std::string>& targets) {
  auto indices_of = [&](const std::set<std::string>& names) {
    std::set<int> idx;
    for (const auto& name : names) {
      const int i = g.index_of(name);
      if (i < 0) throw input_error("unknown gauge id '" + name + "'");
      idx.insert(i);
    }
    return idx;
  };
  const std::set<int> donor_idx = indices_of(donors);
  const std::set<int> target_idx = indices_of(targets);
  for (auto it = g.edges.begin(); it != g.edges.end();) {
    const auto [i, j] = *it;
    const bool both_donors = donor_idx.count(i) && donor_idx.count(j);
    const bool both_targets = target_idx.count(i) && target_idx.count(j);
    it = (both_donors || both_targets) ? g.edges.erase(it) : std::next(it);
  }
  return g;
}

std::vector<int> donors_of(const GaugeGraph& g, int j) {
  if (j < 0 || j >= g.p) throw input_error("gauge index out of range");
  return g.neighbors(j);
}

}  // namespace gaugenet
