#pragma once

#include <Eigen/Dense>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace gaugenet {

// Undirected graph over the gauges of a network. Edges are stored as
// index pairs (i, j) with i < j; vertex j's neighbors are its donor
// candidates.
struct GaugeGraph {
  int p = 0;
  std::vector<std::string> gauge_ids;
  std::set<std::pair<int, int>> edges;

  int edge_count() const { return static_cast<int>(edges.size()); }
  bool has_edge(int i, int j) const;
  void add_edge(int i, int j);
  std::vector<int> neighbors(int j) const;
  int index_of(const std::string& id) const;  // -1 if unknown

  // Checks the structural invariants (no self-loops, indices < p,
  // id/vertex count agreement). Throws input_error.
  void validate() const;
};

struct GaugeCoords {
  std::vector<std::string> gauge_ids;
  std::vector<double> lat;
  std::vector<double> lon;

  void validate() const;
};

// Max number of edges of a p-vertex simple graph, (p^2 - p) / 2.
long complete_edge_count(int p);

// Great-circle distance in kilometers.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

// Edge (i, j) present iff |theta_ij| > tau (strict), i != j.
GaugeGraph graph_from_precision(const Eigen::MatrixXd& theta, double tau,
                                std::vector<std::string> gauge_ids = {});

// Smallest tau from {0} union {distinct |theta_ij|} whose thresholded
// graph has at most k edges. Ties at the cut magnitude all drop together,
// so the result can have fewer than k edges.
double choose_tau_for_k(const Eigen::MatrixXd& theta, int k);

// For each gauge, undirected edges to its m nearest neighbors by
// great-circle distance. Distance ties break toward the lower index.
GaugeGraph dist_graph(const GaugeCoords& coords, int m);

// Same construction with highest pairwise Pearson correlation on the
// (training-subset) panel given, columns in gauge order.
GaugeGraph corr_graph(const Eigen::MatrixXd& z_train, int m,
                      std::vector<std::string> gauge_ids);

// Drops every edge whose endpoints are both donors or both targets.
GaugeGraph apply_role_constraints(GaugeGraph g,
                                  const std::set<std::string>& donors,
                                  const std::set<std::string>& targets);

// Neighbors of j in ascending index order; empty for isolated gauges.
std::vector<int> donors_of(const GaugeGraph& g, int j);

}  // namespace gaugenet
