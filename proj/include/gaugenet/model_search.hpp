#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "gaugenet/glasso.hpp"
#include "gaugenet/graph.hpp"
#include "gaugenet/panel.hpp"

namespace gaugenet {

// Grid for the two-objective (edge count vs. validation error) search.
// k_max <= 0 means "complete graph" and is resolved against p at run time.
struct SearchConfig {
  double lambda_min = 0.01;
  double lambda_max = 0.10;
  int k_min = 10;
  int k_max = 0;
  int res = 30;
  double gamma = 0.7;
  std::set<std::string> donor_group;
  std::set<std::string> target_group;
  GlassoOptions glasso;

  void validate(int p) const;         // throws input_error
  int resolved_k_max(int p) const;
  long grid_size(int p) const;        // (k_max - k_min + 1) * res
};

// One sampled graph candidate.
struct CandidatePoint {
  int k_requested = 0;
  int edge_count = 0;
  double error_val = 1.0;
  double lambda = 0.0;
  double tau = 0.0;
  bool converged = true;  // constrained fit hit its tolerance
  GaugeGraph graph;
};

struct ParetoFront {
  std::vector<CandidatePoint> points;  // edge_count ascending
};

// Linear sequence over [lo, hi] with `res` points, endpoints inclusive.
// res == 1 yields {lo}.
std::vector<double> linear_sequence(double lo, double hi, int res);

// Samples the full (lambda, k) grid: per lambda an unconstrained precision
// fit, then per k a tau cut, role filtering, and a pattern-constrained
// refit scored on the validation split. Emits grid_size(p) points in grid
// order. Lambda lanes run in parallel.
std::vector<CandidatePoint> search_graph_models(const DataSplits& splits,
                                                const SearchConfig& config);

// Non-dominated subset under (edge_count, error_val) minimization; ties on
// edge_count keep only the lowest error, duplicates keep the first seen.
ParetoFront pareto_front(const std::vector<CandidatePoint>& points);

struct SelectionPolicy {
  enum class Kind { knee, edges, min_error } kind = Kind::knee;
  int k = 0;  // for edges

  static SelectionPolicy parse(const std::string& text);  // "knee" | "edges=K" | "min-error"
};

// knee: max perpendicular distance to the chord between the front ends in
// min-max normalized space. edges(k): largest edge_count <= k. min_error:
// the last front point.
const CandidatePoint& select_from_front(const ParetoFront& front,
                                        const SelectionPolicy& policy);

}  // namespace gaugenet
