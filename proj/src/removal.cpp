#include "gaugenet/removal.hpp"

#include <algorithm>
#include <numeric>

#include "gaugenet/errors.hpp"

namespace gaugenet {

RemovalPlan plan_removals(const std::vector<double>& nse_values,
                          const GaugeGraph& graph) {
  const int p = graph.p;
  if (static_cast<int>(nse_values.size()) != p)
    throw input_error("NSE list length does not match gauge count");

  RemovalPlan plan;
  plan.status.assign(p, RemovalStatus::kept);

  std::vector<bool> locked(p, false);
  for (int j = 0; j < p; ++j)
    if (graph.neighbors(j).empty()) {
      locked[j] = true;
      plan.status[j] = RemovalStatus::isolated;
    }

  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return nse_values[a] > nse_values[b];  // ties keep the lower index
  });

  for (int j : order) {
    if (locked[j]) continue;
    RemovalPlan::Entry entry;
    entry.gauge = j;
    entry.nse = nse_values[j];
    entry.donors = graph.neighbors(j);
    plan.status[j] = RemovalStatus::removed;
    for (int nb : entry.donors) {
      if (!locked[nb]) plan.status[nb] = RemovalStatus::neighbor_of_removed;
      locked[nb] = true;
    }
    locked[j] = true;
    plan.queue.push_back(std::move(entry));
  }
  plan.max_rem_rank = static_cast<int>(plan.queue.size());
  return plan;
}

std::vector<int> confident_removals(const RemovalPlan& plan, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw input_error("delta must be in [0,1]");
  std::vector<int> out;
  for (const auto& entry : plan.queue)
    if (entry.nse >= delta) out.push_back(entry.gauge);
  return out;
}

const char* nse_band(double v) {
  if (v >= 0.9) return "blue";
  if (v >= 0.8) return "green";
  if (v >= 0.7) return "yellow";
  if (v >= 0.6) return "orange";
  return "red";
}

const char* to_string(RemovalStatus s) {
  switch (s) {
    case RemovalStatus::removed: return "removed";
    case RemovalStatus::isolated: return "isolated";
    case RemovalStatus::neighbor_of_removed: return "neighbor-of-removed";
    case RemovalStatus::kept: return "kept";
  }
  return "kept";
}

}  // namespace gaugenet
