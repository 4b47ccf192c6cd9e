#pragma once

#include <string>
#include <vector>

#include "gaugenet/graph.hpp"

namespace gaugenet {

// Why a gauge ended up in or out of the removal queue.
enum class RemovalStatus { removed, isolated, neighbor_of_removed, kept };

struct RemovalPlan {
  struct Entry {
    int gauge = -1;
    double nse = 0.0;
    std::vector<int> donors;  // graph neighbors at removal time
  };
  std::vector<Entry> queue;            // NSE non-increasing
  int max_rem_rank = 0;                // == queue.size()
  std::vector<RemovalStatus> status;   // one per gauge
};

// Greedy removal: isolated gauges are off limits; the remaining gauges are
// visited in descending NSE order (ties toward the lower index), and each
// unlocked gauge joins the queue while locking its neighbors. Locks are
// permanent for the whole pass.
RemovalPlan plan_removals(const std::vector<double>& nse_values,
                          const GaugeGraph& graph);

// Queue prefix-by-filter: the gauges whose NSE >= delta. The greedy pass
// itself never looks at delta.
std::vector<int> confident_removals(const RemovalPlan& plan, double delta);

// Display band for an NSE value: blue >= 0.9, green >= 0.8, yellow >= 0.7,
// orange >= 0.6, red below.
const char* nse_band(double nse_value);

const char* to_string(RemovalStatus s);

}  // namespace gaugenet
