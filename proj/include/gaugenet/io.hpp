#pragma once

#include <string>
#include <vector>

#include "gaugenet/glasso.hpp"
#include "gaugenet/graph.hpp"
#include "gaugenet/inference.hpp"
#include "gaugenet/metrics.hpp"
#include "gaugenet/model_search.hpp"
#include "gaugenet/nwis.hpp"
#include "gaugenet/panel.hpp"
#include "gaugenet/removal.hpp"

namespace gaugenet {

// Panel CSV (header `date,<id>,...`). RawPanel writes NaN cells as empty.
void write_panel_csv(const StreamflowPanel& panel, const std::string& path);
void write_panel_csv(const RawPanel& panel, const std::string& path);

// Coordinates CSV `gauge_id,lat,lon`.
GaugeCoords load_coords_csv(const std::string& path);
void write_coords_csv(const GaugeCoords& coords, const std::string& path);

// Graph JSON {"gauge_ids": [...], "edges": [[i,j],...]}, i<j, sorted.
void save_graph_json(const GaugeGraph& g, const std::string& path);
GaugeGraph load_graph_json(const std::string& path);

// PrecisionEstimate JSON: dense row-major matrices + fit record.
void save_precision_json(const PrecisionEstimate& est, const std::string& path);
PrecisionEstimate load_precision_json(const std::string& path);

// Front JSON: array of candidate records with inlined graphs.
void save_front_json(const ParetoFront& front, const std::string& path);
ParetoFront load_front_json(const std::string& path);

// Scatter CSV `edge_count,error_val,lambda,tau,dominated` over all points.
void write_scatter_csv(const std::vector<CandidatePoint>& points,
                       const ParetoFront& front, const std::string& path);

// Minimal SVG scatter: axes, sampled points, front polyline.
void write_scatter_svg(const std::vector<CandidatePoint>& points,
                       const ParetoFront& front, const std::string& path);

// Predictions CSV `date,gauge_id,observed,predicted`, long format.
void write_predictions_csv(const StreamflowPanel& observed_test,
                           const EvaluationReport& report,
                           const std::string& path);

// EvaluationReport JSON (per-gauge NSE/R2, error, skipped list).
void save_report_json(const EvaluationReport& report,
                      const std::vector<std::string>& gauge_ids,
                      const std::string& path);
struct LoadedReport {
  std::vector<int> targets;
  std::vector<double> per_gauge_nse;
  std::vector<std::string> gauge_ids;
};
LoadedReport load_report_json(const std::string& path);

// RemovalPlan JSON with NSE band labels and confident removals at delta.
void save_plan_json(const RemovalPlan& plan, const GaugeGraph& g, double delta,
                    const std::string& path);
struct LoadedPlan {
  std::vector<int> queue_gauges;
  std::vector<double> queue_nse;
};
LoadedPlan load_plan_json(const std::string& path);

// Resample JSON: mean/stdev/per-run errors.
void save_resample_json(const ResampleResult& r, const std::string& path);
ResampleResult load_resample_json(const std::string& path);

// ScoreReport JSON: per-gauge arrays plus the scalar score/error/gamma.
void save_score_json(const ScoreReport& report, const std::string& path);
ScoreReport load_score_json(const std::string& path);

}  // namespace gaugenet
