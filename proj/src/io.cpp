#include "gaugenet/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gaugenet/errors.hpp"
#include "json.hpp"

namespace gaugenet {

namespace {

using nlohmann::json;

// Shortest round-trip decimal form.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path + "'");
  return out;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw input_error("bad JSON in '" + path + "': " + e.what());
  }
  return j;
}

void write_json(const json& j, const std::string& path) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (long i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const long rows = static_cast<long>(j.size());
  if (rows == 0) return Eigen::MatrixXd();
  const long cols = static_cast<long>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (static_cast<long>(j.at(i).size()) != cols)
      throw input_error("ragged matrix in JSON");
    for (long c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

json graph_to_json(const GaugeGraph& g) {
  json j;
  j["gauge_ids"] = g.gauge_ids;
  json edges = json::array();
  for (const auto& [a, b] : g.edges) edges.push_back(json::array({a, b}));
  j["edges"] = std::move(edges);
  return j;
}

GaugeGraph graph_from_json(const json& j) {
  GaugeGraph g;
  g.gauge_ids = j.at("gauge_ids").get<std::vector<std::string>>();
  g.p = static_cast<int>(g.gauge_ids.size());
  for (const auto& e : j.at("edges")) {
    if (e.size() != 2) throw input_error("edge is not a pair");
    g.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
  }
  g.validate();
  return g;
}

}  // namespace

void write_panel_csv(const StreamflowPanel& panel, const std::string& path) {
  auto out = open_out(path);
  out << "date";
  for (const auto& id : panel.gauge_ids) out << "," << id;
  out << "\n";
  for (long i = 0; i < panel.n(); ++i) {
    out << format_date(panel.dates[i]);
    for (int j = 0; j < panel.p(); ++j) out << "," << fmt(panel.q(i, j));
    out << "\n";
  }
}

void write_panel_csv(const RawPanel& panel, const std::string& path) {
  auto out = open_out(path);
  out << "date";
  for (const auto& id : panel.gauge_ids) out << "," << id;
  out << "\n";
  for (std::size_t i = 0; i < panel.dates.size(); ++i) {
    out << format_date(panel.dates[i]);
    for (double v : panel.cells[i]) {
      out << ",";
      if (!std::isnan(v)) out << fmt(v);
    }
    out << "\n";
  }
}

GaugeCoords load_coords_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open coordinates file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw input_error("empty coordinates file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "gauge_id,lat,lon")
    throw input_error("coordinates header must be `gauge_id,lat,lon`");
  GaugeCoords coords;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, lat, lon;
    if (!std::getline(ss, id, ',') || !std::getline(ss, lat, ',') ||
        !std::getline(ss, lon))
      throw input_error("malformed coordinates row '" + line + "'");
    coords.gauge_ids.push_back(id);
    try {
      coords.lat.push_back(std::stod(lat));
      coords.lon.push_back(std::stod(lon));
    } catch (const std::exception&) {
      throw input_error("non-numeric coordinate in row '" + line + "'");
    }
  }
  if (coords.gauge_ids.empty()) throw input_error("no coordinate rows");
  coords.validate();
  return coords;
}

void write_coords_csv(const GaugeCoords& coords, const std::string& path) {
  auto out = open_out(path);
  out << "gauge_id,lat,lon\n";
  for (std::size_t i = 0; i < coords.gauge_ids.size(); ++i)
    out << coords.gauge_ids[i] << "," << fmt(coords.lat[i]) << ","
        << fmt(coords.lon[i]) << "\n";
}

void save_graph_json(const GaugeGraph& g, const std::string& path) {
  write_json(graph_to_json(g), path);
}

GaugeGraph load_graph_json(const std::string& path) {
  return graph_from_json(read_json(path));
}

void save_precision_json(const PrecisionEstimate& est, const std::string& path) {
  json j;
  j["p"] = est.theta.rows();
  j["theta"] = matrix_to_json(est.theta);
  j["w"] = matrix_to_json(est.w);
  j["lambda"] = est.lambda;
  j["sweeps"] = est.sweeps;
  j["converged"] = est.converged;
  j["max_kkt_violation"] = est.max_kkt_violation;
  write_json(j, path);
}

PrecisionEstimate load_precision_json(const std::string& path) {
  const json j = read_json(path);
  PrecisionEstimate est;
  est.theta = matrix_from_json(j.at("theta"));
  est.w = matrix_from_json(j.at("w"));
  est.lambda = j.at("lambda").get<double>();
  est.sweeps = j.at("sweeps").get<int>();
  est.converged = j.at("converged").get<bool>();
  est.max_kkt_violation = j.at("max_kkt_violation").get<double>();
  return est;
}

namespace {

json point_to_json(const CandidatePoint& pt) {
  json j;
  j["k_requested"] = pt.k_requested;
  j["edge_count"] = pt.edge_count;
  j["error_val"] = pt.error_val;
  j["lambda"] = pt.lambda;
  j["tau"] = pt.tau;
  j["converged"] = pt.converged;
  j["graph"] = graph_to_json(pt.graph);
  return j;
}

CandidatePoint point_from_json(const json& j) {
  CandidatePoint pt;
  pt.k_requested = j.at("k_requested").get<int>();
  pt.edge_count = j.at("edge_count").get<int>();
  pt.error_val = j.at("error_val").get<double>();
  pt.lambda = j.at("lambda").get<double>();
  pt.tau = j.at("tau").get<double>();
  pt.converged = j.at("converged").get<bool>();
  pt.graph = graph_from_json(j.at("graph"));
  return pt;
}

}  // namespace

void save_front_json(const ParetoFront& front, const std::string& path) {
  json j = json::array();
  for (const auto& pt : front.points) j.push_back(point_to_json(pt));
  write_json(j, path);
}

ParetoFront load_front_json(const std::string& path) {
  const json j = read_json(path);
  ParetoFront front;
  for (const auto& item : j) front.points.push_back(point_from_json(item));
  return front;
}

void write_scatter_csv(const std::vector<CandidatePoint>& points,
                       const ParetoFront& front, const std::string& path) {
  // A sampled point is dominated iff some front point beats it in one
  // objective without losing the other. The front is edge-ascending with
  // strictly decreasing error, so the only candidate is the last front
  // point within the edge budget.
  std::vector<std::pair<int, double>> fr;
  for (const auto& pt : front.points) fr.push_back({pt.edge_count, pt.error_val});
  auto dominated = [&](const CandidatePoint& pt) {
    auto it = std::upper_bound(
        fr.begin(), fr.end(), pt.edge_count,
        [](int k, const std::pair<int, double>& f) { return k < f.first; });
    if (it == fr.begin()) return false;
    const auto& [fe, fv] = *std::prev(it);
    return fv < pt.error_val || (fe < pt.edge_count && fv <= pt.error_val);
  };
  auto out = open_out(path);
  out << "edge_count,error_val,lambda,tau,dominated\n";
  for (const auto& pt : points)
    out << pt.edge_count << "," << fmt(pt.error_val) << "," << fmt(pt.lambda)
        << "," << fmt(pt.tau) << "," << (dominated(pt) ? 1 : 0) << "\n";
}

void write_scatter_svg(const std::vector<CandidatePoint>& points,
                       const ParetoFront& front, const std::string& path) {
  const double width = 760, height = 520;
  const double ml = 70, mr = 20, mt = 20, mb = 50;
  int min_e = points.front().edge_count, max_e = min_e;
  double min_v = points.front().error_val, max_v = min_v;
  for (const auto& pt : points) {
    min_e = std::min(min_e, pt.edge_count);
    max_e = std::max(max_e, pt.edge_count);
    min_v = std::min(min_v, pt.error_val);
    max_v = std::max(max_v, pt.error_val);
  }
  if (max_e == min_e) max_e = min_e + 1;
  if (max_v <= min_v) max_v = min_v + 1e-9;
  auto sx = [&](double e) {
    return ml + (e - min_e) / double(max_e - min_e) * (width - ml - mr);
  };
  auto sy = [&](double v) {
    return mt + (max_v - v) / (max_v - min_v) * (height - mt - mb);
  };
  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
      << width - mr << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"14\">edges</text>\n";
  out << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
      << (mt + height - mb) / 2 << ")\">validation error</text>\n";
  out << "<text x=\"" << ml << "\" y=\"" << height - mb + 16
      << "\" font-size=\"11\">" << min_e << "</text>\n";
  out << "<text x=\"" << width - mr - 20 << "\" y=\"" << height - mb + 16
      << "\" font-size=\"11\">" << max_e << "</text>\n";
  out << "<text x=\"" << ml - 6 << "\" y=\"" << height - mb
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(min_v)
      << "</text>\n";
  out << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 10
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(max_v)
      << "</text>\n";
  for (const auto& pt : points)
    out << "<circle cx=\"" << sx(pt.edge_count) << "\" cy=\""
        << sy(pt.error_val) << "\" r=\"2\" fill=\"black\" opacity=\"0.4\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"green\" stroke-width=\"1.5\" points=\"";
  for (const auto& pt : front.points)
    out << sx(pt.edge_count) << "," << sy(pt.error_val) << " ";
  out << "\"/>\n";
  for (const auto& pt : front.points)
    out << "<circle cx=\"" << sx(pt.edge_count) << "\" cy=\""
        << sy(pt.error_val) << "\" r=\"3\" fill=\"green\"/>\n";
  out << "</svg>\n";
}

void write_predictions_csv(const StreamflowPanel& observed_test,
                           const EvaluationReport& report,
                           const std::string& path) {
  auto out = open_out(path);
  out << "date,gauge_id,observed,predicted\n";
  for (std::size_t t = 0; t < report.targets.size(); ++t) {
    const int j = report.targets[t];
    for (long i = 0; i < observed_test.n(); ++i)
      out << format_date(observed_test.dates[i]) << ","
          << observed_test.gauge_ids[j] << "," << fmt(observed_test.q(i, j))
          << "," << fmt(report.predictions(i, static_cast<int>(t))) << "\n";
  }
}

void save_report_json(const EvaluationReport& report,
                      const std::vector<std::string>& gauge_ids,
                      const std::string& path) {
  json j;
  j["gamma"] = report.gamma;
  j["error_test"] = report.error_test;
  json per = json::array();
  for (std::size_t t = 0; t < report.targets.size(); ++t) {
    json g;
    g["gauge"] = report.targets[t];
    g["gauge_id"] = gauge_ids.at(report.targets[t]);
    g["nse"] = report.per_gauge_nse[t];
    g["r2"] = report.per_gauge_r2[t];
    per.push_back(std::move(g));
  }
  j["targets"] = std::move(per);
  json skipped = json::array();
  for (int s : report.skipped) {
    json g;
    g["gauge"] = s;
    g["gauge_id"] = gauge_ids.at(s);
    skipped.push_back(std::move(g));
  }
  j["skipped"] = std::move(skipped);
  j["gauge_ids"] = gauge_ids;
  write_json(j, path);
}

LoadedReport load_report_json(const std::string& path) {
  const json j = read_json(path);
  LoadedReport rep;
  rep.gauge_ids = j.at("gauge_ids").get<std::vector<std::string>>();
  for (const auto& g : j.at("targets")) {
    rep.targets.push_back(g.at("gauge").get<int>());
    rep.per_gauge_nse.push_back(g.at("nse").get<double>());
  }
  return rep;
}

void save_plan_json(const RemovalPlan& plan, const GaugeGraph& g, double delta,
                    const std::string& path) {
  json j;
  j["max_rem_rank"] = plan.max_rem_rank;
  j["delta"] = delta;
  json queue = json::array();
  for (const auto& entry : plan.queue) {
    json e;
    e["gauge"] = entry.gauge;
    e["gauge_id"] = g.gauge_ids.at(entry.gauge);
    e["nse"] = entry.nse;
    e["band"] = nse_band(entry.nse);
    json donors = json::array();
    for (int d : entry.donors) {
      json dj;
      dj["gauge"] = d;
      dj["gauge_id"] = g.gauge_ids.at(d);
      donors.push_back(std::move(dj));
    }
    e["donors"] = std::move(donors);
    queue.push_back(std::move(e));
  }
  j["queue"] = std::move(queue);
  json status;
  for (int i = 0; i < g.p; ++i)
    status[g.gauge_ids[i]] = to_string(plan.status[i]);
  j["status"] = std::move(status);
  json confident = json::array();
  for (int idx : confident_removals(plan, delta))
    confident.push_back(g.gauge_ids.at(idx));
  j["confident_removals"] = std::move(confident);
  write_json(j, path);
}

LoadedPlan load_plan_json(const std::string& path) {
  const json j = read_json(path);
  LoadedPlan plan;
  for (const auto& e : j.at("queue")) {
    plan.queue_gauges.push_back(e.at("gauge").get<int>());
    plan.queue_nse.push_back(e.at("nse").get<double>());
  }
  return plan;
}

void save_resample_json(const ResampleResult& r, const std::string& path) {
  json j;
  j["mean"] = r.mean;
  j["stdev"] = r.stdev;
  j["per_run"] = r.per_run;
  write_json(j, path);
}

ResampleResult load_resample_json(const std::string& path) {
  const json j = read_json(path);
  ResampleResult r;
  r.mean = j.at("mean").get<double>();
  r.stdev = j.at("stdev").get<double>();
  r.per_run = j.at("per_run").get<std::vector<double>>();
  return r;
}

void save_score_json(const ScoreReport& report, const std::string& path) {
  json j;
  j["per_gauge_r2"] = report.per_gauge_r2;
  j["per_gauge_nse"] = report.per_gauge_nse;
  j["score_val"] = report.score_val;
  j["error_val"] = report.error_val;
  j["gamma"] = report.gamma;
  j["degenerate_targets"] = report.degenerate_targets;
  write_json(j, path);
}

ScoreReport load_score_json(const std::string& path) {
  const json j = read_json(path);
  ScoreReport r;
  r.per_gauge_r2 = j.at("per_gauge_r2").get<std::vector<double>>();
  r.per_gauge_nse = j.at("per_gauge_nse").get<std::vector<double>>();
  r.score_val = j.at("score_val").get<double>();
  r.error_val = j.at("error_val").get<double>();
  r.gamma = j.at("gamma").get<double>();
  r.degenerate_targets = j.at("degenerate_targets").get<std::vector<int>>();
  return r;
}

}  // namespace gaugenet
