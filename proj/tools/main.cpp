// gaugenet: donor-gauge selection, record inference, and network
// rationalization for daily streamflow panels.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gaugenet/errors.hpp"
#include "gaugenet/io.hpp"
#include "json.hpp"

namespace gn = gaugenet;
using nlohmann::json;

namespace {

// Written outputs are removed again if the command fails partway.
struct OutputGuard {
  std::vector<std::string> paths;
  bool armed = true;

  void track(const std::string& p) { paths.push_back(p); }
  void disarm() { armed = false; }
  ~OutputGuard() {
    if (!armed) return;
    for (const auto& p : paths) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  }
};

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

gn::MissingPolicy parse_missing(const std::string& s) {
  if (s == "reject") return gn::MissingPolicy::reject;
  if (s == "drop-rows" || s == "drop_rows") return gn::MissingPolicy::drop_rows;
  throw gn::input_error("unknown missing policy '" + s + "'");
}

void check_nonempty_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in || in.peek() == EOF)
    throw gn::compute_error(std::string("round-trip check failed for ") + what);
}

struct SelectArgs {
  std::string panel_path, config_path;
  std::string missing = "reject";
  std::string policy = "knee";
  std::uint64_t seed = 0;
  double train_fraction = 0.5;
  gn::SearchConfig search;
  std::string donors, targets;
  std::string out_front = "front.json";
  std::string out_graph = "graph.json";
  std::string out_scatter = "scatter.csv";
  std::string out_svg;
};

// Config file values apply first, explicit flags win.
void apply_config_file(SelectArgs& args, const CLI::App* cmd) {
  if (args.config_path.empty()) return;
  std::ifstream in(args.config_path);
  if (!in) throw gn::input_error("cannot open config '" + args.config_path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw gn::input_error(std::string("bad config JSON: ") + e.what());
  }
  const std::set<std::string> known = {
      "lambda_min", "lambda_max", "k_min",   "k_max",   "res",
      "gamma",      "seed",       "policy",  "missing", "train_fraction",
      "donor_group", "target_group"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw gn::input_error("unknown config key '" + key + "'");
  auto flag_given = [&](const std::string& name) {
    return cmd->count(name) > 0;
  };
  if (j.contains("lambda_min") && !flag_given("--lambda-min"))
    args.search.lambda_min = j["lambda_min"].get<double>();
  if (j.contains("lambda_max") && !flag_given("--lambda-max"))
    args.search.lambda_max = j["lambda_max"].get<double>();
  if (j.contains("k_min") && !flag_given("--k-min"))
    args.search.k_min = j["k_min"].get<int>();
  if (j.contains("k_max") && !flag_given("--k-max"))
    args.search.k_max = j["k_max"].get<int>();
  if (j.contains("res") && !flag_given("--res"))
    args.search.res = j["res"].get<int>();
  if (j.contains("gamma") && !flag_given("--gamma"))
    args.search.gamma = j["gamma"].get<double>();
  if (j.contains("seed") && !flag_given("--seed"))
    args.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("policy") && !flag_given("--policy"))
    args.policy = j["policy"].get<std::string>();
  if (j.contains("missing") && !flag_given("--missing"))
    args.missing = j["missing"].get<std::string>();
  if (j.contains("train_fraction") && !flag_given("--train-fraction"))
    args.train_fraction = j["train_fraction"].get<double>();
  if (j.contains("donor_group") && !flag_given("--donors"))
    for (const auto& id : j["donor_group"])
      args.donors += (args.donors.empty() ? "" : ",") + id.get<std::string>();
  if (j.contains("target_group") && !flag_given("--targets"))
    for (const auto& id : j["target_group"])
      args.targets += (args.targets.empty() ? "" : ",") + id.get<std::string>();
}

int run_select(SelectArgs& args, const CLI::App* cmd) {
  apply_config_file(args, cmd);
  for (const auto& id : split_commas(args.donors))
    args.search.donor_group.insert(id);
  for (const auto& id : split_commas(args.targets))
    args.search.target_group.insert(id);

  const gn::StreamflowPanel panel =
      gn::load_panel(args.panel_path, parse_missing(args.missing));
  const gn::DataSplits splits =
      gn::split(panel, args.seed, args.train_fraction);
  const auto points = gn::search_graph_models(splits, args.search);
  const gn::ParetoFront front = gn::pareto_front(points);
  const gn::SelectionPolicy policy = gn::SelectionPolicy::parse(args.policy);
  const gn::CandidatePoint& chosen = gn::select_from_front(front, policy);

  long stale = 0;
  for (const auto& pt : points)
    if (!pt.converged) ++stale;
  if (stale > 0)
    std::cerr << "warning: " << stale << " of " << points.size()
              << " grid fits stopped at the sweep cap\n";

  OutputGuard guard;
  guard.track(args.out_front);
  gn::save_front_json(front, args.out_front);
  guard.track(args.out_graph);
  gn::save_graph_json(chosen.graph, args.out_graph);
  guard.track(args.out_scatter);
  gn::write_scatter_csv(points, front, args.out_scatter);
  if (!args.out_svg.empty()) {
    guard.track(args.out_svg);
    gn::write_scatter_svg(points, front, args.out_svg);
  }

  gn::load_front_json(args.out_front);
  gn::load_graph_json(args.out_graph);
  check_nonempty_file(args.out_scatter, "scatter CSV");
  if (!args.out_svg.empty()) check_nonempty_file(args.out_svg, "SVG");
  guard.disarm();

  std::cout << "sampled " << points.size() << " points, front holds "
            << front.points.size() << "; chose " << chosen.edge_count
            << " edges (lambda=" << chosen.lambda << ", tau=" << chosen.tau
            << ", error=" << chosen.error_val << ")\n";
  return 0;
}

int run_fetch(const std::string& sites_arg, const std::string& start,
              const std::string& end, std::string endpoint,
              const std::string& out) {
  const std::vector<std::string> sites = split_commas(sites_arg);
  if (sites.empty()) throw gn::input_error("empty site list");
  if (endpoint.empty()) {
    const char* env = std::getenv("GAUGENET_NWIS_ENDPOINT");
    endpoint = env ? env : "https://waterservices.usgs.gov/nwis/dv";
  }
  const gn::RawPanel raw = gn::fetch_daily_values(
      sites, gn::parse_date(start), gn::parse_date(end), endpoint);
  if (raw.missing_count() > 0)
    std::cerr << "warning: " << raw.missing_count()
              << " missing cells in fetched range\n";
  if (raw.provisional > 0)
    std::cerr << "warning: " << raw.provisional
              << " provisional (P-qualified) rows accepted\n";
  OutputGuard guard;
  guard.track(out);
  gn::write_panel_csv(raw, out);
  gn::load_panel(out, gn::MissingPolicy::drop_rows);
  guard.disarm();
  std::cout << "wrote " << raw.dates.size() << " days x "
            << raw.gauge_ids.size() << " gauges to " << out << "\n";
  return 0;
}

int run_baseline(const std::string& method, int m, const std::string& coords_path,
                 const std::string& panel_path, std::uint64_t seed,
                 const std::string& out) {
  gn::GaugeGraph g;
  if (method == "dist") {
    if (coords_path.empty())
      throw gn::input_error("dist baseline requires --coords");
    g = gn::dist_graph(gn::load_coords_csv(coords_path), m);
  } else if (method == "corr") {
    if (panel_path.empty())
      throw gn::input_error("corr baseline requires --panel");
    const gn::StreamflowPanel panel =
        gn::load_panel(panel_path, gn::MissingPolicy::reject);
    const gn::DataSplits splits = gn::split(panel, seed);
    const Eigen::MatrixXd z_train =
        gn::standardize(gn::to_log(splits.train)).first;
    g = gn::corr_graph(z_train, m, panel.gauge_ids);
  } else {
    throw gn::input_error("unknown baseline method '" + method + "'");
  }
  OutputGuard guard;
  guard.track(out);
  gn::save_graph_json(g, out);
  gn::load_graph_json(out);
  guard.disarm();
  std::cout << method << " baseline with m=" << m << ": " << g.edge_count()
            << " edges\n";
  return 0;
}

int run_infer(const std::string& panel_path, const std::string& graph_path,
              std::uint64_t seed, int approach, double gamma, double lambda,
              const std::string& out_pred, const std::string& out_report) {
  if (approach < 1 || approach > 3)
    throw gn::input_error("approach must be 1, 2 or 3");
  const gn::StreamflowPanel panel =
      gn::load_panel(panel_path, gn::MissingPolicy::reject);
  const gn::GaugeGraph graph = gn::load_graph_json(graph_path);
  if (graph.gauge_ids != panel.gauge_ids)
    throw gn::input_error("graph gauges do not match panel gauges");
  const gn::DataSplits splits = gn::split(panel, seed);
  const gn::EvaluationReport report =
      gn::evaluate(graph, splits, gamma,
                   static_cast<gn::InferenceApproach>(approach), lambda);
  OutputGuard guard;
  guard.track(out_pred);
  gn::write_predictions_csv(splits.test, report, out_pred);
  guard.track(out_report);
  gn::save_report_json(report, panel.gauge_ids, out_report);
  gn::load_report_json(out_report);
  check_nonempty_file(out_pred, "predictions CSV");
  guard.disarm();
  std::cout << "evaluated " << report.targets.size() << " targets, skipped "
            << report.skipped.size() << "; error_test=" << report.error_test
            << "\n";
  return 0;
}

int run_remove(const std::string& graph_path, const std::string& report_path,
               double delta, const std::string& out) {
  const gn::GaugeGraph graph = gn::load_graph_json(graph_path);
  const gn::LoadedReport report = gn::load_report_json(report_path);
  if (report.gauge_ids != graph.gauge_ids)
    throw gn::input_error("report gauges do not match graph gauges");
  std::vector<double> nse(graph.p, -std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < report.targets.size(); ++t)
    nse.at(report.targets[t]) = report.per_gauge_nse[t];
  const gn::RemovalPlan plan = gn::plan_removals(nse, graph);
  OutputGuard guard;
  guard.track(out);
  gn::save_plan_json(plan, graph, delta, out);
  gn::load_plan_json(out);
  guard.disarm();
  std::cout << plan.max_rem_rank << " removable gauges, "
            << gn::confident_removals(plan, delta).size() << " with NSE >= "
            << delta << "\n";
  return 0;
}

int run_score(const std::vector<std::string>& plan_paths,
              const std::vector<std::string>& resample_paths, double delta,
              const std::string& out) {
  if (plan_paths.empty()) throw gn::input_error("no plan files given");
  json j;
  std::vector<gn::LoadedPlan> plans;
  for (const auto& p : plan_paths) plans.push_back(gn::load_plan_json(p));

  // Shared M_rem: the largest count, over the methods, of removable gauges
  // clearing delta.
  int m_rem = 0;
  for (const auto& plan : plans) {
    int c = 0;
    for (double v : plan.queue_nse)
      if (v >= delta) ++c;
    m_rem = std::max(m_rem, c);
  }
  if (m_rem == 0)
    throw gn::compute_error("no plan has a removable gauge with NSE >= delta");
  j["delta"] = delta;
  j["m_rem"] = m_rem;
  json scores = json::array();
  for (std::size_t i = 0; i < plans.size(); ++i) {
    json s;
    s["plan"] = plan_paths[i];
    s["graph_score"] = gn::graph_score(plans[i].queue_nse, m_rem);
    scores.push_back(std::move(s));
  }
  j["graph_scores"] = std::move(scores);

  if (!resample_paths.empty()) {
    std::vector<gn::ResampleResult> runs;
    for (const auto& p : resample_paths)
      runs.push_back(gn::load_resample_json(p));
    json tests = json::array();
    for (std::size_t a = 0; a < runs.size(); ++a)
      for (std::size_t b = 0; b < runs.size(); ++b) {
        if (a == b) continue;
        json t;
        t["lower"] = resample_paths[a];
        t["higher"] = resample_paths[b];
        t["p_value"] = gn::one_tailed_t_test(runs[a].per_run, runs[b].per_run);
        tests.push_back(std::move(t));
      }
    j["t_tests"] = std::move(tests);
  }

  OutputGuard guard;
  guard.track(out);
  {
    std::ofstream os(out);
    if (!os) throw gn::input_error("cannot write '" + out + "'");
    os << j.dump(2) << "\n";
  }
  check_nonempty_file(out, "score JSON");
  guard.disarm();
  std::cout << "m_rem=" << m_rem << " over " << plans.size() << " plans\n";
  return 0;
}

int run_resample(const std::string& panel_path, const std::string& graph_path,
                 int runs, std::uint64_t seed, double gamma,
                 const std::string& out) {
  const gn::StreamflowPanel panel =
      gn::load_panel(panel_path, gn::MissingPolicy::reject);
  const gn::GaugeGraph graph = gn::load_graph_json(graph_path);
  if (graph.gauge_ids != panel.gauge_ids)
    throw gn::input_error("graph gauges do not match panel gauges");
  const gn::ResampleResult result =
      gn::resample_mean_error(panel, graph, runs, seed, gamma);
  OutputGuard guard;
  guard.track(out);
  gn::save_resample_json(result, out);
  gn::load_resample_json(out);
  guard.disarm();
  std::cout << "mean error " << result.mean << " +- " << result.stdev
            << " over " << runs << " runs\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Donor gauge selection and streamflow inference over sparse "
               "gauge-network graphs"};
  app.require_subcommand(1);

  // fetch
  auto* fetch = app.add_subcommand("fetch", "Download daily values into a panel CSV");
  std::string fe_sites, fe_start, fe_end, fe_endpoint, fe_out = "panel.csv";
  fetch->add_option("--sites", fe_sites, "Comma-separated site ids")->required();
  fetch->add_option("--start", fe_start, "First day YYYY-MM-DD")->required();
  fetch->add_option("--end", fe_end, "Last day YYYY-MM-DD")->required();
  fetch->add_option("--endpoint", fe_endpoint,
                    "Daily-values endpoint URL (env GAUGENET_NWIS_ENDPOINT)");
  fetch->add_option("--out", fe_out, "Output panel CSV");

  // select
  auto* select = app.add_subcommand(
      "select", "Search (lambda, tau) graphs and pick one off the front");
  SelectArgs sa;
  select->add_option("--panel", sa.panel_path, "Panel CSV")->required();
  select->add_option("--config", sa.config_path, "JSON config file");
  select->add_option("--missing", sa.missing, "reject|drop-rows");
  select->add_option("--seed", sa.seed, "Split seed");
  select->add_option("--train-fraction", sa.train_fraction,
                     "Train share of the early rows");
  select->add_option("--lambda-min", sa.search.lambda_min, "Grid lower bound");
  select->add_option("--lambda-max", sa.search.lambda_max, "Grid upper bound");
  select->add_option("--k-min", sa.search.k_min, "Smallest edge budget");
  select->add_option("--k-max", sa.search.k_max,
                     "Largest edge budget (0 = complete graph)");
  select->add_option("--res", sa.search.res, "Lambda grid resolution");
  select->add_option("--gamma", sa.search.gamma, "R^2 score threshold");
  select->add_option("--donors", sa.donors, "Known donor gauge ids");
  select->add_option("--targets", sa.targets, "Known target gauge ids");
  select->add_option("--policy", sa.policy, "knee | edges=K | min-error");
  select->add_option("--out-front", sa.out_front, "Front JSON");
  select->add_option("--out-graph", sa.out_graph, "Chosen graph JSON");
  select->add_option("--out-scatter", sa.out_scatter, "All sampled points CSV");
  select->add_option("--out-svg", sa.out_svg, "Optional scatter SVG");

  // baseline
  auto* baseline = app.add_subcommand("baseline",
                                      "Distance or correlation donor graph");
  std::string ba_method, ba_coords, ba_panel, ba_out = "baseline.json";
  int ba_m = 1;
  std::uint64_t ba_seed = 0;
  baseline->add_option("--method", ba_method, "dist | corr")->required();
  baseline->add_option("--m", ba_m, "Donors per target")->required();
  baseline->add_option("--coords", ba_coords, "Coordinates CSV (dist)");
  baseline->add_option("--panel", ba_panel, "Panel CSV (corr)");
  baseline->add_option("--seed", ba_seed, "Split seed (corr)");
  baseline->add_option("--out", ba_out, "Output graph JSON");

  // infer
  auto* infer = app.add_subcommand("infer", "Fit donor regressions and predict the test period");
  std::string in_panel, in_graph, in_pred = "predictions.csv",
              in_report = "report.json";
  std::uint64_t in_seed = 0;
  int in_approach = 2;
  double in_gamma = 0.7, in_lambda = 0.05;
  infer->add_option("--panel", in_panel, "Panel CSV")->required();
  infer->add_option("--graph", in_graph, "Donor graph JSON")->required();
  infer->add_option("--seed", in_seed, "Split seed");
  infer->add_option("--approach", in_approach,
                    "1 standardized-space, 2 log-space donors, 3 raw");
  infer->add_option("--gamma", in_gamma, "R^2 score threshold");
  infer->add_option("--lambda", in_lambda, "Penalty for approach 1 refit");
  infer->add_option("--out-predictions", in_pred, "Predictions CSV");
  infer->add_option("--out-report", in_report, "Evaluation report JSON");

  // remove
  auto* removecmd = app.add_subcommand("remove", "Plan gauge removals with least information loss");
  std::string rm_graph, rm_report, rm_out = "plan.json";
  double rm_delta = 0.7;
  removecmd->add_option("--graph", rm_graph, "Donor graph JSON")->required();
  removecmd->add_option("--report", rm_report, "Evaluation report JSON")->required();
  removecmd->add_option("--delta", rm_delta, "Confidence threshold on NSE");
  removecmd->add_option("--out", rm_out, "Removal plan JSON");

  // score
  auto* score = app.add_subcommand("score", "Graph scores across removal plans (+ optional t-tests)");
  std::vector<std::string> sc_plans, sc_resamples;
  double sc_delta = 0.7;
  std::string sc_out = "scores.json";
  score->add_option("--plans", sc_plans, "Removal plan JSONs")->required();
  score->add_option("--resamples", sc_resamples,
                    "Resample JSONs for pairwise t-tests");
  score->add_option("--delta", sc_delta, "Confidence threshold on NSE");
  score->add_option("--out", sc_out, "Output JSON");

  // resample
  auto* resample = app.add_subcommand("resample", "Repeated re-splits with a fixed graph");
  std::string rs_panel, rs_graph, rs_out = "resample.json";
  int rs_runs = 1;
  std::uint64_t rs_seed = 0;
  double rs_gamma = 0.7;
  resample->add_option("--panel", rs_panel, "Panel CSV")->required();
  resample->add_option("--graph", rs_graph, "Donor graph JSON")->required();
  resample->add_option("--runs", rs_runs, "Number of runs")->required();
  resample->add_option("--seed", rs_seed, "Base seed");
  resample->add_option("--gamma", rs_gamma, "R^2 score threshold");
  resample->add_option("--out", rs_out, "Output JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fetch) return run_fetch(fe_sites, fe_start, fe_end, fe_endpoint, fe_out);
    if (*select) return run_select(sa, select);
    if (*baseline)
      return run_baseline(ba_method, ba_m, ba_coords, ba_panel, ba_seed, ba_out);
    if (*infer)
      return run_infer(in_panel, in_graph, in_seed, in_approach, in_gamma,
                       in_lambda, in_pred, in_report);
    if (*removecmd) return run_remove(rm_graph, rm_report, rm_delta, rm_out);
    if (*score) return run_score(sc_plans, sc_resamples, sc_delta, sc_out);
    if (*resample)
      return run_resample(rs_panel, rs_graph, rs_runs, rs_seed, rs_gamma, rs_out);
  } catch (const gn::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
