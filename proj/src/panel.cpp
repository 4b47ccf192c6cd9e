#include "gaugenet/panel.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "gaugenet/errors.hpp"
#include "gaugenet/rng.hpp"

namespace gaugenet {

void StreamflowPanel::validate(bool require_consecutive) const {
  const long rows = n();
  if (static_cast<long>(dates.size()) != rows)
    throw input_error("date count does not match row count");
  if (static_cast<int>(gauge_ids.size()) != p())
    throw input_error("gauge id count does not match column count");
  std::set<std::string> ids(gauge_ids.begin(), gauge_ids.end());
  if (static_cast<int>(ids.size()) != p())
    throw input_error("duplicate gauge id in panel");
  for (long i = 1; i < rows; ++i) {
    const auto gap = (dates[i] - dates[i - 1]).count();
    if (gap <= 0) throw input_error("dates not strictly increasing at row " +
                                    std::to_string(i));
    if (require_consecutive && gap != 1)
      throw input_error("calendar gap before " + format_date(dates[i]));
  }
  for (long i = 0; i < rows; ++i)
    for (int j = 0; j < p(); ++j) {
      const double v = q(i, j);
      if (!std::isfinite(v) || v < 0)
        throw input_error("invalid discharge at (" + std::to_string(i) + "," +
                          std::to_string(j) + ")");
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool is_missing_cell(const std::string& s) {
  if (s.empty()) return true;
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), ::tolower);
  return t == "nan";
}

void reject_constant_columns(const StreamflowPanel& panel) {
  for (int j = 0; j < panel.p(); ++j) {
    const double first = panel.q(0, j);
    bool constant = true;
    for (long i = 1; i < panel.n(); ++i)
      if (panel.q(i, j) != first) {
        constant = false;
        break;
      }
    if (constant)
      throw input_error("constant column '" + panel.gauge_ids[j] + "'");
  }
}

}  // namespace

StreamflowPanel load_panel(const std::string& path, MissingPolicy on_missing) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open panel file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw input_error("empty panel file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);
  if (header.size() < 2 || header[0] != "date")
    throw input_error("malformed header, expected `date,<gauge_id>,...`");

  StreamflowPanel panel;
  panel.gauge_ids.assign(header.begin() + 1, header.end());
  const int p = static_cast<int>(panel.gauge_ids.size());
  {
    std::set<std::string> ids(panel.gauge_ids.begin(), panel.gauge_ids.end());
    if (static_cast<int>(ids.size()) != p)
      throw input_error("duplicate gauge id in header");
    for (const auto& id : ids)
      if (id.empty()) throw input_error("empty gauge id in header");
  }

  std::vector<Day> dates;
  std::vector<double> values;  // row-major staging
  long row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (static_cast<int>(cells.size()) != p + 1)
      throw input_error("row " + std::to_string(row + 1) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(p + 1));
    const Day date = parse_date(cells[0]);
    bool any_missing = false;
    std::vector<double> rowvals(p);
    for (int j = 0; j < p; ++j) {
      const std::string& cell = cells[j + 1];
      if (is_missing_cell(cell)) {
        if (on_missing == MissingPolicy::reject)
          throw input_error("missing value at (" + std::to_string(row + 1) +
                            "," + std::to_string(j + 1) + ")");
        any_missing = true;
        continue;
      }
      std::size_t pos = 0;
      double v = 0;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        throw input_error("non-numeric cell '" + cell + "' at row " +
                          std::to_string(row + 1));
      }
      if (pos != cell.size())
        throw input_error("non-numeric cell '" + cell + "' at row " +
                          std::to_string(row + 1));
      if (!std::isfinite(v))
        throw input_error("non-finite discharge at row " + std::to_string(row + 1));
      if (v < 0)
        throw input_error("negative discharge at row " + std::to_string(row + 1));
      rowvals[j] = v;
    }
    ++row;
    if (any_missing) continue;  // drop_rows policy
    dates.push_back(date);
    values.insert(values.end(), rowvals.begin(), rowvals.end());
  }
  const long n = static_cast<long>(dates.size());
  if (n == 0) throw input_error("panel has no complete rows");

  panel.dates = std::move(dates);
  panel.q.resize(n, p);
  for (long i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) panel.q(i, j) = values[i * p + j];

  panel.validate(on_missing == MissingPolicy::reject);
  reject_constant_columns(panel);
  return panel;
}

Eigen::MatrixXd to_log(const Eigen::MatrixXd& q) {
  if ((q.array() < 0).any()) throw input_error("negative discharge in to_log");
  return (q.array() + 1.0).log().matrix();
}

Eigen::MatrixXd to_log(const StreamflowPanel& panel) { return to_log(panel.q); }

std::pair<Eigen::MatrixXd, TransformStats> standardize(const Eigen::MatrixXd& y) {
  const long n = y.rows();
  const int p = static_cast<int>(y.cols());
  if (n < 2) throw input_error("need at least 2 rows to standardize");
  TransformStats stats;
  stats.mu.resize(p);
  stats.sigma.resize(p);
  Eigen::MatrixXd z(n, p);
  for (int j = 0; j < p; ++j) {
    const double mu = y.col(j).mean();
    const double ss = (y.col(j).array() - mu).square().sum();
    const double sigma = std::sqrt(ss / static_cast<double>(n - 1));
    if (sigma <= 0)
      throw input_error("zero-variance column " + std::to_string(j));
    stats.mu[j] = mu;
    stats.sigma[j] = sigma;
    z.col(j) = (y.col(j).array() - mu) / sigma;
  }
  return {std::move(z), std::move(stats)};
}

InvertResult invert_transform(const Eigen::MatrixXd& z_hat,
                              const TransformStats& stats) {
  const int p = static_cast<int>(z_hat.cols());
  if (stats.mu.size() != p || stats.sigma.size() != p)
    throw input_error("transform stats do not match column count");
  InvertResult out;
  out.q_hat.resize(z_hat.rows(), p);
  // exp overflows past ln(DBL_MAX); report instead of clamping silently.
  constexpr double kExpCap = 709.0;
  for (int j = 0; j < p; ++j)
    for (long i = 0; i < z_hat.rows(); ++i) {
      const double y = z_hat(i, j) * stats.sigma[j] + stats.mu[j];
      if (y > kExpCap)
        throw compute_error("exp overflow in inverse transform at (" +
                            std::to_string(i) + "," + std::to_string(j) + ")");
      double q = std::exp(y) - 1.0;
      if (q < 0) {
        q = 0.0;
        ++out.clamped;
      }
      out.q_hat(i, j) = q;
    }
  return out;
}

namespace {

StreamflowPanel take_rows(const StreamflowPanel& panel,
                          const std::vector<long>& rows) {
  StreamflowPanel out;
  out.gauge_ids = panel.gauge_ids;
  out.dates.reserve(rows.size());
  out.q.resize(static_cast<long>(rows.size()), panel.p());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.dates.push_back(panel.dates[rows[i]]);
    out.q.row(static_cast<long>(i)) = panel.q.row(rows[i]);
  }
  return out;
}

}  // namespace

DataSplits split(const StreamflowPanel& panel, std::uint64_t seed,
                 double train_fraction_of_early) {
  const long n = panel.n();
  if (n < 6) throw input_error("need at least 6 rows to split, have " +
                               std::to_string(n));
  if (!(train_fraction_of_early > 0.0 && train_fraction_of_early < 1.0))
    throw input_error("train fraction must be in (0,1)");

  const long n_test = (n + 2) / 3;  // ceil(n/3)
  const long n_early = n - n_test;

  std::vector<long> early(n_early);
  std::iota(early.begin(), early.end(), 0L);
  Rng rng(seed);
  rng.shuffle(early);

  const long n_train = static_cast<long>(
      std::ceil(train_fraction_of_early * static_cast<double>(n_early)));
  std::vector<long> train_rows(early.begin(), early.begin() + n_train);
  std::vector<long> val_rows(early.begin() + n_train, early.end());
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::vector<long> test_rows(n_test);
  std::iota(test_rows.begin(), test_rows.end(), n_early);

  DataSplits out;
  out.train = take_rows(panel, train_rows);
  out.val = take_rows(panel, val_rows);
  out.test = take_rows(panel, test_rows);
  out.seed = seed;
  out.train_fraction_of_early = train_fraction_of_early;
  return out;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& z) {
  const long n = z.rows();
  if (n < 2) throw input_error("need at least 2 rows for a covariance");
  return (z.transpose() * z) / static_cast<double>(n - 1);
}

namespace {

std::pair<GaugeGraph, Eigen::MatrixXd> build_truth(const SyntheticSpec& spec,
                                                   Rng& rng) {
  if (spec.p < 1 || spec.n < 1) throw input_error("synthetic spec needs p, n >= 1");
  if (spec.precision_offdiag_magnitude <= 0)
    throw input_error("precision magnitude must be positive");
  if (spec.diagonal_slack <= 0)
    throw input_error("diagonal slack must be positive");
  const int p = spec.p;

  GaugeGraph truth;
  truth.p = p;
  for (int i = 0; i < p; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "g%02d", i);
    truth.gauge_ids.emplace_back(buf);
  }
  if (!spec.true_edges.empty()) {
    for (const auto& [i, j] : spec.true_edges) truth.add_edge(i, j);
  } else {
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j)
        if (rng.uniform() < spec.edge_probability) truth.edges.insert({i, j});
  }

  // Negative off-diagonals give positively associated flows; the
  // diagonally dominant diagonal keeps the matrix SPD.
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p, p);
  for (const auto& [i, j] : truth.edges) {
    theta(i, j) = theta(j, i) = -spec.precision_offdiag_magnitude;
  }
  for (int i = 0; i < p; ++i)
    theta(i, i) = spec.diagonal_slack + theta.row(i).cwiseAbs().sum();

  Eigen::LLT<Eigen::MatrixXd> theta_llt(theta);
  if (theta_llt.info() != Eigen::Success)
    throw compute_error("synthetic precision not SPD after dominance adjustment");
  const Eigen::MatrixXd cov = theta_llt.solve(Eigen::MatrixXd::Identity(p, p));
  // Rescale to unit implied variances: theta <- D^1/2 theta D^1/2 with
  // D = diag(cov). The zero pattern is unchanged.
  const Eigen::VectorXd scale = cov.diagonal().cwiseSqrt();
  theta = scale.asDiagonal() * theta * scale.asDiagonal();
  return {std::move(truth), std::move(theta)};
}

}  // namespace

std::pair<GaugeGraph, Eigen::MatrixXd> synthetic_truth(const SyntheticSpec& spec) {
  Rng rng(spec.seed);
  return build_truth(spec, rng);
}

std::pair<StreamflowPanel, GaugeGraph> generate_synthetic_panel(
    const SyntheticSpec& spec) {
  const int p = spec.p;
  Rng rng(spec.seed);
  auto [truth, theta] = build_truth(spec, rng);

  Eigen::LLT<Eigen::MatrixXd> theta_llt(theta);
  if (theta_llt.info() != Eigen::Success)
    throw compute_error("synthetic precision not SPD");
  const Eigen::MatrixXd cov =
      theta_llt.solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::LLT<Eigen::MatrixXd> cov_llt(cov);
  if (cov_llt.info() != Eigen::Success)
    throw compute_error("synthetic covariance not SPD");
  const Eigen::MatrixXd chol = cov_llt.matrixL();

  Eigen::VectorXd mu(p), sigma(p);
  for (int j = 0; j < p; ++j) mu[j] = rng.uniform(spec.mu_min, spec.mu_max);
  for (int j = 0; j < p; ++j)
    sigma[j] = rng.uniform(spec.sigma_min, spec.sigma_max);

  StreamflowPanel panel;
  panel.gauge_ids = truth.gauge_ids;
  panel.dates.reserve(spec.n);
  const Day start = parse_date("1951-01-01");
  for (long i = 0; i < spec.n; ++i)
    panel.dates.push_back(start + std::chrono::days{i});
  panel.q.resize(spec.n, p);
  Eigen::VectorXd eps(p);
  for (long i = 0; i < spec.n; ++i) {
    for (int j = 0; j < p; ++j) eps[j] = rng.normal();
    const Eigen::VectorXd z = chol * eps;
    for (int j = 0; j < p; ++j) {
      const double y = z[j] * sigma[j] + mu[j];
      panel.q(i, j) = std::max(0.0, std::exp(y) - 1.0);
    }
  }
  return {std::move(panel), std::move(truth)};
}

}  // namespace gaugenet
