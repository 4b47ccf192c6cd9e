#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "gaugenet/errors.hpp"
#include "gaugenet/glasso.hpp"
#include "gaugenet/panel.hpp"
#include "gaugenet/rng.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace gaugenet;

namespace {

const char* kSmallCsv =
    "date,alpha,beta,gamma\n"
    "2000-01-01,1.0,2.0,3.0\n"
    "2000-01-02,1.5,2.5,3.5\n"
    "2000-01-03,0.0,2.2,3.1\n"
    "2000-01-04,1.1,2.9,3.4\n"
    "2000-01-05,1.9,2.1,3.9\n";

StreamflowPanel random_panel(int n, int p, std::uint64_t seed) {
  Rng rng(seed);
  StreamflowPanel panel;
  const Day start = parse_date("1960-01-01");
  for (int i = 0; i < n; ++i) panel.dates.push_back(start + std::chrono::days{i});
  for (int j = 0; j < p; ++j) panel.gauge_ids.push_back("g" + std::to_string(j));
  panel.q.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j)
      panel.q(i, j) = std::exp(rng.normal() + 2.0 + 0.3 * j);
  return panel;
}

}  // namespace

TEST_CASE("load_panel parses a well-formed CSV") {
  testsup::TempFile f("panel_ok.csv", kSmallCsv);
  const StreamflowPanel panel = load_panel(f.str(), MissingPolicy::reject);
  CHECK(panel.n() == 5);
  CHECK(panel.p() == 3);
  CHECK(panel.gauge_ids[1] == "beta");
  CHECK(panel.q(2, 0) == 0.0);
  CHECK(format_date(panel.dates[4]) == "2000-01-05");
}

TEST_CASE("load_panel rejects missing values under reject policy") {
  testsup::TempFile f("panel_nan.csv",
                      "date,a,b\n"
                      "2000-01-01,1.0,2.0\n"
                      "2000-01-02,NaN,2.5\n"
                      "2000-01-03,1.2,2.2\n");
  CHECK_THROWS_WITH_AS(load_panel(f.str(), MissingPolicy::reject),
                       doctest::Contains("missing value at (2,1)"), input_error);
}

TEST_CASE("load_panel drop_rows removes incomplete rows and allows gaps") {
  testsup::TempFile f("panel_drop.csv",
                      "date,a,b\n"
                      "2000-01-01,1.0,2.0\n"
                      "2000-01-02,,2.5\n"
                      "2000-01-03,1.2,2.2\n"
                      "2000-01-04,1.4,2.8\n");
  const StreamflowPanel panel = load_panel(f.str(), MissingPolicy::drop_rows);
  CHECK(panel.n() == 3);
  CHECK(format_date(panel.dates[1]) == "2000-01-03");
}

TEST_CASE("load_panel error paths") {
  SUBCASE("malformed header") {
    testsup::TempFile f("panel_h.csv", "time,a\n2000-01-01,1\n");
    CHECK_THROWS_AS(load_panel(f.str(), MissingPolicy::reject), input_error);
  }
  SUBCASE("non-numeric cell") {
    testsup::TempFile f("panel_nn.csv",
                        "date,a\n2000-01-01,1.0\n2000-01-02,oops\n");
    CHECK_THROWS_WITH_AS(load_panel(f.str(), MissingPolicy::reject),
                         doctest::Contains("non-numeric"), input_error);
  }
  SUBCASE("negative discharge") {
    testsup::TempFile f("panel_neg.csv",
                        "date,a\n2000-01-01,1.0\n2000-01-02,-3\n");
    CHECK_THROWS_WITH_AS(load_panel(f.str(), MissingPolicy::reject),
                         doctest::Contains("negative"), input_error);
  }
  SUBCASE("duplicate gauge id") {
    testsup::TempFile f("panel_dup.csv",
                        "date,a,a\n2000-01-01,1,2\n2000-01-02,2,1\n");
    CHECK_THROWS_WITH_AS(load_panel(f.str(), MissingPolicy::reject),
                         doctest::Contains("duplicate"), input_error);
  }
  SUBCASE("constant column") {
    testsup::TempFile f("panel_const.csv",
                        "date,a,b\n2000-01-01,1,2\n2000-01-02,1,3\n");
    CHECK_THROWS_WITH_AS(load_panel(f.str(), MissingPolicy::reject),
                         doctest::Contains("constant"), input_error);
  }
  SUBCASE("calendar gap under reject") {
    testsup::TempFile f("panel_gap.csv",
                        "date,a\n2000-01-01,1\n2000-01-03,2\n");
    CHECK_THROWS_WITH_AS(load_panel(f.str(), MissingPolicy::reject),
                         doctest::Contains("gap"), input_error);
  }
}

TEST_CASE("to_log maps 0 to 0 and e-1 to 1") {
  Eigen::MatrixXd q(2, 2);
  q << 0.0, std::exp(1.0) - 1.0, 4.0, 10.0;
  const Eigen::MatrixXd y = to_log(q);
  CHECK(y(0, 0) == 0.0);
  CHECK(y(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  // round trip
  const Eigen::MatrixXd back = (y.array().exp() - 1.0).matrix();
  CHECK(((back - q).cwiseAbs().array() / (q.array() + 1e-30)).maxCoeff() < 1e-12);
}

TEST_CASE("standardize centers and scales each column") {
  Eigen::MatrixXd y(3, 1);
  y << 1, 2, 3;
  const auto [z, stats] = standardize(y);
  CHECK(std::abs(z.col(0).mean()) <= 1e-10);
  const double sd = std::sqrt((z.col(0).array() - z.col(0).mean()).square().sum() / 2.0);
  CHECK(std::abs(sd - 1.0) <= 1e-10);
  CHECK(stats.mu[0] == doctest::Approx(2.0));
  CHECK(stats.sigma[0] == doctest::Approx(1.0));

  SUBCASE("already standard column is returned unchanged") {
    Eigen::MatrixXd u(3, 1);
    u << -1, 0, 1;  // mean 0, sample stdev 1
    const auto [zu, su] = standardize(u);
    CHECK((zu - u).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(su.mu[0] == doctest::Approx(0.0));
    CHECK(su.sigma[0] == doctest::Approx(1.0));
  }
  SUBCASE("identical columns standardize identically") {
    Eigen::MatrixXd two(4, 2);
    two << 1, 1, 5, 5, 2, 2, 9, 9;
    const auto [z2, s2] = standardize(two);
    CHECK((z2.col(0) - z2.col(1)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("zero variance column throws") {
    Eigen::MatrixXd c(3, 1);
    c << 2, 2, 2;
    CHECK_THROWS_AS(standardize(c), input_error);
  }
}

TEST_CASE("invert_transform closed forms") {
  TransformStats stats;
  stats.mu = Eigen::VectorXd::Zero(1);
  stats.sigma = Eigen::VectorXd::Ones(1);
  SUBCASE("z=0, mu=0 gives q=0") {
    const auto res = invert_transform(Eigen::MatrixXd::Zero(2, 1), stats);
    CHECK(res.q_hat.cwiseAbs().maxCoeff() == 0.0);
    CHECK(res.clamped == 0);
  }
  SUBCASE("z*sigma+mu = ln(101) gives q=100") {
    Eigen::MatrixXd z(1, 1);
    z << std::log(101.0);
    const auto res = invert_transform(z, stats);
    CHECK(res.q_hat(0, 0) == doctest::Approx(100.0).epsilon(1e-12));
  }
  SUBCASE("negative log-space estimates clamp to zero and are counted") {
    Eigen::MatrixXd z(2, 1);
    z << -3.0, 1.0;
    const auto res = invert_transform(z, stats);
    CHECK(res.q_hat(0, 0) == 0.0);
    CHECK(res.clamped == 1);
  }
  SUBCASE("exp overflow is reported") {
    Eigen::MatrixXd z(1, 1);
    z << 800.0;
    CHECK_THROWS_AS(invert_transform(z, stats), compute_error);
  }
}

TEST_CASE("transform round trip reproduces discharge to 1e-10 relative") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const StreamflowPanel panel = random_panel(40, 4, seed);
    const auto [z, stats] = standardize(to_log(panel));
    const auto back = invert_transform(z, stats);
    const double rel =
        ((back.q_hat - panel.q).cwiseAbs().array() / (panel.q.array() + 1e-30))
            .maxCoeff();
    CHECK(rel <= 1e-10);
  }
}

TEST_CASE("split follows the chronological-suffix rule") {
  const StreamflowPanel panel = random_panel(30, 2, 11);
  const DataSplits s = split(panel, 42);
  CHECK(s.test.n() == 10);
  CHECK(s.train.n() + s.val.n() == 20);
  CHECK(std::abs(s.train.n() - s.val.n()) <= 1);
  // test is the chronological suffix
  CHECK(s.test.dates.front() == panel.dates[20]);
  CHECK(s.test.dates.back() == panel.dates.back());

  SUBCASE("partition: disjoint and exhaustive") {
    std::set<std::string> seen;
    for (const auto& part : {s.train, s.val, s.test})
      for (const auto& d : part.dates) {
        CHECK(seen.insert(format_date(d)).second);
      }
    CHECK(seen.size() == 30);
  }
  SUBCASE("identical seed gives identical splits") {
    const DataSplits t = split(panel, 42);
    CHECK(t.train.dates == s.train.dates);
    CHECK(t.val.dates == s.val.dates);
    CHECK((t.train.q - s.train.q).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("different seed moves the train/val assignment") {
    const DataSplits t = split(panel, 43);
    CHECK(t.train.dates != s.train.dates);
  }
  SUBCASE("too small panel throws") {
    const StreamflowPanel tiny = random_panel(5, 2, 1);
    CHECK_THROWS_AS(split(tiny, 1), input_error);
  }
}

TEST_CASE("sample_covariance matches the double-loop definition") {
  SUBCASE("identical standardized columns correlate at 1") {
    Eigen::MatrixXd y(4, 2);
    y << 1, 1, 5, 5, 2, 2, 9, 9;
    const auto [z, stats] = standardize(y);
    const Eigen::MatrixXd s = sample_covariance(z);
    CHECK(s(0, 1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("orthogonal columns correlate at 0") {
    Eigen::MatrixXd z(4, 2);
    z << 1, 1, -1, 1, 1, -1, -1, -1;
    const Eigen::MatrixXd s = sample_covariance(z);
    CHECK(std::abs(s(0, 1)) <= 1e-10);
  }
  SUBCASE("random panel equals the brute-force oracle") {
    Rng rng(7);
    Eigen::MatrixXd z(5, 3);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 3; ++j) z(i, j) = rng.normal();
    const Eigen::MatrixXd s = sample_covariance(z);
    const Eigen::MatrixXd ref = oracle::covariance(z);
    CHECK((s - ref).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("single row throws") {
    CHECK_THROWS_AS(sample_covariance(Eigen::MatrixXd::Ones(1, 2)), input_error);
  }
}

TEST_CASE("synthetic generator draws from the intended structure") {
  SUBCASE("one edge at p=2 leaves a visible correlation") {
    SyntheticSpec spec;
    spec.p = 2;
    spec.n = 10000;
    spec.true_edges = {{0, 1}};
    spec.precision_offdiag_magnitude = 0.5;
    spec.seed = 5;
    // For precision [[d,-m],[-m,d]], the implied correlation is m/d = 1/3.
    const auto [panel, truth] = generate_synthetic_panel(spec);
    CHECK(truth.edge_count() == 1);
    const auto [z, stats] = standardize(to_log(panel));
    const Eigen::MatrixXd s = sample_covariance(z);
    CHECK(std::abs(s(0, 1)) > 0.2);
    CHECK(s(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(0.15));
  }
  SUBCASE("no edges: off-diagonal covariances shrink as 1/sqrt(n)") {
    int ok = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
      SyntheticSpec spec;
      spec.p = 3;
      spec.n = 2500;
      spec.edge_probability = 0.0;
      spec.seed = 100 + t;
      const auto [panel, truth] = generate_synthetic_panel(spec);
      REQUIRE(truth.edge_count() == 0);
      const auto [z, stats] = standardize(to_log(panel));
      const Eigen::MatrixXd s = sample_covariance(z);
      bool all_small = true;
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
          if (std::abs(s(i, j)) >= 4.0 / std::sqrt(double(spec.n)))
            all_small = false;
      if (all_small) ++ok;
    }
    CHECK(ok >= trials * 95 / 100);
  }
  SUBCASE("same seed reproduces the panel exactly") {
    SyntheticSpec spec;
    spec.p = 4;
    spec.n = 50;
    spec.edge_probability = 0.5;
    spec.seed = 9;
    const auto [a, ga] = generate_synthetic_panel(spec);
    const auto [b, gb] = generate_synthetic_panel(spec);
    CHECK(a.q == b.q);
    CHECK(ga.edges == gb.edges);
  }
}

TEST_CASE("synthetic oracle: lambda=0 fit recovers the true precision") {
  SyntheticSpec spec;
  spec.p = 4;
  spec.n = 100000;
  spec.true_edges = {{0, 1}, {1, 2}, {2, 3}};
  spec.precision_offdiag_magnitude = 0.45;
  spec.seed = 21;
  const auto [truth_graph, theta_true] = synthetic_truth(spec);
  const auto [panel, g2] = generate_synthetic_panel(spec);
  REQUIRE(truth_graph.edges == g2.edges);
  const auto [z, stats] = standardize(to_log(panel));
  const PrecisionEstimate est = glasso_fit(sample_covariance(z), PenaltySpec{});
  CHECK((est.theta - theta_true).cwiseAbs().maxCoeff() < 0.05);
}
