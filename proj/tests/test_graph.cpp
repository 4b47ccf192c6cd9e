#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "gaugenet/errors.hpp"
#include "gaugenet/graph.hpp"
#include "gaugenet/io.hpp"
#include "gaugenet/rng.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace gaugenet;

namespace {

Eigen::MatrixXd theta_with_magnitudes(const std::vector<double>& mags) {
  // 3x3 symmetric with the three off-diagonal magnitudes (01, 02, 12).
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(3, 3) * 2.0;
  t(0, 1) = t(1, 0) = mags[0];
  t(0, 2) = t(2, 0) = -mags[1];
  t(1, 2) = t(2, 1) = mags[2];
  return t;
}

}  // namespace

TEST_CASE("graph_from_precision thresholds strictly") {
  const Eigen::MatrixXd t = theta_with_magnitudes({0.9, 0.5, 0.1});
  CHECK(graph_from_precision(t, 0.3).edge_count() == 2);
  CHECK(graph_from_precision(t, 0.0).edge_count() == 3);
  CHECK(graph_from_precision(t, 0.9).edge_count() == 0);  // strict >
  SUBCASE("tau=0 on a dense matrix gives the complete graph") {
    Eigen::MatrixXd dense = Eigen::MatrixXd::Constant(5, 5, 0.2);
    dense.diagonal().setConstant(1.0);
    CHECK(graph_from_precision(dense, 0.0).edge_count() ==
          complete_edge_count(5));
  }
  SUBCASE("edge count is non-increasing in tau") {
    Rng rng(5);
    const Eigen::MatrixXd s = oracle::random_spd(6, rng);
    int prev = complete_edge_count(6) + 1;
    for (double tau = 0.0; tau <= 1.0; tau += 0.05) {
      const int count = graph_from_precision(s, tau).edge_count();
      CHECK(count <= prev);
      prev = count;
    }
  }
}

TEST_CASE("choose_tau_for_k sort-and-cut with ties dropped together") {
  const Eigen::MatrixXd t = theta_with_magnitudes({0.9, 0.5, 0.1});
  SUBCASE("budget 2 cuts at the smallest magnitude") {
    const double tau = choose_tau_for_k(t, 2);
    CHECK(tau == doctest::Approx(0.1));
    CHECK(graph_from_precision(t, tau).edge_count() == 2);
  }
  SUBCASE("budget at the nonzero count means no truncation") {
    CHECK(choose_tau_for_k(t, 3) == 0.0);
    CHECK(choose_tau_for_k(t, 10) == 0.0);
  }
  SUBCASE("ties drop together") {
    const Eigen::MatrixXd tt = theta_with_magnitudes({0.5, 0.5, 0.2});
    const double tau = choose_tau_for_k(tt, 1);
    CHECK(tau == doctest::Approx(0.5));
    CHECK(graph_from_precision(tt, tau).edge_count() == 0);
  }
  SUBCASE("composition bound and monotonicity in k") {
    Rng rng(6);
    const Eigen::MatrixXd s = oracle::random_spd(8, rng);
    int prev = -1;
    for (int k = 0; k <= complete_edge_count(8); ++k) {
      const int count =
          graph_from_precision(s, choose_tau_for_k(s, k)).edge_count();
      CHECK(count <= k);
      CHECK(count >= prev);
      prev = count;
    }
  }
}

TEST_CASE("dist_graph nearest-neighbor construction") {
  GaugeCoords coords;
  coords.gauge_ids = {"A", "B", "C"};
  coords.lat = {0.0, 0.0, 0.0};
  coords.lon = {0.0, 0.01, 0.03};  // collinear at relative distances 0,1,3
  SUBCASE("m=1 merges mutual picks") {
    const GaugeGraph g = dist_graph(coords, 1);
    CHECK(g.edge_count() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 2));
    CHECK_FALSE(g.has_edge(0, 2));
  }
  SUBCASE("m = p-1 gives the complete graph") {
    CHECK(dist_graph(coords, 2).edge_count() == complete_edge_count(3));
  }
  SUBCASE("too few gauges") {
    CHECK_THROWS_AS(dist_graph(coords, 3), input_error);
  }
  SUBCASE("every gauge reaches degree >= m and edges <= m*p") {
    GaugeCoords many;
    Rng rng(8);
    for (int i = 0; i < 9; ++i) {
      many.gauge_ids.push_back("s" + std::to_string(i));
      many.lat.push_back(38.0 + rng.uniform());
      many.lon.push_back(-84.0 + rng.uniform());
    }
    for (int m = 1; m <= 3; ++m) {
      const GaugeGraph g = dist_graph(many, m);
      CHECK(g.edge_count() <= m * 9);
      for (int j = 0; j < 9; ++j)
        CHECK(static_cast<int>(g.neighbors(j).size()) >= m);
    }
  }
}

TEST_CASE("corr_graph picks the highest-correlation donors") {
  SUBCASE("prescribed correlations") {
    Eigen::MatrixXd corr(3, 3);
    corr << 1.0, 0.9, 0.2, 0.9, 1.0, 0.6, 0.2, 0.6, 1.0;
    const Eigen::MatrixXd z = oracle::exact_correlation_sample(corr);
    const GaugeGraph g = corr_graph(z, 1, {"a", "b", "c"});
    CHECK(g.edge_count() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 2));
  }
  SUBCASE("duplicate columns always pair up") {
    Rng rng(9);
    Eigen::MatrixXd z(30, 3);
    for (int i = 0; i < 30; ++i) {
      z(i, 0) = rng.normal();
      z(i, 1) = z(i, 0);
      z(i, 2) = rng.normal();
    }
    const GaugeGraph g = corr_graph(z, 1, {"a", "b", "c"});
    CHECK(g.has_edge(0, 1));
  }
}

TEST_CASE("apply_role_constraints removes same-role edges only") {
  GaugeGraph g;
  g.p = 4;
  g.gauge_ids = {"w", "x", "y", "z"};
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  SUBCASE("empty sets leave the graph unchanged") {
    const GaugeGraph out = apply_role_constraints(g, {}, {});
    CHECK(out.edges == g.edges);
  }
  SUBCASE("donor-donor edges are dropped, mixed edges stay") {
    const GaugeGraph out = apply_role_constraints(g, {"w", "x"}, {"y", "z"});
    CHECK_FALSE(out.has_edge(0, 1));  // donor-donor
    CHECK(out.has_edge(1, 2));        // donor-target survives
    CHECK_FALSE(out.has_edge(2, 3));  // target-target
  }
  SUBCASE("idempotent") {
    const GaugeGraph once = apply_role_constraints(g, {"w", "x"}, {});
    const GaugeGraph twice = apply_role_constraints(once, {"w", "x"}, {});
    CHECK(once.edges == twice.edges);
  }
  SUBCASE("unknown gauge id") {
    CHECK_THROWS_AS(apply_role_constraints(g, {"nope"}, {}), input_error);
  }
}

TEST_CASE("donors_of lists neighbors in ascending order") {
  GaugeGraph g;
  g.p = 4;
  g.gauge_ids = {"a", "b", "c", "d"};
  SUBCASE("isolated node") { CHECK(donors_of(g, 2).empty()); }
  SUBCASE("complete graph") {
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) g.add_edge(i, j);
    CHECK(donors_of(g, 2) == std::vector<int>{0, 1, 3});
  }
  SUBCASE("path") {
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    CHECK(donors_of(g, 1) == std::vector<int>{0, 2});
  }
}

TEST_CASE("graph JSON round trip") {
  GaugeGraph g;
  g.p = 3;
  g.gauge_ids = {"x1", "x2", "x3"};
  g.add_edge(2, 0);
  g.add_edge(1, 2);
  testsup::TempFile f("graph.json");
  save_graph_json(g, f.str());
  const GaugeGraph back = load_graph_json(f.str());
  CHECK(back.p == 3);
  CHECK(back.gauge_ids == g.gauge_ids);
  CHECK(back.edges == g.edges);
}

TEST_CASE("coordinates CSV round trip and validation") {
  GaugeCoords coords;
  coords.gauge_ids = {"A", "B"};
  coords.lat = {39.5, 38.25};
  coords.lon = {-84.0, -85.125};
  testsup::TempFile f("coords.csv");
  write_coords_csv(coords, f.str());
  const GaugeCoords back = load_coords_csv(f.str());
  CHECK(back.gauge_ids == coords.gauge_ids);
  CHECK(back.lat[1] == coords.lat[1]);
  SUBCASE("latitude bounds enforced") {
    testsup::TempFile bad("coords_bad.csv", "gauge_id,lat,lon\nA,95.0,0.0\n");
    CHECK_THROWS_AS(load_coords_csv(bad.str()), input_error);
  }
}

TEST_CASE("haversine sanity") {
  // one degree of longitude at the equator is about 111.2 km
  CHECK(haversine_km(0, 0, 0, 1) == doctest::Approx(111.2).epsilon(0.01));
  CHECK(haversine_km(39, -84, 39, -84) == 0.0);
}
