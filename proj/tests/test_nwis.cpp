#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <atomic>
#include <cmath>
#include <thread>

#include "doctest.h"
#include "gaugenet/errors.hpp"
#include "gaugenet/io.hpp"
#include "gaugenet/nwis.hpp"
#include "httplib.h"
#include "test_support.hpp"

using namespace gaugenet;

namespace {

std::string rdb_body(const std::string& site,
                     const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string body =
      "# ---------------------------------- WARNING ------------------\n"
      "# Provisional data are subject to revision.\n"
      "#\n"
      "agency_cd\tsite_no\tdatetime\t85234_00060_00003\t85234_00060_00003_cd\n"
      "5s\t15s\t20d\t14n\t10s\n";
  for (const auto& [date, value] : rows)
    body += "USGS\t" + site + "\t" + date + "\t" + value + "\tA\n";
  return body;
}

}  // namespace

TEST_CASE("parse_rdb_daily") {
  SUBCASE("well-formed body") {
    const SiteSeries s = parse_rdb_daily(rdb_body(
        "03217500", {{"1951-01-01", "42.0"}, {"1951-01-02", "37.5"}}));
    CHECK(s.site == "03217500");
    REQUIRE(s.dates.size() == 2);
    CHECK(format_date(s.dates[1]) == "1951-01-02");
    CHECK(s.values[0] == 42.0);
    CHECK(s.provisional == 0);
  }
  SUBCASE("empty value cells become NaN") {
    const SiteSeries s = parse_rdb_daily(
        rdb_body("03217500", {{"1951-01-01", ""}, {"1951-01-02", "5"}}));
    CHECK(std::isnan(s.values[0]));
    CHECK(s.values[1] == 5.0);
  }
  SUBCASE("provisional qualifier is counted") {
    std::string body = rdb_body("03217500", {{"1951-01-01", "42.0"}});
    body += "USGS\t03217500\t1951-01-02\t10\tP\n";
    CHECK(parse_rdb_daily(body).provisional == 1);
  }
  SUBCASE("missing header is an error") {
    CHECK_THROWS_AS(parse_rdb_daily("# only comments\n"), input_error);
    CHECK_THROWS_AS(parse_rdb_daily("a\tb\tc\n5s\t5s\t5s\n"), input_error);
  }
}

TEST_CASE("align_series pads the full day range") {
  SiteSeries a;
  a.site = "A";
  a.dates = {parse_date("1951-01-01"), parse_date("1951-01-03")};
  a.values = {1.0, 3.0};
  SiteSeries b;
  b.site = "B";
  b.dates = {parse_date("1951-01-01"), parse_date("1951-01-02"),
             parse_date("1951-01-03")};
  b.values = {4.0, 5.0, 6.0};
  const RawPanel panel =
      align_series({a, b}, parse_date("1951-01-01"), parse_date("1951-01-03"));
  CHECK(panel.dates.size() == 3);
  CHECK(panel.gauge_ids == std::vector<std::string>{"A", "B"});
  CHECK(panel.cells[0][0] == 1.0);
  CHECK(std::isnan(panel.cells[1][0]));  // A missing on the 2nd
  CHECK(panel.cells[1][1] == 5.0);
  CHECK(panel.missing_count() == 1);
  SUBCASE("out-of-range rows are excluded") {
    const RawPanel narrow =
        align_series({a, b}, parse_date("1951-01-02"), parse_date("1951-01-02"));
    CHECK(narrow.dates.size() == 1);
    CHECK(std::isnan(narrow.cells[0][0]));
    CHECK(narrow.cells[0][1] == 5.0);
  }
}

TEST_CASE("fetch_daily_values against a local mock server") {
  httplib::Server server;
  server.Get("/nwis/dv", [&](const httplib::Request& req, httplib::Response& res) {
    const std::string site = req.get_param_value("sites");
    if (site == "11111111") {
      res.set_content(rdb_body(site, {{"1951-01-01", "1.5"},
                                      {"1951-01-02", "2.5"},
                                      {"1951-01-03", "3.5"}}),
                      "text/plain");
    } else if (site == "22222222") {
      res.set_content(rdb_body(site, {{"1951-01-01", "10"},
                                      {"1951-01-02", "20"},
                                      {"1951-01-03", "30"}}),
                      "text/plain");
    } else {
      res.status = 404;
    }
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread runner([&]() { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string endpoint =
      "http://127.0.0.1:" + std::to_string(port) + "/nwis/dv";
  SUBCASE("two sites, three days") {
    const RawPanel panel =
        fetch_daily_values({"11111111", "22222222"}, parse_date("1951-01-01"),
                           parse_date("1951-01-03"), endpoint);
    CHECK(panel.dates.size() == 3);
    CHECK(panel.gauge_ids.size() == 2);
    CHECK(panel.cells[2][1] == 30.0);
    CHECK(panel.missing_count() == 0);
    // written CSV loads back as a clean panel
    testsup::TempFile f("fetched.csv");
    write_panel_csv(panel, f.str());
    const StreamflowPanel loaded = load_panel(f.str(), MissingPolicy::reject);
    CHECK(loaded.n() == 3);
    CHECK(loaded.p() == 2);
  }
  SUBCASE("missing site surfaces the HTTP status") {
    CHECK_THROWS_AS(fetch_daily_values({"99999999"}, parse_date("1951-01-01"),
                                       parse_date("1951-01-03"), endpoint),
                    compute_error);
  }
  server.stop();
  runner.join();
}

TEST_CASE("empty site list fails before any request") {
  CHECK_THROWS_AS(fetch_daily_values({}, parse_date("1951-01-01"),
                                     parse_date("1951-01-02"), "http://x/y"),
                  input_error);
}
