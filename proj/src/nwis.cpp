#include "gaugenet/nwis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "gaugenet/errors.hpp"
#include "httplib.h"

namespace gaugenet {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, '\t')) out.push_back(cell);
  if (!line.empty() && line.back() == '\t') out.push_back("");
  return out;
}

}  // namespace

SiteSeries parse_rdb_daily(const std::string& body) {
  std::istringstream in(body);
  std::string line;
  std::vector<std::string> header;
  bool saw_format_line = false;
  SiteSeries series;

  int site_col = -1, date_col = -1, value_col = -1, qual_col = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = split_tabs(line);
      for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        const std::string& h = header[c];
        if (h == "site_no") site_col = c;
        else if (h == "datetime") date_col = c;
        else if (h.size() > 3 && h.compare(h.size() - 3, 3, "_cd") == 0 &&
                 h != "agency_cd")
          qual_col = c;
        else if (h != "agency_cd" && value_col < 0 && h != "site_no" &&
                 h != "datetime")
          value_col = c;
      }
      if (site_col < 0 || date_col < 0 || value_col < 0)
        throw input_error("RDB header missing site_no/datetime/value columns");
      continue;
    }
    if (!saw_format_line) {
      // Field-width line such as "5s\t15s\t20d\t14n\t10s".
      saw_format_line = true;
      continue;
    }
    const std::vector<std::string> cells = split_tabs(line);
    if (static_cast<int>(cells.size()) <= value_col)
      throw input_error("short RDB data row");
    if (series.site.empty()) series.site = cells[site_col];
    else if (series.site != cells[site_col])
      throw input_error("mixed sites in one RDB response");
    const std::string& datestr = cells[date_col];
    series.dates.push_back(parse_date(datestr.substr(0, 10)));
    const std::string& val = cells[value_col];
    if (val.empty()) {
      series.values.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      try {
        series.values.push_back(std::stod(val));
      } catch (const std::exception&) {
        throw input_error("non-numeric RDB value '" + val + "'");
      }
    }
    if (qual_col >= 0 && static_cast<int>(cells.size()) > qual_col &&
        cells[qual_col].find('P') != std::string::npos)
      ++series.provisional;
  }
  if (header.empty()) throw input_error("RDB response has no header");
  if (series.dates.empty()) throw input_error("RDB response has no data rows");
  return series;
}

int RawPanel::missing_count() const {
  int count = 0;
  for (const auto& row : cells)
    for (double v : row)
      if (std::isnan(v)) ++count;
  return count;
}

RawPanel align_series(const std::vector<SiteSeries>& series, Day start, Day end) {
  if (series.empty()) throw input_error("no site series to align");
  if (end < start) throw input_error("end date before start date");
  RawPanel panel;
  const long n = (end - start).count() + 1;
  panel.dates.reserve(n);
  for (long i = 0; i < n; ++i) panel.dates.push_back(start + std::chrono::days{i});
  panel.cells.assign(n, std::vector<double>(
                            series.size(),
                            std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t s = 0; s < series.size(); ++s) {
    panel.gauge_ids.push_back(series[s].site);
    panel.provisional += series[s].provisional;
    for (std::size_t i = 0; i < series[s].dates.size(); ++i) {
      const Day d = series[s].dates[i];
      if (d < start || d > end) continue;
      panel.cells[(d - start).count()][s] = series[s].values[i];
    }
  }
  return panel;
}

namespace {

// Split "scheme://host[:port]/base" into client target and path prefix.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  std::string base = endpoint;
  std::string path_prefix;
  const auto scheme_end = base.find("://");
  if (scheme_end != std::string::npos) {
    const auto path_start = base.find('/', scheme_end + 3);
    if (path_start != std::string::npos) {
      path_prefix = base.substr(path_start);
      base = base.substr(0, path_start);
    }
  }
  return {base, path_prefix};
}

}  // namespace

RawPanel fetch_daily_values(const std::vector<std::string>& sites, Day start,
                            Day end, const std::string& endpoint) {
  if (sites.empty()) throw input_error("empty site list");
  if (end < start) throw input_error("end date before start date");

  const auto [base, path_prefix] = split_endpoint(endpoint);
  httplib::Client client(base);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);

  std::vector<SiteSeries> all;
  for (const auto& site : sites) {
    const std::string path = path_prefix + "?format=rdb&sites=" + site +
                             "&startDT=" + format_date(start) +
                             "&endDT=" + format_date(end) +
                             "&parameterCd=00060&statCd=00003";
    const httplib::Result res = client.Get(path);
    if (!res)
      throw compute_error("request failed for site " + site + ": " +
                          httplib::to_string(res.error()));
    if (res->status != 200)
      throw compute_error("HTTP " + std::to_string(res->status) +
                          " for site " + site);
    SiteSeries series = parse_rdb_daily(res->body);
    if (series.site != site) series.site = site;
    all.push_back(std::move(series));
  }
  return align_series(all, start, end);
}

SiteCoords parse_rdb_sites(const std::string& body) {
  std::istringstream in(body);
  std::string line;
  std::vector<std::string> header;
  bool saw_format_line = false;
  int site_col = -1, lat_col = -1, lon_col = -1;
  SiteCoords out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = split_tabs(line);
      for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        if (header[c] == "site_no") site_col = c;
        if (header[c] == "dec_lat_va") lat_col = c;
        if (header[c] == "dec_long_va") lon_col = c;
      }
      if (site_col < 0 || lat_col < 0 || lon_col < 0)
        throw input_error("site RDB header missing site_no/dec_lat_va/dec_long_va");
      continue;
    }
    if (!saw_format_line) {
      saw_format_line = true;
      continue;
    }
    const std::vector<std::string> cells = split_tabs(line);
    if (static_cast<int>(cells.size()) <= std::max({site_col, lat_col, lon_col}))
      throw input_error("short site RDB row");
    out.sites.push_back(cells[site_col]);
    try {
      out.lat.push_back(std::stod(cells[lat_col]));
      out.lon.push_back(std::stod(cells[lon_col]));
    } catch (const std::exception&) {
      throw input_error("non-numeric coordinate for site " + cells[site_col]);
    }
  }
  if (out.sites.empty()) throw input_error("site RDB response has no rows");
  return out;
}

SiteCoords fetch_site_coords(const std::vector<std::string>& sites,
                             const std::string& endpoint) {
  if (sites.empty()) throw input_error("empty site list");
  const auto [base, path_prefix] = split_endpoint(endpoint);
  httplib::Client client(base);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  std::string joined;
  for (const auto& s : sites) joined += (joined.empty() ? "" : ",") + s;
  const std::string path = path_prefix + "?format=rdb&sites=" + joined +
                           "&siteOutput=expanded&siteStatus=all";
  const httplib::Result res = client.Get(path);
  if (!res)
    throw compute_error("site request failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw compute_error("HTTP " + std::to_string(res->status) + " from site service");
  SiteCoords got = parse_rdb_sites(res->body);
  // reorder to the requested site order
  SiteCoords out;
  for (const auto& s : sites) {
    bool found = false;
    for (std::size_t i = 0; i < got.sites.size(); ++i)
      if (got.sites[i] == s) {
        out.sites.push_back(s);
        out.lat.push_back(got.lat[i]);
        out.lon.push_back(got.lon[i]);
        found = true;
        break;
      }
    if (!found) throw compute_error("site service returned no row for " + s);
  }
  return out;
}

}  // namespace gaugenet
