#pragma once

#include <string>
#include <vector>

#include "gaugenet/dates.hpp"

namespace gaugenet {

// One site's daily series as parsed from an RDB (tab-delimited) response.
struct SiteSeries {
  std::string site;
  std::vector<Day> dates;
  std::vector<double> values;
  int provisional = 0;  // rows carrying a P qualifier
};

// Parses a USGS daily-values RDB body: '#' comment lines, a header line,
// a format line, then rows of agency / site / datetime / value / qualifier.
SiteSeries parse_rdb_daily(const std::string& body);

// Daily-values table with possibly missing cells (NaN), as written to a
// panel CSV.
struct RawPanel {
  std::vector<Day> dates;
  std::vector<std::string> gauge_ids;
  std::vector<std::vector<double>> cells;  // [row][col], NaN = missing
  int provisional = 0;                     // rows flagged P across all sites

  int missing_count() const;
};

// Aligns per-site series on the full [start, end] day range.
RawPanel align_series(const std::vector<SiteSeries>& series, Day start, Day end);

// Fetches each site's daily values from `endpoint` (a URL such as
// http://host:port/nwis/dv) and aligns them. Issues one request per site.
RawPanel fetch_daily_values(const std::vector<std::string>& sites, Day start,
                            Day end, const std::string& endpoint);

// Parses a site-service RDB body (expanded site output) for decimal
// latitude/longitude. Rows keep the requested site order.
struct SiteCoords {
  std::vector<std::string> sites;
  std::vector<double> lat;
  std::vector<double> lon;
};
SiteCoords parse_rdb_sites(const std::string& body);

// One request against a site-service endpoint such as
// http://host:port/nwis/site.
SiteCoords fetch_site_coords(const std::vector<std::string>& sites,
                             const std::string& endpoint);

}  // namespace gaugenet
