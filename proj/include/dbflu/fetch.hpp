#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dbflu {

// Client for the public influenza surveillance HTTP API (epidata-style
// fluview endpoint). Responses are cached to disk keyed by the full request,
// so repeated and offline runs are served byte-identically from cache.
struct FetchOptions {
  std::string endpoint;  // e.g. https://api.delphi.cmu.edu/epidata/fluview/
  std::string region = "nat";
  int epiweek_from = 0;  // YYYYWW
  int epiweek_to = 0;
  int issue = -1;  // -1: latest available revision
  std::string cache_dir = "cache";
  int timeout_seconds = 30;
  bool offline = false;  // cache only; never touch the network
};

struct SurveillanceRow {
  std::string region;
  int epiweek = 0;
  int issue = 0;
  double wili_percent = 0.0;
};

struct FetchResult {
  std::vector<SurveillanceRow> rows;
  bool from_cache = false;
  std::string cache_path;
};

struct FetchError : std::runtime_error {
  bool retryable;
  FetchError(const std::string& what, bool retryable_) : std::runtime_error(what), retryable(retryable_) {}
};

FetchResult fetch_surveillance(const FetchOptions& opts);

// Appends rows to the canonical panel CSV (year, mmwr_week, wili, issue),
// creating the file with a header when needed.
void append_rows_to_panel_csv(const std::vector<SurveillanceRow>& rows, const std::string& path);

}  // namespace dbflu
