#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "dbflu/fetch.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dbflu/csv.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace dbflu {

namespace {

struct ParsedUrl {
  std::string scheme_host;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw FetchError("fetch: endpoint must include a scheme: " + url, false);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string cache_file_name(const FetchOptions& opts) {
  std::ostringstream name;
  name << "fluview_" << opts.region << '_' << opts.epiweek_from << '-' << opts.epiweek_to << '_'
       << (opts.issue >= 0 ? std::to_string(opts.issue) : "latest") << ".json";
  return name.str();
}

std::vector<SurveillanceRow> parse_body(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw FetchError(std::string("fetch: response is not valid JSON: ") + e.what(), false);
  }
  if (!doc.contains("result")) throw FetchError("fetch: response missing 'result'", false);
  const int result = doc["result"].get<int>();
  if (result == -2) return {};  // no data for the requested range
  if (result != 1) {
    throw FetchError("fetch: API error: " + doc.value("message", std::string("result=") + std::to_string(result)),
                     false);
  }
  std::vector<SurveillanceRow> rows;
  for (const auto& item : doc["epidata"]) {
    SurveillanceRow row;
    row.region = item.value("region", "nat");
    row.epiweek = item.at("epiweek").get<int>();
    row.issue = item.value("issue", row.epiweek);
    row.wili_percent = item.at("wili").get<double>();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

FetchResult fetch_surveillance(const FetchOptions& opts) {
  if (opts.endpoint.empty()) throw FetchError("fetch: no endpoint configured", false);
  if (opts.epiweek_from <= 0 || opts.epiweek_to < opts.epiweek_from) {
    throw FetchError("fetch: malformed epiweek range", false);
  }
  fs::create_directories(opts.cache_dir);
  const fs::path cache_path = fs::path(opts.cache_dir) / cache_file_name(opts);

  FetchResult result;
  result.cache_path = cache_path.string();
  if (fs::exists(cache_path)) {
    std::ifstream in(cache_path, std::ios::binary);
    std::stringstream body;
    body << in.rdbuf();
    result.rows = parse_body(body.str());
    result.from_cache = true;
    return result;
  }
  if (opts.offline) throw FetchError("fetch: offline and not cached: " + cache_path.string(), true);

  const ParsedUrl url = split_url(opts.endpoint);
  httplib::Client client(url.scheme_host);
  client.set_connection_timeout(opts.timeout_seconds);
  client.set_read_timeout(opts.timeout_seconds);
  httplib::Params params{{"regions", opts.region},
                         {"epiweeks", std::to_string(opts.epiweek_from) + "-" + std::to_string(opts.epiweek_to)}};
  if (opts.issue >= 0) params.emplace("issues", std::to_string(opts.issue));

  const auto res = client.Get(url.path, params, httplib::Headers{});
  if (!res) {
    throw FetchError("fetch: connection failed (" + httplib::to_string(res.error()) + ")", true);
  }
  if (res->status >= 500) throw FetchError("fetch: server error " + std::to_string(res->status), true);
  if (res->status != 200) throw FetchError("fetch: HTTP status " + std::to_string(res->status), false);

  // Validate before caching so a bad body is never served later.
  result.rows = parse_body(res->body);
  std::ofstream out(cache_path, std::ios::binary);
  out << res->body;
  result.from_cache = false;
  return result;
}

void append_rows_to_panel_csv(const std::vector<SurveillanceRow>& rows, const std::string& path) {
  const bool fresh = !fs::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("append_rows_to_panel_csv: cannot open " + path);
  if (fresh) out << "year,mmwr_week,wili,issue\n";
  for (const auto& row : rows) {
    out << row.epiweek / 100 << ',' << row.epiweek % 100 << ',' << format_double(row.wili_percent) << ','
        << row.issue << '\n';
  }
}

}  // namespace dbflu
