#include "logeval/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "logeval/http.hpp"
#include "logeval/text.hpp"

namespace logeval::corpus {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace std::chrono;

// ------------------------------------------------------------------ time

namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n, std::string_view whole) {
  if (pos + n > s.size()) throw ConfigError("bad timestamp '" + std::string(whole) + "'");
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      throw ConfigError("bad timestamp '" + std::string(whole) + "'");
    }
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace

Timestamp parse_timestamp(std::string_view s) {
  const std::string_view whole = s;
  s = text::trim(s);
  const int y = digits(s, 0, 4, whole);
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') {
    throw ConfigError("bad timestamp '" + std::string(whole) + "'");
  }
  const int mo = digits(s, 5, 2, whole);
  const int d = digits(s, 8, 2, whole);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ConfigError("bad date '" + std::string(whole) + "'");
  Timestamp t = time_point_cast<seconds>(sys_days{ymd});
  if (s.size() == 10) return t;
  if (s[10] != 'T' && s[10] != ' ') throw ConfigError("bad timestamp '" + std::string(whole) + "'");
  const int hh = digits(s, 11, 2, whole);
  const int mm = digits(s, 14, 2, whole);
  const int ss = digits(s, 17, 2, whole);
  if (s[13] != ':' || s[16] != ':' || hh > 23 || mm > 59 || ss > 60) {
    throw ConfigError("bad timestamp '" + std::string(whole) + "'");
  }
  t += hours{hh} + minutes{mm} + seconds{ss};
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  if (pos == s.size() || (s[pos] == 'Z' && pos + 1 == s.size())) return t;
  if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
    const int oh = digits(s, pos + 1, 2, whole);
    const int om = digits(s, pos + 4, 2, whole);
    const seconds off = hours{oh} + minutes{om};
    return s[pos] == '+' ? t - off : t + off;
  }
  throw ConfigError("bad timestamp '" + std::string(whole) + "'");
}

Date parse_date(std::string_view s) { return floor<days>(parse_timestamp(s)); }

namespace {
std::string pad(long long v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}
}  // namespace

std::string format_date(Date d) {
  const year_month_day ymd{d};
  return pad(static_cast<int>(ymd.year()), 4) + "-" +
         pad(static_cast<unsigned>(ymd.month()), 2) + "-" + pad(static_cast<unsigned>(ymd.day()), 2);
}

std::string format_timestamp(Timestamp t) {
  const Date d = floor<days>(t);
  const hh_mm_ss<seconds> tod{t - d};
  return format_date(d) + "T" + pad(tod.hours().count(), 2) + ":" + pad(tod.minutes().count(), 2) +
         ":" + pad(tod.seconds().count(), 2) + "Z";
}

// --------------------------------------------------------------- records

json to_json(const RepoRecord& r) {
  return json{{"repo_id", r.repo_id},
              {"stars", r.stars},
              {"contributors", r.contributors},
              {"last_push", format_timestamp(r.last_push)},
              {"created_at", format_timestamp(r.created_at)},
              {"primary_language", r.primary_language},
              {"commits", r.commits}};
}

RepoRecord repo_from_json(const json& j) {
  try {
    RepoRecord r;
    r.repo_id = j.at("repo_id").get<std::string>();
    r.stars = j.at("stars").get<long long>();
    r.contributors = j.at("contributors").get<long long>();
    r.last_push = parse_timestamp(j.at("last_push").get<std::string>());
    r.created_at = parse_timestamp(j.at("created_at").get<std::string>());
    r.primary_language =
        j.at("primary_language").is_null() ? "" : j.at("primary_language").get<std::string>();
    r.commits = j.at("commits").get<long long>();
    if (r.stars < 0 || r.contributors < 0 || r.commits < 0) {
      throw ConfigError("negative count in record for " + r.repo_id);
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed repository record: ") + e.what());
  }
}

long long days_between(Timestamp earlier, Date later) {
  return duration_cast<days>(sys_seconds{later} - earlier).count();
}

std::vector<RepoRecord> select_repos(const std::vector<RepoRecord>& records,
                                     const SelectionCriteria& c, Date as_of) {
  std::vector<RepoRecord> out;
  for (const auto& r : records) {
    if (r.primary_language != c.language) continue;
    if (r.stars < c.min_stars || r.contributors < c.min_contributors) continue;
    const auto since = floor<days>(sys_seconds{as_of} - r.last_push).count();
    if (since > c.max_days_since_push) continue;
    out.push_back(r);
  }
  return out;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string fixture_name(const std::string& repo_id) {
  std::string s = repo_id;
  const auto slash = s.find('/');
  if (slash != std::string::npos) s.replace(slash, 1, "__");
  return s + ".json";
}

}  // namespace

FetchResult fetch_metadata_offline(const std::vector<std::string>& repo_ids,
                                   const fs::path& fixture_dir) {
  FetchResult out;
  for (const auto& id : repo_ids) {
    const fs::path p = fixture_dir / fixture_name(id);
    if (!fs::exists(p)) {
      out.unresolved.push_back({id, "no fixture record"});
      continue;
    }
    try {
      RepoRecord r = repo_from_json(json::parse(read_file(p)));
      if (r.repo_id != id) r.repo_id = id;
      out.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      out.unresolved.push_back({id, std::string("malformed fixture: ") + e.what()});
    } catch (const ConfigError& e) {
      out.unresolved.push_back({id, e.what()});
    }
  }
  return out;
}

GithubOptions GithubOptions::from_env() {
  GithubOptions o;
  if (const char* base = std::getenv("GITHUB_API_URL"); base != nullptr && *base != '\0') {
    o.api_base = base;
  }
  if (const char* tok = std::getenv("GITHUB_TOKEN"); tok != nullptr) o.token = tok;
  return o;
}

namespace {

class GithubClient {
 public:
  explicit GithubClient(const GithubOptions& o) : o_(o) {
    while (!o_.api_base.empty() && o_.api_base.back() == '/') o_.api_base.pop_back();
    if (!o_.sleep) o_.sleep = [](seconds s) { std::this_thread::sleep_for(s); };
  }

  http::Response get(const std::string& path) {
    for (int wait = 0;; ++wait) {
      http::Request req;
      req.url = o_.api_base + path;
      req.timeout = o_.timeout;
      req.headers = {{"Accept", "application/vnd.github+json"},
                     {"User-Agent", "logeval"}};
      if (!o_.token.empty()) req.headers.emplace_back("Authorization", "Bearer " + o_.token);
      http::Response res = http::send(req);
      if (res.status == 0) throw IoError("GitHub API unreachable: " + res.error);
      const bool limited =
          res.status == 429 ||
          (res.status == 403 && (res.header("Retry-After") ||
                                 res.header("X-RateLimit-Remaining").value_or("") == "0"));
      if (limited) {
        const seconds delay = retry_delay(res);
        if (wait >= o_.max_rate_limit_waits || delay > o_.max_wait) {
          throw RateLimited("GitHub API rate limit exceeded", delay);
        }
        o_.sleep(delay);
        continue;
      }
      if (res.status == 401 || res.status == 403) {
        throw AuthError("GitHub API refused credentials (HTTP " + std::to_string(res.status) + ")");
      }
      return res;
    }
  }

 private:
  seconds retry_delay(const http::Response& res) const {
    if (auto h = res.header("Retry-After")) return seconds{std::atoll(h->c_str())};
    if (auto h = res.header("X-RateLimit-Reset")) {
      const long long reset = std::atoll(h->c_str());
      const long long now =
          duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
      return seconds{std::max(0LL, reset - now)};
    }
    return seconds{60};
  }

  GithubOptions o_;
};

// Count of a listing requested with per_page=1: the last page number from the
// Link header, or the element count of the single page.
long long listing_count(const http::Response& res) {
  if (auto link = res.header("Link")) {
    const std::string& l = *link;
    const auto rel = l.find("rel=\"last\"");
    if (rel != std::string::npos) {
      const auto lt = l.rfind('<', rel);
      const auto gt = l.find('>', lt);
      const std::string url = l.substr(lt + 1, gt - lt - 1);
      for (std::size_t p = url.find("page="); p != std::string::npos;
           p = url.find("page=", p + 1)) {
        if (p > 0 && url[p - 1] != '?' && url[p - 1] != '&') continue;
        return std::atoll(url.c_str() + p + 5);
      }
    }
  }
  const json j = json::parse(res.body, nullptr, false);
  return j.is_array() ? static_cast<long long>(j.size()) : 0;
}

}  // namespace

FetchResult fetch_metadata_live(const std::vector<std::string>& repo_ids,
                                const GithubOptions& options) {
  GithubClient gh(options);
  FetchResult out;
  for (const auto& id : repo_ids) {
    const http::Response repo = gh.get("/repos/" + id);
    if (repo.status == 404 || repo.status == 451) {
      out.unresolved.push_back({id, "HTTP " + std::to_string(repo.status)});
      continue;
    }
    if (repo.status != 200) {
      out.unresolved.push_back({id, "HTTP " + std::to_string(repo.status)});
      continue;
    }
    try {
      const json j = json::parse(repo.body);
      RepoRecord r;
      r.repo_id = id;
      r.stars = j.at("stargazers_count").get<long long>();
      r.primary_language = j.value("language", json()).is_string() ? j["language"].get<std::string>() : "";
      r.last_push = parse_timestamp(j.at("pushed_at").get<std::string>());
      r.created_at = parse_timestamp(j.at("created_at").get<std::string>());

      const http::Response contrib = gh.get("/repos/" + id + "/contributors?per_page=1&anon=1");
      r.contributors = contrib.status == 200 ? listing_count(contrib) : 0;
      const http::Response commits = gh.get("/repos/" + id + "/commits?per_page=1");
      r.commits = commits.status == 200 ? listing_count(commits) : 0;
      out.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      out.unresolved.push_back({id, std::string("malformed API response: ") + e.what()});
    } catch (const ConfigError& e) {
      out.unresolved.push_back({id, e.what()});
    }
  }
  return out;
}

std::vector<std::string> read_repo_list(const fs::path& path) {
  std::vector<std::string> ids;
  for (const auto& line : text::split_lines(read_file(path))) {
    std::string_view l = line;
    if (auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = text::trim(l);
    if (!l.empty()) ids.emplace_back(l);
  }
  return ids;
}

// ----------------------------------------------------------------- files

bool sanitize_utf8(std::string& s) {
  static const std::string kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(s.size());
  bool replaced = false;
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = p[i];
    std::size_t len = 0;
    unsigned lo = 0x80;
    unsigned hi = 0xBF;
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
      ++i;
      continue;
    }
    if (c >= 0xC2 && c <= 0xDF) {
      len = 2;
    } else if (c >= 0xE0 && c <= 0xEF) {
      len = 3;
      if (c == 0xE0) lo = 0xA0;
      if (c == 0xED) hi = 0x9F;
    } else if (c >= 0xF0 && c <= 0xF4) {
      len = 4;
      if (c == 0xF0) lo = 0x90;
      if (c == 0xF4) hi = 0x8F;
    }
    std::size_t good = 0;
    if (len > 0) {
      good = 1;
      for (std::size_t k = 1; k < len && i + k < n; ++k) {
        const unsigned char cc = p[i + k];
        const unsigned a = k == 1 ? lo : 0x80;
        const unsigned b = k == 1 ? hi : 0xBF;
        if (cc < a || cc > b) break;
        ++good;
      }
    }
    if (len > 0 && good == len) {
      out.append(s, i, len);
      i += len;
    } else {
      out += kReplacement;
      replaced = true;
      i += std::max<std::size_t>(good, 1);
    }
  }
  if (replaced) s.swap(out);
  return replaced;
}

CollectResult collect_files(const fs::path& dir, const std::string& repo_id) {
  CollectResult out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  fs::recursive_directory_iterator it(dir, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) {
      out.io_errors.push_back(ec.message());
      ec.clear();
      continue;
    }
    const auto& entry = *it;
    if (entry.is_directory(ec) && entry.path().filename() == ".git") {
      it.disable_recursion_pending();
      continue;
    }
    if (!entry.is_regular_file(ec) || entry.path().extension() != ".py") continue;
    const std::string rel = fs::relative(entry.path(), dir, ec).generic_string();
    try {
      CollectedFile cf;
      cf.file.file_id = rel;
      cf.file.repo_id = repo_id;
      cf.file.content = read_file(entry.path());
      cf.invalid_utf8 = sanitize_utf8(cf.file.content);
      out.files.push_back(std::move(cf));
    } catch (const IoError& e) {
      out.io_errors.push_back(e.what());
    }
  }
  std::sort(out.files.begin(), out.files.end(), [](const auto& a, const auto& b) {
    return a.file.file_id < b.file.file_id;
  });
  return out;
}

FilterResult filter_logged_files(const std::vector<SourceFile>& files,
                                 const ExtractionConfig& cfg) {
  FilterResult out;
  for (const auto& f : files) {
    try {
      if (!imports_logging(f)) continue;
      if (extract_logs(f, cfg).empty()) continue;
      out.kept.push_back(f);
    } catch (const ParseError&) {
      out.parse_failures.push_back(f.file_id);
    }
  }
  return out;
}

// ----------------------------------------------------------------- stats

FieldStats field_stats(std::vector<double> v) {
  FieldStats s;
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  const std::size_t n = v.size();
  s.median = n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  s.min = v.front();
  s.max = v.back();
  return s;
}

std::map<std::string, FieldStats> repo_stats(const std::vector<RepoRecord>& repos, Date as_of) {
  std::vector<double> stars, commits, contributors, since, age;
  for (const auto& r : repos) {
    stars.push_back(static_cast<double>(r.stars));
    commits.push_back(static_cast<double>(r.commits));
    contributors.push_back(static_cast<double>(r.contributors));
    since.push_back(static_cast<double>(floor<days>(sys_seconds{as_of} - r.last_push).count()));
    age.push_back(duration<double>(sys_seconds{as_of} - r.created_at).count() /
                  (86400.0 * 365.25));
  }
  return {{"stars", field_stats(stars)},
          {"commits", field_stats(commits)},
          {"contributors", field_stats(contributors)},
          {"days_since_push", field_stats(since)},
          {"age_years", field_stats(age)}};
}

json to_json(const CorpusManifest& m) {
  json repos = json::array();
  for (const auto& r : m.selected_repos) repos.push_back(to_json(r));
  json stats = json::object();
  for (const auto& [k, s] : m.stats) {
    stats[k] = {{"mean", s.mean}, {"median", s.median}, {"min", s.min}, {"max", s.max}};
  }
  return json{{"snapshot_date", format_date(m.snapshot_date)},
              {"selected_repos", repos},
              {"qualifying_files", m.qualifying_files},
              {"stats", stats}};
}

}  // namespace logeval::corpus
