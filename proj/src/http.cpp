#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "logeval/http.hpp"

#include <httplib.h>

#include "logeval/text.hpp"

namespace logeval::http {

std::optional<std::string> Response::header(const std::string& name) const {
  const std::string want = text::to_lower(name);
  for (const auto& [k, v] : headers) {
    if (text::to_lower(k) == want) return v;
  }
  return std::nullopt;
}

namespace {

// Splits "scheme://host:port/path" into the client base and the path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const std::size_t host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_begin = url.find('/', host_begin);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

}  // namespace

Response send(const Request& req) {
  Response out;
  const auto [base, path] = split_url(req.url);
  httplib::Client cli(base);
  if (!cli.is_valid()) {
    out.error = "invalid URL: " + req.url;
    return out;
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(req.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(req.timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  cli.set_follow_location(true);

  httplib::Headers headers;
  for (const auto& [k, v] : req.headers) headers.emplace(k, v);

  httplib::Result res(nullptr, httplib::Error::Unknown);
  if (req.method == "GET") {
    res = cli.Get(path, headers);
  } else if (req.method == "POST") {
    res = cli.Post(path, headers, req.body, req.content_type);
  } else {
    out.error = "unsupported method " + req.method;
    return out;
  }
  if (!res) {
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  for (const auto& [k, v] : res->headers) out.headers.emplace_back(k, v);
  return out;
}

}  // namespace logeval::http
