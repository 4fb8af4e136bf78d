#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace logeval::http {

using Headers = std::vector<std::pair<std::string, std::string>>;

struct Response {
  int status = 0;  // 0 when no response was received
  std::string body;
  Headers headers;
  std::string error;  // transport failure description

  // Case-insensitive lookup of the first header with this name.
  std::optional<std::string> header(const std::string& name) const;
};

struct Request {
  std::string method = "GET";
  std::string url;  // scheme://host[:port]/path?query
  Headers headers;
  std::string body;
  std::string content_type = "application/json";
  std::chrono::milliseconds timeout{30000};
};

// Never throws for transport failures; they come back as status 0.
Response send(const Request& req);

}  // namespace logeval::http
