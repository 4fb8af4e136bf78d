#pragma once

#include <stdexcept>
#include <string>

namespace logeval {

// Base of every error the harness raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::string file_id, int line, int column, const std::string& what)
      : Error(file_id + ":" + std::to_string(line) + ":" +
              std::to_string(column) + ": " + what),
        file_id_(std::move(file_id)),
        line_(line),
        column_(column),
        reason_(what) {}

  const std::string& file_id() const { return file_id_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& reason() const { return reason_; }

  ParseError with_file(std::string file_id) const {
    return ParseError(std::move(file_id), line_, column_, reason_);
  }

 private:
  std::string file_id_;
  int line_;
  int column_;
  std::string reason_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("bucket table is empty") {}
};

class NoPairs : public Error {
 public:
  NoPairs() : Error("no GT/LLM pairs with an LLM log present") {}
};

class MissingSource : public Error {
 public:
  explicit MissingSource(const std::string& file_id)
      : Error("source not found for " + file_id) {}
};

}  // namespace logeval
