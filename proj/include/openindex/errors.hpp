#pragma once

#include <stdexcept>
#include <string>

namespace openindex {

// Root of every error thrown by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed OpenAlex ID text. `component` names the offending part
// ("kind", "serial", "host").
class IdParseError : public Error {
 public:
  IdParseError(std::string component, const std::string& message)
      : Error(message), component_(std::move(component)) {}
  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

// An entity record violates one of its type invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A canonical external id is already indexed to a different entity.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// Another process holds the store's writer lock.
class StoreBusyError : public Error {
 public:
  using Error::Error;
};

class StoreError : public Error {
 public:
  using Error::Error;
};

class DumpError : public Error {
 public:
  using Error::Error;
};

// Bad filter / sort / paging request. `token` is the offending input.
class QueryError : public Error {
 public:
  QueryError(std::string token, const std::string& message)
      : Error(message), token_(std::move(token)) {}
  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

// A source record that cannot become a WorkStub.
class RecordRejected : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace openindex
