#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace typetree {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorKind {
  usage,        // bad input text, unknown flags
  structural,   // malformed tree
  parse,        // Newick / config syntax
  parameter,    // invalid model parameters
  condition,    // operation precondition on params not met
  model,        // reducible urn / B, empty restriction
  inference,    // estimator guard tripped
  resource,     // lineage cap exceeded
  state,        // empty urn etc.
  numerical     // solver failure, residual too large
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class NonIdentifiableError : public Error {
 public:
  NonIdentifiableError(const std::string& msg, std::vector<std::vector<double>> null_space)
      : Error(ErrorKind::inference, msg), null_space_(std::move(null_space)) {}
  /// Basis vectors of the null space of the offending linear system.
  const std::vector<std::vector<double>>& null_space() const noexcept { return null_space_; }

 private:
  std::vector<std::vector<double>> null_space_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

const char* to_string(ErrorKind kind);

}  // namespace typetree
