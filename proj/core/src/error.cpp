#include "typetree/error.hpp"

namespace typetree {

ParseError::ParseError(const std::string& msg, int line, int column)
    : Error(ErrorKind::parse,
            "parse error at line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::structural: return "structural";
    case ErrorKind::parse: return "parse";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::condition: return "condition";
    case ErrorKind::model: return "model";
    case ErrorKind::inference: return "inference";
    case ErrorKind::resource: return "resource";
    case ErrorKind::state: return "state";
    case ErrorKind::numerical: return "numerical";
  }
  return "unknown";
}

}  // namespace typetree
