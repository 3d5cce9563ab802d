#include "mefr/error.hpp"

namespace mefr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Schema: return "schema";
  case ErrorKind::DuplicateName: return "duplicate-name";
  case ErrorKind::DanglingEdge: return "dangling-edge";
  case ErrorKind::UnknownFunction: return "unknown-function";
  case ErrorKind::Io: return "io";
  case ErrorKind::NotElf: return "not-elf";
  case ErrorKind::MissingDebugInfo: return "missing-debug-info";
  case ErrorKind::MalformedDwarf: return "malformed-dwarf";
  case ErrorKind::MissingSymtab: return "missing-symtab";
  case ErrorKind::Overlap: return "overlap";
  case ErrorKind::Classification: return "classification";
  case ErrorKind::Precondition: return "precondition";
  case ErrorKind::SingleSetting: return "single-setting";
  case ErrorKind::EmptyDecomposition: return "empty-decomposition";
  case ErrorKind::Coverage: return "coverage";
  case ErrorKind::IdMismatch: return "id-mismatch";
  }
  return "unknown";
}

bool Error::is_input_error() const noexcept {
  switch (kind_) {
  case ErrorKind::Schema:
  case ErrorKind::DuplicateName:
  case ErrorKind::DanglingEdge:
  case ErrorKind::Overlap:
  case ErrorKind::Precondition:
  case ErrorKind::SingleSetting:
  case ErrorKind::Coverage:
  case ErrorKind::IdMismatch:
    return true;
  default:
    return false;
  }
}

void fail(ErrorKind kind, const std::string &message) {
  throw Error(kind, std::string(to_string(kind)) + ": " + message);
}

} // namespace mefr
