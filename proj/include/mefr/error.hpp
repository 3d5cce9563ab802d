#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mefr {

enum class ErrorKind {
  Schema,
  DuplicateName,
  DanglingEdge,
  UnknownFunction,
  Io,
  NotElf,
  MissingDebugInfo,
  MalformedDwarf,
  MissingSymtab,
  Overlap,
  Classification,
  Precondition,
  SingleSetting,
  EmptyDecomposition,
  Coverage,
  IdMismatch,
};

std::string_view to_string(ErrorKind kind);

// All library failures surface as mefr::Error; callers branch on kind().
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Input-shaped failures (bad files, bad arguments) as opposed to
  // processing failures. The CLI maps these to exit code 2.
  bool is_input_error() const noexcept;

private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string &message);

} // namespace mefr
