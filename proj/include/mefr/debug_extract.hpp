#pragma once

// Native extraction of line tables, function ranges and direct call edges
// from unstripped ELF binaries.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mefr/elf.hpp"
#include "mefr/graph.hpp"

namespace mefr {

struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

struct LineRecord {
  std::uint64_t address = 0;
  std::string file;
  std::uint32_t line = 1;

  auto operator<=>(const LineRecord &) const = default;
};

// Decodes every line-number program in .debug_line (DWARF 2-5). End-of-
// sequence rows and line-0 rows are dropped; the result is sorted by
// (address, file, line) with exact duplicates removed.
std::vector<LineRecord> decode_line_table(const ElfFile &elf);
std::vector<LineRecord> extract_line_table(const std::filesystem::path &binary);

// An extra address range owned by a function, e.g. an alias or a clone
// whose normalized name matches an already kept function.
struct AddressPiece {
  std::uint64_t start = 0, end = 0;
  std::size_t function = 0; // index into FunctionTable::functions
};

struct FunctionTable {
  std::vector<BinaryFunctionId> functions; // sorted by start_addr
  std::vector<AddressPiece> pieces;        // sorted by start

  // Function owning addr via its main range or a piece.
  std::optional<std::size_t> owner(std::uint64_t addr) const;
  // Function whose main range or piece starts exactly at addr.
  std::optional<std::size_t> entry_at(std::uint64_t addr) const;
};

FunctionTable read_function_table(const ElfFile &elf, Diagnostics *diag = nullptr,
                                  const NameSet *source_names = nullptr);

std::vector<BinaryFunctionId> extract_function_ranges(const std::filesystem::path &binary,
                                                      Diagnostics *diag = nullptr,
                                                      const NameSet *source_names = nullptr);

// Direct calls and tail jumps recovered from relocations against code
// sections. Present in relocatable objects and in executables linked with
// --emit-relocs; otherwise the result is empty and a warning is recorded.
std::vector<CallRecord> extract_call_edges(const ElfFile &elf, const FunctionTable &table,
                                           Diagnostics *diag = nullptr);

// Tab-separated dumps used for golden comparisons ("lines/1", "funcs/1").
std::string format_line_table(std::span<const LineRecord> lines);
std::string format_function_ranges(std::span<const BinaryFunctionId> functions);
std::vector<LineRecord> parse_line_table(std::string_view text);

} // namespace mefr
