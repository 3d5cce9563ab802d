#pragma once

// Source-function line ranges ("srcidx/1"), produced by any tags tool.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mefr/graph.hpp"

namespace mefr {

struct SourceRangeEntry {
  std::string file;
  std::string function;
  std::uint32_t start_line = 1;
  std::uint32_t end_line = 1;

  auto operator<=>(const SourceRangeEntry &) const = default;
};

class SourceRangeIndex {
public:
  SourceRangeIndex() = default;

  // Validates line ranges and rejects overlapping functions within a file.
  static SourceRangeIndex build(std::vector<SourceRangeEntry> entries);

  std::span<const SourceRangeEntry> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  // Maps a path from a line table onto an index file: the longest index
  // path that equals it or is a whole-component suffix of it. Lets line
  // tables with different build roots key to the same source file.
  std::optional<std::string> resolve_file(std::string_view path) const;

  // Function in index_file whose [start_line, end_line] contains line.
  const SourceRangeEntry *lookup(std::string_view index_file, std::uint32_t line) const;

  NameSet function_names() const;

private:
  std::vector<SourceRangeEntry> entries_; // sorted by (file, start_line)
  std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> file_spans_;
  std::multimap<std::string, std::string, std::less<>> by_basename_;
};

// Lexical path cleanup shared by index files and line-table paths.
std::string normalize_path(std::string_view path);

SourceRangeIndex parse_source_index(std::string_view json_text);
SourceRangeIndex load_source_index(const std::filesystem::path &path);
std::string to_source_index_json(const SourceRangeIndex &index);

} // namespace mefr
