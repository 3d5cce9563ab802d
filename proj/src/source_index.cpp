#include "mefr/source_index.hpp"

#include <algorithm>
#include <tuple>

#include "mefr/error.hpp"
#include "mefr/io.hpp"

namespace mefr {

std::string normalize_path(std::string_view path) {
  std::string s = std::filesystem::path(path).lexically_normal().generic_string();
  if (s.size() > 1 && s.back() == '/')
    s.pop_back();
  return s;
}

namespace {

std::string basename_of(std::string_view path) {
  auto slash = path.rfind('/');
  return std::string(slash == std::string_view::npos ? path : path.substr(slash + 1));
}

} // namespace

SourceRangeIndex SourceRangeIndex::build(std::vector<SourceRangeEntry> entries) {
  for (auto &e : entries) {
    if (e.file.empty() || e.function.empty())
      fail(ErrorKind::Schema, "source index entry with empty file or function");
    if (e.start_line < 1 || e.start_line > e.end_line)
      fail(ErrorKind::Schema, "source index entry " + e.function + " in " + e.file +
                                  " has invalid line range");
    e.file = normalize_path(e.file);
  }
  std::sort(entries.begin(), entries.end(), [](const auto &a, const auto &b) {
    return std::tie(a.file, a.start_line, a.end_line, a.function) <
           std::tie(b.file, b.start_line, b.end_line, b.function);
  });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const auto &a = entries[i - 1];
    const auto &b = entries[i];
    if (a.file == b.file && b.start_line <= a.end_line)
      fail(ErrorKind::Overlap, "source functions \"" + a.function + "\" [" +
                                   std::to_string(a.start_line) + "-" + std::to_string(a.end_line) +
                                   "] and \"" + b.function + "\" [" + std::to_string(b.start_line) +
                                   "-" + std::to_string(b.end_line) + "] overlap in " + a.file);
  }
  SourceRangeIndex idx;
  idx.entries_ = std::move(entries);
  for (std::size_t i = 0; i < idx.entries_.size();) {
    std::size_t j = i;
    while (j < idx.entries_.size() && idx.entries_[j].file == idx.entries_[i].file)
      ++j;
    idx.file_spans_[idx.entries_[i].file] = {i, j};
    idx.by_basename_.emplace(basename_of(idx.entries_[i].file), idx.entries_[i].file);
    i = j;
  }
  return idx;
}

std::optional<std::string> SourceRangeIndex::resolve_file(std::string_view raw) const {
  std::string path = normalize_path(raw);
  std::optional<std::string> best;
  auto [lo, hi] = by_basename_.equal_range(basename_of(path));
  for (auto it = lo; it != hi; ++it) {
    const std::string &f = it->second;
    bool match = path == f ||
                 (path.size() > f.size() && path.ends_with(f) &&
                  path[path.size() - f.size() - 1] == '/');
    if (match && (!best || f.size() > best->size()))
      best = f;
  }
  return best;
}

const SourceRangeEntry *SourceRangeIndex::lookup(std::string_view index_file,
                                                 std::uint32_t line) const {
  auto it = file_spans_.find(index_file);
  if (it == file_spans_.end())
    return nullptr;
  auto first = entries_.begin() + static_cast<std::ptrdiff_t>(it->second.first);
  auto last = entries_.begin() + static_cast<std::ptrdiff_t>(it->second.second);
  auto pos = std::upper_bound(first, last, line, [](std::uint32_t l, const SourceRangeEntry &e) {
    return l < e.start_line;
  });
  if (pos == first)
    return nullptr;
  --pos;
  return line <= pos->end_line ? &*pos : nullptr;
}

NameSet SourceRangeIndex::function_names() const {
  NameSet names;
  for (const auto &e : entries_)
    names.insert(e.function);
  return names;
}

SourceRangeIndex parse_source_index(std::string_view text) {
  Json j = parse_json(text, "srcidx");
  expect_schema(j, "srcidx/1", "srcidx");
  const Json &arr = require_array(j, "entries", "srcidx: ");
  std::vector<SourceRangeEntry> entries;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::string locus = "srcidx: /entries/" + std::to_string(i);
    std::int64_t start = require_int(arr[i], "start_line", locus);
    std::int64_t end = require_int(arr[i], "end_line", locus);
    if (start < 1 || end < start || end > UINT32_MAX)
      fail(ErrorKind::Schema, locus + ": need 1 <= start_line <= end_line");
    entries.push_back({require_string(arr[i], "file", locus),
                       require_string(arr[i], "function", locus),
                       static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(end)});
  }
  return SourceRangeIndex::build(std::move(entries));
}

SourceRangeIndex load_source_index(const std::filesystem::path &path) {
  try {
    return parse_source_index(read_text_file(path));
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::Io)
      throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string to_source_index_json(const SourceRangeIndex &index) {
  Json entries = Json::array();
  for (const auto &e : index.entries())
    entries.push_back({{"file", e.file},
                       {"function", e.function},
                       {"start_line", e.start_line},
                       {"end_line", e.end_line}});
  Json j;
  j["schema"] = "srcidx/1";
  j["entries"] = std::move(entries);
  return dump_json(j);
}

} // namespace mefr
