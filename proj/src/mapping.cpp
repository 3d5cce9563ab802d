#include "mefr/mapping.hpp"

#include <algorithm>
#include <map>
#include <exception>
#include <functional>
#include <mutex>

#include "mefr/error.hpp"
#include "mefr/io.hpp"

namespace mefr {

void canonicalize(SourceSet &set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
}

const B2SEntry *Binary2SourceMap::find(std::string_view name) const {
  for (const auto &e : entries)
    if (e.function.name == name)
      return &e;
  return nullptr;
}

std::unordered_map<std::string, std::size_t> Binary2SourceMap::name_index() const {
  std::unordered_map<std::string, std::size_t> idx;
  idx.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i)
    idx.emplace(entries[i].function.name, i);
  return idx;
}

std::optional<SourceFunctionKey> resolve_osf(std::string_view binary_name,
                                             const SourceSet &sf_set) {
  for (const auto &k : sf_set)
    if (k.name == binary_name)
      return k;
  return std::nullopt;
}

Binary2SourceMap build_b2s(std::span<const LineRecord> lines, const FunctionTable &table,
                           const SourceRangeIndex &index) {
  Binary2SourceMap m;
  m.entries.resize(table.functions.size());
  for (std::size_t i = 0; i < table.functions.size(); ++i)
    m.entries[i].function = table.functions[i];

  std::unordered_map<std::string, std::optional<std::string>> resolved;
  for (const auto &row : lines) {
    auto owner = table.owner(row.address);
    if (!owner) {
      ++m.diagnostics.rows_outside_functions;
      continue;
    }
    auto it = resolved.find(row.file);
    if (it == resolved.end())
      it = resolved.emplace(row.file, index.resolve_file(row.file)).first;
    if (!it->second) {
      ++m.diagnostics.rows_unindexed_file;
      continue;
    }
    const SourceRangeEntry *fn = index.lookup(*it->second, row.line);
    if (!fn) {
      ++m.diagnostics.rows_outside_source_functions;
      continue;
    }
    m.entries[*owner].sf_set.push_back({fn->file, fn->function});
  }
  for (auto &e : m.entries) {
    canonicalize(e.sf_set);
    e.is_bfi = e.sf_set.size() > 1;
    e.osf = resolve_osf(e.function.name, e.sf_set);
    if (e.sf_set.empty())
      m.diagnostics.empty_functions.push_back(e.function.name);
  }
  return m;
}

Binary2SourceMap build_b2s(std::span<const LineRecord> lines,
                           std::span<const BinaryFunctionId> ranges,
                           const SourceRangeIndex &index) {
  FunctionTable table;
  table.functions.assign(ranges.begin(), ranges.end());
  std::sort(table.functions.begin(), table.functions.end(),
            [](const auto &a, const auto &b) { return a.start_addr < b.start_addr; });
  return build_b2s(lines, table, index);
}

std::string_view to_string(MappingClass c) {
  switch (c) {
  case MappingClass::Identical: return "identical";
  case MappingClass::RootEquivalent: return "root_equivalent";
  case MappingClass::Relevant: return "relevant";
  }
  return "?";
}

MappingClass parse_mapping_class(std::string_view s) {
  if (s == "identical") return MappingClass::Identical;
  if (s == "root_equivalent") return MappingClass::RootEquivalent;
  if (s == "relevant") return MappingClass::Relevant;
  fail(ErrorKind::Schema, "unknown mapping class \"" + std::string(s) + "\"");
}

namespace {

// A function's OSF for classification purposes. Single-source functions
// whose name did not resolve fall back to their one source function.
const SourceFunctionKey &effective_osf(const B2SEntry &e) {
  if (e.osf)
    return *e.osf;
  if (e.sf_set.size() == 1)
    return e.sf_set.front();
  fail(ErrorKind::Classification,
       "function " + e.function.name + " maps to " + std::to_string(e.sf_set.size()) +
           " source functions but none is named like it (unresolved OSF)");
}

bool intersects(const SourceSet &a, const SourceSet &b) {
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j)
      ++i;
    else if (*j < *i)
      ++j;
    else
      return true;
  }
  return false;
}

} // namespace

std::optional<MappingClass> classify_pair(const B2SEntry &left, const B2SEntry &right) {
  if (!intersects(left.sf_set, right.sf_set))
    return std::nullopt;
  if (left.sf_set == right.sf_set)
    return MappingClass::Identical;
  if (effective_osf(left) == effective_osf(right))
    return MappingClass::RootEquivalent;
  return MappingClass::Relevant;
}

MappingClassification build_b2b(const Binary2SourceMap &left, const Binary2SourceMap &right) {
  MappingClassification out;
  out.left_binary = left.binary_id;
  out.right_binary = right.binary_id;
  out.left_setting = left.setting;
  out.right_setting = right.setting;

  // Inverted index: source key -> right functions mapping to it.
  std::map<SourceFunctionKey, std::vector<std::uint32_t>> right_by_key;
  for (std::uint32_t j = 0; j < right.entries.size(); ++j)
    for (const auto &k : right.entries[j].sf_set)
      right_by_key[k].push_back(j);

  // Entries are kept in address order by construction, but maps parsed from
  // foreign files may not be; order the output explicitly.
  std::vector<std::uint32_t> left_order(left.entries.size()), right_rank(right.entries.size());
  for (std::uint32_t i = 0; i < left_order.size(); ++i)
    left_order[i] = i;
  std::sort(left_order.begin(), left_order.end(), [&](auto a, auto b) {
    return left.entries[a].function.start_addr < left.entries[b].function.start_addr;
  });
  {
    std::vector<std::uint32_t> ro(right.entries.size());
    for (std::uint32_t j = 0; j < ro.size(); ++j)
      ro[j] = j;
    std::sort(ro.begin(), ro.end(), [&](auto a, auto b) {
      return right.entries[a].function.start_addr < right.entries[b].function.start_addr;
    });
    for (std::uint32_t r = 0; r < ro.size(); ++r)
      right_rank[ro[r]] = r;
  }

  const auto n = static_cast<std::int64_t>(left_order.size());
  std::vector<std::vector<PairMapping>> per_left(left_order.size());
  std::exception_ptr error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t pos = 0; pos < n; ++pos) {
    try {
      const B2SEntry &l = left.entries[left_order[static_cast<std::size_t>(pos)]];
      std::vector<std::uint32_t> candidates;
      for (const auto &k : l.sf_set)
        if (auto it = right_by_key.find(k); it != right_by_key.end())
          candidates.insert(candidates.end(), it->second.begin(), it->second.end());
      std::sort(candidates.begin(), candidates.end(),
                [&](auto a, auto b) { return right_rank[a] < right_rank[b]; });
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
      auto &bucket = per_left[static_cast<std::size_t>(pos)];
      for (auto j : candidates) {
        const B2SEntry &r = right.entries[j];
        if (auto cls = classify_pair(l, r))
          bucket.push_back({l.function, r.function, *cls});
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error)
        error = std::current_exception();
    }
  }
  if (error)
    std::rethrow_exception(error);
  for (auto &bucket : per_left)
    out.pairs.insert(out.pairs.end(), std::make_move_iterator(bucket.begin()),
                     std::make_move_iterator(bucket.end()));
  return out;
}

double MappingDistribution::identical_ratio() const {
  return total() ? static_cast<double>(identical) / static_cast<double>(total()) : 0.0;
}
double MappingDistribution::root_equivalent_ratio() const {
  return total() ? static_cast<double>(root_equivalent) / static_cast<double>(total()) : 0.0;
}
double MappingDistribution::relevant_ratio() const {
  return total() ? static_cast<double>(relevant) / static_cast<double>(total()) : 0.0;
}

MappingDistribution mapping_distribution(const MappingClassification &c) {
  MappingDistribution d;
  for (const auto &p : c.pairs) {
    switch (p.cls) {
    case MappingClass::Identical: ++d.identical; break;
    case MappingClass::RootEquivalent: ++d.root_equivalent; break;
    case MappingClass::Relevant: ++d.relevant; break;
    }
  }
  return d;
}

DistributionAggregate aggregate_distributions(std::span<const MappingDistribution> ds) {
  DistributionAggregate a;
  a.binaries = ds.size();
  for (const auto &d : ds) {
    a.pooled.identical += d.identical;
    a.pooled.root_equivalent += d.root_equivalent;
    a.pooled.relevant += d.relevant;
  }
  if (!ds.empty()) {
    double n = static_cast<double>(ds.size());
    a.mean_identical = static_cast<double>(a.pooled.identical) / n;
    a.mean_root_equivalent = static_cast<double>(a.pooled.root_equivalent) / n;
    a.mean_relevant = static_cast<double>(a.pooled.relevant) / n;
  }
  return a;
}

namespace {

Json key_to_json(const SourceFunctionKey &k) { return {{"file", k.file}, {"name", k.name}}; }

SourceFunctionKey key_from_json(const Json &j, const std::string &locus) {
  return {require_string(j, "file", locus), require_string(j, "name", locus)};
}

Json function_ref(const BinaryFunctionId &f) {
  return {{"name", f.name}, {"start", format_hex(f.start_addr)}, {"end", format_hex(f.end_addr)}};
}

BinaryFunctionId function_from_json(const Json &j, const std::string &locus) {
  return {require_string(j, "name", locus), require_hex(j, "start", locus),
          require_hex(j, "end", locus)};
}

} // namespace

std::string to_b2s_json(const Binary2SourceMap &m) {
  Json entries = Json::array();
  for (const auto &e : m.entries) {
    Json sf = Json::array();
    for (const auto &k : e.sf_set)
      sf.push_back(key_to_json(k));
    Json je;
    je["binary_function"] = e.function.name;
    je["start"] = format_hex(e.function.start_addr);
    je["end"] = format_hex(e.function.end_addr);
    je["sf_set"] = std::move(sf);
    if (e.osf)
      je["osf"] = key_to_json(*e.osf);
    je["is_bfi"] = e.is_bfi;
    entries.push_back(std::move(je));
  }
  Json j;
  j["schema"] = "b2s/1";
  j["binary_id"] = m.binary_id;
  j["setting"] = setting_to_json(m.setting);
  j["entries"] = std::move(entries);
  j["diagnostics"] = {{"empty_functions", m.diagnostics.empty_functions},
                      {"rows_outside_functions", m.diagnostics.rows_outside_functions},
                      {"rows_unindexed_file", m.diagnostics.rows_unindexed_file},
                      {"rows_outside_source_functions",
                       m.diagnostics.rows_outside_source_functions}};
  return dump_json(j);
}

Binary2SourceMap parse_b2s_json(std::string_view text) {
  Json j = parse_json(text, "b2s");
  expect_schema(j, "b2s/1", "b2s");
  Binary2SourceMap m;
  m.binary_id = require_string(j, "binary_id", "b2s: ");
  m.setting = setting_from_json(require(j, "setting", "b2s: "), "b2s: /setting");
  const Json &arr = require_array(j, "entries", "b2s: ");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::string locus = "b2s: /entries/" + std::to_string(i);
    B2SEntry e;
    e.function = {require_string(arr[i], "binary_function", locus),
                  require_hex(arr[i], "start", locus), require_hex(arr[i], "end", locus)};
    const Json &sf = require_array(arr[i], "sf_set", locus);
    for (std::size_t k = 0; k < sf.size(); ++k)
      e.sf_set.push_back(key_from_json(sf[k], locus + "/sf_set/" + std::to_string(k)));
    canonicalize(e.sf_set);
    if (arr[i].contains("osf")) {
      e.osf = key_from_json(arr[i]["osf"], locus + "/osf");
      if (!std::binary_search(e.sf_set.begin(), e.sf_set.end(), *e.osf))
        fail(ErrorKind::Schema, locus + "/osf: not a member of sf_set");
    }
    const Json &bfi = require(arr[i], "is_bfi", locus);
    if (!bfi.is_boolean())
      fail(ErrorKind::Schema, locus + "/is_bfi: expected boolean");
    e.is_bfi = bfi.get<bool>();
    if (e.is_bfi != (e.sf_set.size() > 1))
      fail(ErrorKind::Schema, locus + "/is_bfi: inconsistent with sf_set size");
    m.entries.push_back(std::move(e));
  }
  if (j.contains("diagnostics")) {
    const Json &d = j["diagnostics"];
    if (d.contains("empty_functions"))
      m.diagnostics.empty_functions = d["empty_functions"].get<std::vector<std::string>>();
    m.diagnostics.rows_outside_functions = d.value("rows_outside_functions", std::size_t{0});
    m.diagnostics.rows_unindexed_file = d.value("rows_unindexed_file", std::size_t{0});
    m.diagnostics.rows_outside_source_functions =
        d.value("rows_outside_source_functions", std::size_t{0});
  }
  return m;
}

std::string to_b2b_json(const MappingClassification &c) {
  Json pairs = Json::array();
  for (const auto &p : c.pairs)
    pairs.push_back({{"left", function_ref(p.left)},
                     {"right", function_ref(p.right)},
                     {"class", to_string(p.cls)}});
  Json j;
  j["schema"] = "b2b/1";
  j["left_binary"] = c.left_binary;
  j["right_binary"] = c.right_binary;
  j["left_setting"] = setting_to_json(c.left_setting);
  j["right_setting"] = setting_to_json(c.right_setting);
  j["pairs"] = std::move(pairs);
  return dump_json(j);
}

MappingClassification parse_b2b_json(std::string_view text) {
  Json j = parse_json(text, "b2b");
  expect_schema(j, "b2b/1", "b2b");
  MappingClassification c;
  c.left_binary = require_string(j, "left_binary", "b2b: ");
  c.right_binary = require_string(j, "right_binary", "b2b: ");
  c.left_setting = setting_from_json(require(j, "left_setting", "b2b: "), "b2b: /left_setting");
  c.right_setting = setting_from_json(require(j, "right_setting", "b2b: "), "b2b: /right_setting");
  const Json &arr = require_array(j, "pairs", "b2b: ");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::string locus = "b2b: /pairs/" + std::to_string(i);
    c.pairs.push_back({function_from_json(require(arr[i], "left", locus), locus + "/left"),
                       function_from_json(require(arr[i], "right", locus), locus + "/right"),
                       parse_mapping_class(require_string(arr[i], "class", locus))});
  }
  return c;
}

} // namespace mefr
