#include "mefr/graph.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <map>
#include <regex>
#include <variant>

#include "mefr/error.hpp"
#include "mefr/io.hpp"

namespace mefr {

namespace {

constexpr std::array<std::string_view, 6> kOptimizationNames = {
    "O0", "O1", "O2", "O3", "Os", "Ofast"};
constexpr std::array<std::string_view, 4> kArchitectureNames = {
    "x86_32", "x86_64", "arm_32", "arm_64"};

} // namespace

std::string_view to_string(Optimization o) {
  return kOptimizationNames[static_cast<std::size_t>(o)];
}

std::string_view to_string(Architecture a) {
  return kArchitectureNames[static_cast<std::size_t>(a)];
}

Optimization parse_optimization(std::string_view s) {
  for (std::size_t i = 0; i < kOptimizationNames.size(); ++i)
    if (kOptimizationNames[i] == s)
      return static_cast<Optimization>(i);
  fail(ErrorKind::Schema, "unknown optimization level \"" + std::string(s) + "\"");
}

Architecture parse_architecture(std::string_view s) {
  for (std::size_t i = 0; i < kArchitectureNames.size(); ++i)
    if (kArchitectureNames[i] == s)
      return static_cast<Architecture>(i);
  fail(ErrorKind::Schema, "unknown architecture \"" + std::string(s) + "\"");
}

bool is_valid_compiler_string(std::string_view compiler) {
  static const std::regex pattern(R"(^[A-Za-z][A-Za-z0-9_+]*-[0-9]+(\.[0-9]+)*$)");
  return std::regex_match(compiler.begin(), compiler.end(), pattern);
}

std::string CompilationSetting::label() const {
  return compiler + "/" + std::string(to_string(optimization)) + "/" +
         std::string(to_string(architecture));
}

std::string CompilationSetting::file_stem() const {
  std::string s = label();
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

CompilationSetting make_setting(std::string compiler, Optimization opt,
                                Architecture arch) {
  if (!is_valid_compiler_string(compiler))
    fail(ErrorKind::Schema,
         "compiler \"" + compiler + "\" does not match family-version");
  return CompilationSetting{std::move(compiler), opt, arch};
}

CompilationSetting parse_setting_label(std::string_view label) {
  auto first = label.find('/');
  auto second = first == std::string_view::npos ? first : label.find('/', first + 1);
  if (second == std::string_view::npos)
    fail(ErrorKind::Schema, "setting label \"" + std::string(label) +
                                "\" is not compiler/optimization/architecture");
  return make_setting(std::string(label.substr(0, first)),
                      parse_optimization(label.substr(first + 1, second - first - 1)),
                      parse_architecture(label.substr(second + 1)));
}

std::string normalize_name(std::string_view raw, const NameSet *source_names) {
  static const std::regex suffix(R"(\.(isra|part|constprop|cold|clone)\.\d+$)");
  std::string name(raw);
  for (;;) {
    std::smatch m;
    if (!std::regex_search(name, m, suffix))
      break;
    name.erase(static_cast<std::size_t>(m.position(0)));
  }
  if (source_names && name.size() > 1 && name.front() == '_' &&
      !source_names->contains(name) && source_names->contains(name.substr(1)))
    name.erase(0, 1);
  return name;
}

std::string format_hex(std::uint64_t value) {
  char buf[19] = {'0', 'x'};
  auto [end, ec] = std::to_chars(buf + 2, buf + sizeof buf, value, 16);
  return std::string(buf, end);
}

std::optional<std::uint64_t> parse_hex(std::string_view text) {
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X'))
    return std::nullopt;
  std::uint64_t value = 0;
  auto digits = text.substr(2);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, 16);
  if (ec != std::errc() || ptr != digits.data() + digits.size())
    return std::nullopt;
  return value;
}

FunctionCallGraph FunctionCallGraph::build(std::string binary_id,
                                           CompilationSetting setting,
                                           std::vector<BinaryFunctionId> functions,
                                           std::span<const CallRecord> calls) {
  FunctionCallGraph g;
  g.binary_id_ = std::move(binary_id);
  g.setting_ = std::move(setting);

  std::sort(functions.begin(), functions.end(), [](const auto &a, const auto &b) {
    return std::tie(a.start_addr, a.end_addr, a.name) <
           std::tie(b.start_addr, b.end_addr, b.name);
  });
  for (std::size_t i = 0; i < functions.size(); ++i) {
    const auto &f = functions[i];
    if (f.name.empty())
      fail(ErrorKind::Schema, "function at " + format_hex(f.start_addr) + " has an empty name");
    if (f.start_addr >= f.end_addr)
      fail(ErrorKind::Schema, "function " + f.name + ": start " + format_hex(f.start_addr) +
                                  " is not below end " + format_hex(f.end_addr));
    if (i > 0 && functions[i - 1].end_addr > f.start_addr)
      fail(ErrorKind::Overlap, "functions " + functions[i - 1].name + " and " + f.name +
                                   " have overlapping address ranges");
  }
  g.functions_ = std::move(functions);

  g.by_name_.reserve(g.functions_.size());
  std::vector<std::string> collisions;
  for (NodeIndex i = 0; i < g.functions_.size(); ++i)
    if (!g.by_name_.emplace(g.functions_[i].name, i).second)
      collisions.push_back(g.functions_[i].name);
  if (!collisions.empty()) {
    std::string msg = "duplicate function names:";
    for (const auto &c : collisions)
      msg += " " + c;
    fail(ErrorKind::DuplicateName, msg);
  }

  g.edges_.reserve(calls.size());
  for (std::size_t i = 0; i < calls.size(); ++i) {
    const auto &c = calls[i];
    auto caller = g.find(c.caller);
    auto callee = g.find(c.callee);
    if (!caller || !callee)
      fail(ErrorKind::DanglingEdge, "call " + std::to_string(i) + " (" + c.caller + " -> " +
                                        c.callee + ") references unknown function \"" +
                                        (caller ? c.callee : c.caller) + "\"");
    g.edges_.push_back({*caller, *callee, c.site});
  }
  std::sort(g.edges_.begin(), g.edges_.end());

  const auto n = g.functions_.size();
  auto build_csr = [n](const std::vector<CallEdge> &edges, bool forward,
                       std::vector<std::uint32_t> &offsets, std::vector<NodeIndex> &targets) {
    std::vector<std::vector<NodeIndex>> lists(n);
    for (const auto &e : edges)
      lists[forward ? e.caller : e.callee].push_back(forward ? e.callee : e.caller);
    offsets.assign(n + 1, 0);
    targets.clear();
    for (std::size_t v = 0; v < n; ++v) {
      auto &l = lists[v];
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
      targets.insert(targets.end(), l.begin(), l.end());
      offsets[v + 1] = static_cast<std::uint32_t>(targets.size());
    }
  };
  build_csr(g.edges_, true, g.succ_offsets_, g.succ_);
  build_csr(g.edges_, false, g.pred_offsets_, g.pred_);
  return g;
}

std::optional<NodeIndex> FunctionCallGraph::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end())
    return std::nullopt;
  return it->second;
}

NodeIndex FunctionCallGraph::index_of(std::string_view name) const {
  if (auto n = find(name))
    return *n;
  fail(ErrorKind::UnknownFunction,
       "function \"" + std::string(name) + "\" is not in graph " + binary_id_);
}

NodeIndex FunctionCallGraph::index_of(const BinaryFunctionId &f) const {
  NodeIndex n = index_of(f.name);
  if (functions_[n] != f)
    fail(ErrorKind::UnknownFunction, "function \"" + f.name + "\" at " +
                                         format_hex(f.start_addr) +
                                         " does not match graph " + binary_id_);
  return n;
}

std::span<const NodeIndex> FunctionCallGraph::successors(NodeIndex n) const {
  if (n >= functions_.size())
    fail(ErrorKind::UnknownFunction, "node index " + std::to_string(n) + " out of range");
  return std::span<const NodeIndex>(succ_).subspan(succ_offsets_[n],
                                                   succ_offsets_[n + 1] - succ_offsets_[n]);
}

std::span<const NodeIndex> FunctionCallGraph::predecessors(NodeIndex n) const {
  if (n >= functions_.size())
    fail(ErrorKind::UnknownFunction, "node index " + std::to_string(n) + " out of range");
  return std::span<const NodeIndex>(pred_).subspan(pred_offsets_[n],
                                                   pred_offsets_[n + 1] - pred_offsets_[n]);
}

std::vector<NodeIndex> FunctionCallGraph::neighbors(NodeIndex n) const {
  auto s = successors(n);
  auto p = predecessors(n);
  std::vector<NodeIndex> out;
  out.reserve(s.size() + p.size());
  std::set_union(s.begin(), s.end(), p.begin(), p.end(), std::back_inserter(out));
  out.erase(std::remove(out.begin(), out.end(), n), out.end());
  return out;
}

std::vector<BinaryFunctionId> successors(const FunctionCallGraph &g,
                                         const BinaryFunctionId &f) {
  std::vector<BinaryFunctionId> out;
  for (NodeIndex s : g.successors(g.index_of(f)))
    out.push_back(g.function(s));
  return out;
}

std::vector<BinaryFunctionId> neighbors(const FunctionCallGraph &g,
                                        const BinaryFunctionId &f) {
  std::vector<BinaryFunctionId> out;
  for (NodeIndex s : g.neighbors(g.index_of(f)))
    out.push_back(g.function(s));
  return out;
}

namespace {

// Normalizes raw names and reports every group of raw names that collapse
// to the same normalized name.
std::vector<BinaryFunctionId>
normalize_functions(std::vector<BinaryFunctionId> raw, std::vector<CallRecord> &calls,
                    const NameSet *source_names) {
  std::map<std::string, std::vector<std::string>> groups;
  std::unordered_map<std::string, std::string> renamed;
  for (auto &f : raw) {
    std::string norm = normalize_name(f.name, source_names);
    groups[norm].push_back(f.name);
    renamed.emplace(f.name, norm);
    f.name = std::move(norm);
  }
  std::string msg;
  for (const auto &[norm, members] : groups) {
    if (members.size() < 2)
      continue;
    msg += " " + norm + " <- {";
    for (std::size_t i = 0; i < members.size(); ++i)
      msg += (i ? ", " : "") + members[i];
    msg += "}";
  }
  if (!msg.empty())
    fail(ErrorKind::DuplicateName, "names collide after normalization:" + msg);
  for (auto &c : calls) {
    if (auto it = renamed.find(c.caller); it != renamed.end())
      c.caller = it->second;
    if (auto it = renamed.find(c.callee); it != renamed.end())
      c.callee = it->second;
  }
  return raw;
}

} // namespace

CompilationSetting setting_from_json(const Json &j, const std::string &locus) {
  std::string compiler = require_string(j, "compiler", locus);
  if (!is_valid_compiler_string(compiler))
    fail(ErrorKind::Schema, locus + "/compiler: \"" + compiler +
                                "\" does not match family-version");
  Optimization opt;
  Architecture arch;
  try {
    opt = parse_optimization(require_string(j, "optimization", locus));
    arch = parse_architecture(require_string(j, "architecture", locus));
  } catch (const Error &e) {
    fail(ErrorKind::Schema, locus + ": " + e.what());
  }
  return CompilationSetting{std::move(compiler), opt, arch};
}

Json setting_to_json(const CompilationSetting &s) {
  return {{"compiler", s.compiler},
          {"optimization", to_string(s.optimization)},
          {"architecture", to_string(s.architecture)}};
}

FunctionCallGraph parse_fcg_json(std::string_view text, const NameSet *source_names) {
  Json j = parse_json(text, "fcg");
  expect_schema(j, "fcg/1", "fcg");
  std::string binary_id = require_string(j, "binary_id", "fcg: ");
  CompilationSetting setting = setting_from_json(require(j, "setting", "fcg: "), "fcg: /setting");

  std::vector<BinaryFunctionId> functions;
  const Json &fs = require_array(j, "functions", "fcg: ");
  for (std::size_t i = 0; i < fs.size(); ++i) {
    std::string locus = "fcg: /functions/" + std::to_string(i);
    functions.push_back({require_string(fs[i], "name", locus),
                         require_hex(fs[i], "start", locus),
                         require_hex(fs[i], "end", locus)});
  }
  std::vector<CallRecord> calls;
  const Json &cs = require_array(j, "calls", "fcg: ");
  for (std::size_t i = 0; i < cs.size(); ++i) {
    std::string locus = "fcg: /calls/" + std::to_string(i);
    CallRecord c{require_string(cs[i], "caller", locus),
                 require_string(cs[i], "callee", locus), std::nullopt};
    if (cs[i].contains("site"))
      c.site = require_hex(cs[i], "site", locus);
    calls.push_back(std::move(c));
  }
  functions = normalize_functions(std::move(functions), calls, source_names);
  return FunctionCallGraph::build(std::move(binary_id), std::move(setting),
                                  std::move(functions), calls);
}

std::string to_fcg_json(const FunctionCallGraph &g) {
  Json j;
  j["schema"] = "fcg/1";
  j["binary_id"] = g.binary_id();
  j["setting"] = setting_to_json(g.setting());
  Json functions = Json::array();
  for (const auto &f : g.functions())
    functions.push_back({{"name", f.name},
                         {"start", format_hex(f.start_addr)},
                         {"end", format_hex(f.end_addr)}});
  j["functions"] = std::move(functions);
  Json calls = Json::array();
  for (const auto &e : g.edges()) {
    Json c = {{"caller", g.function(e.caller).name}, {"callee", g.function(e.callee).name}};
    if (e.site)
      c["site"] = format_hex(*e.site);
    calls.push_back(std::move(c));
  }
  j["calls"] = std::move(calls);
  return dump_json(j);
}

namespace {

// Minimal GML reader: key/value lists with integer, real, string and
// nested-list values.
struct GmlValue;
using GmlList = std::vector<std::pair<std::string, GmlValue>>;
struct GmlValue {
  std::variant<std::int64_t, double, std::string, GmlList> v;
};

class GmlParser {
public:
  explicit GmlParser(std::string_view text) : text_(text) {}

  GmlList parse_document() {
    GmlList top = parse_list(false);
    return top;
  }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;

  [[noreturn]] void error(const std::string &msg) {
    fail(ErrorKind::Schema, "gml: line " + std::to_string(line_) + ": " + msg);
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n')
          ++pos_;
      } else {
        break;
      }
    }
  }

  GmlList parse_list(bool nested) {
    GmlList out;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) {
        if (nested)
          error("unterminated list");
        return out;
      }
      if (text_[pos_] == ']') {
        if (!nested)
          error("unexpected ']'");
        ++pos_;
        return out;
      }
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      if (start == pos_)
        error(std::string("expected key, found '") + text_[pos_] + "'");
      std::string key(text_.substr(start, pos_ - start));
      out.emplace_back(std::move(key), parse_value());
    }
  }

  GmlValue parse_value() {
    skip_space();
    if (pos_ >= text_.size())
      error("missing value");
    char c = text_[pos_];
    if (c == '[') {
      ++pos_;
      return GmlValue{parse_list(true)};
    }
    if (c == '"') {
      std::size_t end = text_.find('"', pos_ + 1);
      if (end == std::string_view::npos)
        error("unterminated string");
      std::string s(text_.substr(pos_ + 1, end - pos_ - 1));
      line_ += static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
      pos_ = end + 1;
      return GmlValue{std::move(s)};
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != ']')
      ++pos_;
    std::string tok(text_.substr(start, pos_ - start));
    std::int64_t iv = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
    if (ec == std::errc() && p == tok.data() + tok.size())
      return GmlValue{iv};
    try {
      std::size_t used = 0;
      double d = std::stod(tok, &used);
      if (used == tok.size())
        return GmlValue{d};
    } catch (const std::exception &) {
    }
    error("bad value \"" + tok + "\"");
  }
};

const GmlValue *gml_get(const GmlList &l, std::string_view key) {
  for (const auto &[k, v] : l)
    if (k == key)
      return &v;
  return nullptr;
}

std::string gml_string(const GmlList &l, std::string_view key, const std::string &locus) {
  const GmlValue *v = gml_get(l, key);
  if (!v || !std::holds_alternative<std::string>(v->v))
    fail(ErrorKind::Schema, locus + "/" + std::string(key) + ": expected string");
  return std::get<std::string>(v->v);
}

std::uint64_t gml_address(const GmlList &l, std::string_view key, const std::string &locus) {
  const GmlValue *v = gml_get(l, key);
  if (v && std::holds_alternative<std::int64_t>(v->v) && std::get<std::int64_t>(v->v) >= 0)
    return static_cast<std::uint64_t>(std::get<std::int64_t>(v->v));
  if (v && std::holds_alternative<std::string>(v->v))
    if (auto h = parse_hex(std::get<std::string>(v->v)))
      return *h;
  fail(ErrorKind::Schema, locus + "/" + std::string(key) + ": expected address");
}

} // namespace

FunctionCallGraph parse_fcg_gml(std::string_view text, const NameSet *source_names) {
  GmlList doc = GmlParser(text).parse_document();
  const GmlValue *graph = gml_get(doc, "graph");
  if (!graph || !std::holds_alternative<GmlList>(graph->v))
    fail(ErrorKind::Schema, "gml: missing graph [ ... ] block");
  const auto &body = std::get<GmlList>(graph->v);

  std::string binary_id = gml_string(body, "binary_id", "gml: graph");
  const GmlValue *sv = gml_get(body, "setting");
  if (!sv || !std::holds_alternative<GmlList>(sv->v))
    fail(ErrorKind::Schema, "gml: graph/setting: expected list");
  const auto &sl = std::get<GmlList>(sv->v);
  CompilationSetting setting;
  try {
    setting = make_setting(gml_string(sl, "compiler", "gml: graph/setting"),
                           parse_optimization(gml_string(sl, "optimization", "gml: graph/setting")),
                           parse_architecture(gml_string(sl, "architecture", "gml: graph/setting")));
  } catch (const Error &e) {
    fail(ErrorKind::Schema, std::string("gml: graph/setting: ") + e.what());
  }

  std::vector<BinaryFunctionId> functions;
  std::vector<CallRecord> calls;
  std::unordered_map<std::int64_t, std::string> id_to_name;
  std::size_t node_no = 0, edge_no = 0;
  for (const auto &[key, value] : body) {
    if (key == "node") {
      std::string locus = "gml: graph/node[" + std::to_string(node_no++) + "]";
      if (!std::holds_alternative<GmlList>(value.v))
        fail(ErrorKind::Schema, locus + ": expected list");
      const auto &nl = std::get<GmlList>(value.v);
      std::string name = gml_get(nl, "name") ? gml_string(nl, "name", locus)
                                             : gml_string(nl, "label", locus);
      if (const GmlValue *id = gml_get(nl, "id"); id && std::holds_alternative<std::int64_t>(id->v))
        id_to_name[std::get<std::int64_t>(id->v)] = name;
      functions.push_back({name, gml_address(nl, "start", locus), gml_address(nl, "end", locus)});
    } else if (key == "edge") {
      std::string locus = "gml: graph/edge[" + std::to_string(edge_no++) + "]";
      if (!std::holds_alternative<GmlList>(value.v))
        fail(ErrorKind::Schema, locus + ": expected list");
      const auto &el = std::get<GmlList>(value.v);
      CallRecord c;
      if (gml_get(el, "caller")) {
        c.caller = gml_string(el, "caller", locus);
        c.callee = gml_string(el, "callee", locus);
      } else {
        auto endpoint = [&](std::string_view k) {
          const GmlValue *v = gml_get(el, k);
          if (!v || !std::holds_alternative<std::int64_t>(v->v))
            fail(ErrorKind::Schema, locus + "/" + std::string(k) + ": expected node id");
          auto it = id_to_name.find(std::get<std::int64_t>(v->v));
          if (it == id_to_name.end())
            fail(ErrorKind::DanglingEdge, locus + ": unknown node id " +
                                              std::to_string(std::get<std::int64_t>(v->v)));
          return it->second;
        };
        c.caller = endpoint("source");
        c.callee = endpoint("target");
      }
      if (gml_get(el, "site"))
        c.site = gml_address(el, "site", locus);
      calls.push_back(std::move(c));
    }
  }
  functions = normalize_functions(std::move(functions), calls, source_names);
  return FunctionCallGraph::build(std::move(binary_id), std::move(setting),
                                  std::move(functions), calls);
}

FunctionCallGraph ingest_fcg(const std::filesystem::path &path, const NameSet *source_names) {
  std::string text = read_text_file(path);
  try {
    if (path.extension() == ".gml")
      return parse_fcg_gml(text, source_names);
    return parse_fcg_json(text, source_names);
  } catch (const Error &e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void emit_fcg(const FunctionCallGraph &g, const std::filesystem::path &path) {
  write_text_file(path, to_fcg_json(g));
}

} // namespace mefr
