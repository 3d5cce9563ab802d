#include "pipeline.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <omp.h>
#include <spdlog/spdlog.h>

#include "mefr/debug_extract.hpp"
#include "mefr/decomposers.hpp"
#include "mefr/elf.hpp"
#include "mefr/error.hpp"
#include "mefr/io.hpp"
#include "mefr/mapping.hpp"
#include "mefr/metrics.hpp"
#include "mefr/source_index.hpp"

namespace mefr::cli {

namespace {

std::optional<fs::path> optional_path(const Json &e, const char *key, const fs::path &base,
                                      const std::string &locus) {
  if (!e.contains(key))
    return std::nullopt;
  fs::path p = require_string(e, key, locus);
  return p.is_absolute() ? p : base / p;
}

std::string stem(const ManifestEntry &e) { return e.setting.file_stem(); }

std::string graph_id(const Manifest &m, const ManifestEntry &e) {
  return m.project + ":" + e.setting.label();
}

void apply_jobs(const Options &opts) {
  if (opts.jobs)
    omp_set_num_threads(std::max(1, *opts.jobs));
}

Manifest manifest_for(const Options &opts) {
  Manifest m = load_manifest(opts.manifest);
  if (opts.source_index)
    m.source_index = opts.source_index;
  return m;
}

std::optional<SourceRangeIndex> maybe_index(const Manifest &m) {
  if (!m.source_index)
    return std::nullopt;
  return load_source_index(*m.source_index);
}

FunctionCallGraph load_graph(const Options &opts, const ManifestEntry &e) {
  fs::path staged = opts.out / "fcg" / (stem(e) + ".json");
  if (fs::exists(staged))
    return ingest_fcg(staged);
  if (e.fcg_path)
    return ingest_fcg(*e.fcg_path);
  fail(ErrorKind::Io, "no call graph for " + e.setting.label() + "; run extract first");
}

Binary2SourceMap load_b2s(const Options &opts, const ManifestEntry &e) {
  fs::path staged = opts.out / "b2s" / (stem(e) + ".json");
  if (fs::exists(staged))
    return parse_b2s_json(read_text_file(staged));
  if (e.b2s_path)
    return parse_b2s_json(read_text_file(*e.b2s_path));
  fail(ErrorKind::Io, "no b2s map for " + e.setting.label() +
                          "; run extract with a source index or give b2s_path");
}

void check_ids(const FunctionCallGraph &g, const Binary2SourceMap &b) {
  if (g.binary_id() != b.binary_id)
    fail(ErrorKind::IdMismatch,
         "call graph \"" + g.binary_id() + "\" paired with b2s map \"" + b.binary_id + "\"");
}

std::string fixed(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

Json key_json(const SourceFunctionKey &k) { return {{"file", k.file}, {"name", k.name}}; }

Json ratio_json(const Ratio &r) {
  return {{"value", r.value()}, {"exact", std::to_string(r.num) + "/" + std::to_string(r.den)}};
}

std::size_t find_entry(const Manifest &m, const std::string &what) {
  for (std::size_t i = 0; i < m.entries.size(); ++i)
    if (stem(m.entries[i]) == what || m.entries[i].setting.label() == what)
      return i;
  fail(ErrorKind::Precondition, "no manifest entry for setting \"" + what + "\"");
}

} // namespace

Manifest load_manifest(const fs::path &path) {
  const std::string what = path.string();
  Json j = parse_json(read_text_file(path), what);
  expect_schema(j, "manifest/1", what);
  const fs::path base = path.parent_path();
  Manifest m;
  m.project = require_string(j, "project", "/project");
  m.source_index = optional_path(j, "source_index", base, "/source_index");
  const Json &entries = require_array(j, "entries", "");
  if (entries.empty())
    fail(ErrorKind::Schema, what + ": manifest has no entries");
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string locus = "/entries/" + std::to_string(i);
    const Json &e = entries[i];
    ManifestEntry me;
    me.setting = setting_from_json(require(e, "setting", locus), locus + "/setting");
    me.binary_path = optional_path(e, "binary_path", base, locus);
    me.fcg_path = optional_path(e, "fcg_path", base, locus);
    me.b2s_path = optional_path(e, "b2s_path", base, locus);
    me.lines_path = optional_path(e, "lines_path", base, locus);
    if (me.binary_path.has_value() == me.fcg_path.has_value())
      fail(ErrorKind::Schema, what + ": " + locus + " needs exactly one of binary_path, fcg_path");
    if (!seen.emplace(me.setting.label(), i).second)
      fail(ErrorKind::Schema, what + ": setting " + me.setting.label() + " listed twice");
    m.entries.push_back(std::move(me));
  }
  return m;
}

int run_extract(const Options &opts) {
  const Manifest m = manifest_for(opts);
  apply_jobs(opts);
  const auto index = maybe_index(m);
  const NameSet names = index ? index->function_names() : NameSet{};
  const NameSet *np = index ? &names : nullptr;
  std::size_t failed = 0;
  for (const auto &e : m.entries) {
    const std::string s = stem(e);
    try {
      std::optional<Binary2SourceMap> b2s;
      FunctionCallGraph g;
      if (e.binary_path) {
        ElfFile elf = ElfFile::load(*e.binary_path);
        auto lines = decode_line_table(elf);
        Diagnostics diag;
        auto table = read_function_table(elf, &diag, np);
        auto calls = extract_call_edges(elf, table, &diag);
        for (const auto &w : diag.warnings)
          spdlog::warn("{}: {}", s, w);
        g = FunctionCallGraph::build(graph_id(m, e), e.setting, table.functions, calls);
        write_text_file(opts.out / "lines" / (s + ".tsv"), format_line_table(lines));
        write_text_file(opts.out / "funcs" / (s + ".tsv"), format_function_ranges(table.functions));
        if (index)
          b2s = build_b2s(lines, table, *index);
      } else {
        g = ingest_fcg(*e.fcg_path, np);
        if (g.setting() != e.setting)
          fail(ErrorKind::Schema, e.fcg_path->string() + ": setting " + g.setting().label() +
                                      " differs from manifest " + e.setting.label());
        if (e.b2s_path) {
          b2s = parse_b2s_json(read_text_file(*e.b2s_path));
          check_ids(g, *b2s);
        } else if (e.lines_path && index) {
          auto lines = parse_line_table(read_text_file(*e.lines_path));
          write_text_file(opts.out / "lines" / (s + ".tsv"), format_line_table(lines));
          b2s = build_b2s(lines, g.functions(), *index);
        }
      }
      emit_fcg(g, opts.out / "fcg" / (s + ".json"));
      if (b2s) {
        b2s->binary_id = g.binary_id();
        b2s->setting = g.setting();
        const auto &d = b2s->diagnostics;
        if (!d.empty_functions.empty())
          spdlog::info("{}: {} functions without attributed source lines", s,
                       d.empty_functions.size());
        write_text_file(opts.out / "b2s" / (s + ".json"), to_b2s_json(*b2s));
      }
      std::size_t bfi = 0;
      if (b2s)
        bfi = std::count_if(b2s->entries.begin(), b2s->entries.end(),
                            [](const auto &x) { return x.is_bfi; });
      std::printf("extract %s: %zu functions, %zu calls%s\n", s.c_str(), g.size(),
                  g.edges().size(),
                  b2s ? (", " + std::to_string(bfi) + " with inlining").c_str() : "");
    } catch (const Error &err) {
      ++failed;
      spdlog::error("extract {}: {}", s, err.what());
    }
  }
  std::printf("extract: %zu ok, %zu failed\n", m.entries.size() - failed, failed);
  return failed ? kExitPartial : kExitOk;
}

int run_map(const Options &opts, const std::vector<std::string> &pairs) {
  const Manifest m = manifest_for(opts);
  apply_jobs(opts);
  std::vector<std::pair<std::size_t, std::size_t>> sel;
  if (pairs.empty()) {
    for (std::size_t i = 0; i < m.entries.size(); ++i)
      for (std::size_t j = i + 1; j < m.entries.size(); ++j)
        sel.emplace_back(i, j);
  } else {
    for (const auto &p : pairs) {
      auto colon = p.find(':');
      if (colon == std::string::npos)
        fail(ErrorKind::Precondition, "pair \"" + p + "\" is not LEFT:RIGHT");
      sel.emplace_back(find_entry(m, p.substr(0, colon)), find_entry(m, p.substr(colon + 1)));
    }
  }
  if (sel.empty())
    fail(ErrorKind::SingleSetting, "mapping needs at least two settings or an explicit --pair");

  std::size_t failed = 0;
  std::vector<std::optional<Binary2SourceMap>> maps(m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    try {
      maps[i] = load_b2s(opts, m.entries[i]);
    } catch (const Error &err) {
      spdlog::error("map {}: {}", stem(m.entries[i]), err.what());
    }
  }

  std::vector<std::optional<MappingClassification>> results(sel.size());
  std::vector<std::string> errors(sel.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < sel.size(); ++k) {
    const auto &l = maps[sel[k].first];
    const auto &r = maps[sel[k].second];
    if (!l || !r) {
      errors[k] = "missing b2s input";
      continue;
    }
    try {
      results[k] = build_b2b(*l, *r);
    } catch (const Error &err) {
      errors[k] = err.what();
    }
  }

  std::string csv = "left,right,identical,root_equivalent,relevant,total,identical_ratio,"
                    "root_equivalent_ratio,relevant_ratio\n";
  Json jpairs = Json::array();
  std::vector<MappingDistribution> ds;
  for (std::size_t k = 0; k < sel.size(); ++k) {
    const std::string ls = stem(m.entries[sel[k].first]), rs = stem(m.entries[sel[k].second]);
    if (!results[k]) {
      ++failed;
      spdlog::error("map {} vs {}: {}", ls, rs, errors[k]);
      continue;
    }
    write_text_file(opts.out / "b2b" / (ls + "__" + rs + ".json"), to_b2b_json(*results[k]));
    auto d = mapping_distribution(*results[k]);
    ds.push_back(d);
    csv += ls + "," + rs + "," + std::to_string(d.identical) + "," +
           std::to_string(d.root_equivalent) + "," + std::to_string(d.relevant) + "," +
           std::to_string(d.total()) + "," + fixed(d.identical_ratio()) + "," +
           fixed(d.root_equivalent_ratio()) + "," + fixed(d.relevant_ratio()) + "\n";
    jpairs.push_back({{"left", ls},
                      {"right", rs},
                      {"identical", d.identical},
                      {"root_equivalent", d.root_equivalent},
                      {"relevant", d.relevant}});
    std::printf("map %s vs %s: %zu identical, %zu root-equivalent, %zu relevant\n", ls.c_str(),
                rs.c_str(), d.identical, d.root_equivalent, d.relevant);
  }
  auto agg = aggregate_distributions(ds);
  Json j;
  j["schema"] = "distribution/1";
  j["project"] = m.project;
  j["pairs"] = std::move(jpairs);
  j["aggregate"] = {{"pairs", agg.binaries},
                    {"identical", agg.pooled.identical},
                    {"root_equivalent", agg.pooled.root_equivalent},
                    {"relevant", agg.pooled.relevant},
                    {"mean_identical", agg.mean_identical},
                    {"mean_root_equivalent", agg.mean_root_equivalent},
                    {"mean_relevant", agg.mean_relevant}};
  write_text_file(opts.out / "b2b" / "distribution.json", dump_json(j));
  write_text_file(opts.out / "b2b" / "distribution.csv", csv);
  return failed ? kExitPartial : kExitOk;
}

int run_oracle(const Options &opts) {
  const Manifest m = manifest_for(opts);
  apply_jobs(opts);
  if (m.entries.size() < 2)
    fail(ErrorKind::SingleSetting, "oracle needs at least two settings, manifest has " +
                                       std::to_string(m.entries.size()));
  std::vector<FunctionCallGraph> graphs;
  std::vector<Binary2SourceMap> maps;
  for (const auto &e : m.entries) {
    graphs.push_back(load_graph(opts, e));
    maps.push_back(load_b2s(opts, e));
    check_ids(graphs.back(), maps.back());
  }
  const std::size_t n = m.entries.size();
  const CorpusBoundaries cb = identify_boundaries(maps);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      pairs.emplace_back(i, j);
  std::vector<MappingClassification> cls(pairs.size());
  std::vector<std::string> errors(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    try {
      cls[k] = build_b2b(maps[pairs[k].first], maps[pairs[k].second]);
    } catch (const Error &err) {
      errors[k] = err.what();
    }
  }
  bool routes_agree = std::all_of(errors.begin(), errors.end(),
                                  [](const auto &e) { return e.empty(); });
  if (!routes_agree) {
    for (const auto &e : errors)
      if (!e.empty())
        spdlog::warn("oracle cross-check: {}", e);
  } else {
    routes_agree = identify_boundaries_from_mappings(maps, cls).never_inlined == cb.never_inlined;
    if (!routes_agree)
      spdlog::warn("boundary sets from mappings differ from the never-inlined scan");
  }

  std::vector<MefrPartition> parts(n), verbatim(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto nodes = boundary_nodes(graphs[i], cb.per_graph[i]);
    parts[i] = construct_mefrs(graphs[i], nodes, opts.mode);
    verbatim[i] = opts.mode == MefrMode::Verbatim ? parts[i]
                                                  : construct_mefrs(graphs[i], nodes, MefrMode::Verbatim);
    write_text_file(opts.out / "mefr" / (stem(m.entries[i]) + ".json"),
                    to_mefr_json(parts[i], graphs[i]));
    std::printf("oracle %s: %zu boundary functions, %zu regions, %zu unassigned, %zu contested\n",
                stem(m.entries[i]).c_str(), nodes.size(), parts[i].regions.size(),
                parts[i].unassigned.size(), parts[i].contested_count);
  }

  std::vector<ValidationReport> reports(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    auto [a, b] = pairs[k];
    reports[k] = validate_mefr_pair({verbatim[a], graphs[a], maps[a]},
                                    {verbatim[b], graphs[b], maps[b]});
  }
  Json validations = Json::array();
  bool all_equivalent = true, all_minimal = true;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto &r = reports[k];
    all_equivalent = all_equivalent && r.all_equivalent();
    all_minimal = all_minimal && r.all_minimal();
    validations.push_back(parse_json(
        to_validation_json(r, stem(m.entries[pairs[k].first]), stem(m.entries[pairs[k].second])),
        "validation"));
  }
  Json never = Json::array();
  for (const auto &k : cb.never_inlined)
    never.push_back(key_json(k));
  Json boundaries = Json::array();
  for (std::size_t i = 0; i < n; ++i)
    boundaries.push_back({{"setting", stem(m.entries[i])},
                          {"boundary_functions", cb.per_graph[i].boundary.size()}});
  Json j;
  j["schema"] = "oracle-validation/1";
  j["project"] = m.project;
  j["mode"] = std::string(to_string(opts.mode));
  j["boundary_routes_agree"] = routes_agree;
  j["all_equivalent"] = all_equivalent;
  j["all_minimal"] = all_minimal;
  j["never_inlined"] = std::move(never);
  j["boundaries"] = std::move(boundaries);
  j["pairs"] = std::move(validations);
  write_text_file(opts.out / "mefr" / "oracle_validation.json", dump_json(j));
  std::printf("oracle: %zu never-inlined source functions; regions %s, %s\n",
              cb.never_inlined.size(), all_equivalent ? "equivalent" : "NOT equivalent",
              all_minimal ? "minimal" : "NOT minimal");
  if (!all_equivalent || !all_minimal)
    spdlog::warn("cross-setting validation found mismatching regions; see oracle_validation.json");
  return kExitOk;
}

namespace {

Decomposition builtin_decomposition(const EvalRequest &req, const FunctionCallGraph &g,
                                    const MefrPartition &oracle) {
  if (req.method == "oracle")
    return decomposition_from_mefrs(oracle, g);
  if (req.method == "singleton")
    return decompose_singleton(g);
  if (req.method == "modularity")
    return decompose_modularity(g, {req.max_size, req.unit_weights});
  if (req.method == "expander")
    return decompose_expander(g, req.radius);
  if (req.method == "anchor") {
    std::vector<NodeIndex> anchors;
    for (const auto &r : oracle.regions)
      anchors.push_back(r.entry);
    std::sort(anchors.begin(), anchors.end());
    return decompose_anchor_extension(g, anchors, req.hops);
  }
  fail(ErrorKind::Precondition, "unknown method \"" + req.method + "\"");
}

Json anchors_row(const std::string &ls, const std::string &rs, const AnchorCorrespondence &c,
                 const std::vector<Ratio> &nb) {
  std::vector<double> vals;
  for (const auto &r : nb)
    vals.push_back(r.value());
  Json j;
  j["left"] = ls;
  j["right"] = rs;
  j["matched"] = c.pairs.size();
  j["left_functions"] = c.left_total;
  j["right_functions"] = c.right_total;
  j["anchor_stability"] = ratio_json(anchor_stability(c));
  j["neighbor_stability"] = summary_to_json(summarize(vals));
  return j;
}

} // namespace

int run_eval(const Options &opts, const EvalRequest &req) {
  const Manifest m = manifest_for(opts);
  apply_jobs(opts);
  EvalOptions eo;
  if (!req.similarity_edges.empty())
    eo.similarity_edges = req.similarity_edges;
  if (!req.granularity_edges.empty())
    eo.granularity_edges = req.granularity_edges;
  for (const auto *edges : {&eo.similarity_edges, &eo.granularity_edges})
    if (edges->size() < 2 || !std::is_sorted(edges->begin(), edges->end()))
      fail(ErrorKind::Precondition, "histogram edges must be ascending with at least two values");

  std::optional<Json> external;
  if (req.decomposition)
    external = parse_json(read_text_file(*req.decomposition), req.decomposition->string());

  const std::size_t n = m.entries.size();
  std::vector<std::optional<FunctionCallGraph>> graphs(n);
  std::vector<std::optional<MefrPartition>> oracles(n);
  std::size_t failed = 0, matched_external = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto &e = m.entries[i];
    const std::string s = stem(e);
    try {
      auto g = load_graph(opts, e);
      auto b2s = load_b2s(opts, e);
      check_ids(g, b2s);
      auto oracle = parse_mefr_json(read_text_file(opts.out / "mefr" / (s + ".json")), g);
      graphs[i] = g;
      oracles[i] = oracle;
      Decomposition d;
      if (external) {
        if (!external->contains("graph_id") || (*external)["graph_id"] != g.binary_id())
          continue;
        ++matched_external;
        d = load_external_decomposition(*req.decomposition, g);
      } else {
        d = builtin_decomposition(req, g, oracle);
      }
      auto report = evaluate_decomposition(oracle, d, g, b2s, eo);
      const fs::path base = opts.out / "report" / (s + "." + d.method);
      if (opts.format == Format::Json)
        write_text_file(base.string() + ".json", to_report_json(report));
      else
        write_text_file(base.string() + ".csv", to_report_csv(report));
      std::printf("eval %s %s: %zu regions, median similarity %s, median granularity %s\n",
                  s.c_str(), d.method.c_str(), report.per_mefr.size(),
                  fixed(report.similarity.median).c_str(),
                  fixed(report.granularity.median).c_str());
    } catch (const Error &err) {
      if (err.is_input_error())
        throw;
      ++failed;
      spdlog::error("eval {}: {}", s, err.what());
    }
  }
  if (external && matched_external == 0)
    fail(ErrorKind::IdMismatch, req.decomposition->string() +
                                    ": graph_id matches no call graph in the manifest");

  Json rows = Json::array();
  std::vector<double> pooled, pair_means, anchor_vals;
  std::string csv = "left,right,matched,left_functions,right_functions,anchor_stability,"
                    "neighbor_stability_median,neighbor_stability_mean\n";
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      if (!graphs[a] || !graphs[b])
        continue;
      auto entries = [](const MefrPartition &p) {
        std::vector<NodeIndex> v;
        for (const auto &r : p.regions)
          v.push_back(r.entry);
        std::sort(v.begin(), v.end());
        return v;
      };
      auto ba = entries(*oracles[a]), bb = entries(*oracles[b]);
      auto b2a = load_b2s(opts, m.entries[a]), b2b = load_b2s(opts, m.entries[b]);
      auto c = match_anchors(*graphs[a], b2a, ba, *graphs[b], b2b, bb);
      auto nb = neighbor_stabilities(*graphs[a], *graphs[b], c);
      const std::string ls = stem(m.entries[a]), rs = stem(m.entries[b]);
      Json row = anchors_row(ls, rs, c, nb);
      for (const auto &r : nb)
        pooled.push_back(r.value());
      if (!nb.empty())
        pair_means.push_back(row["neighbor_stability"]["mean"].get<double>());
      anchor_vals.push_back(anchor_stability(c).value());
      csv += ls + "," + rs + "," + std::to_string(c.pairs.size()) + "," +
             std::to_string(c.left_total) + "," + std::to_string(c.right_total) + "," +
             fixed(anchor_stability(c).value()) + "," +
             fixed(row["neighbor_stability"]["median"].get<double>()) + "," +
             fixed(row["neighbor_stability"]["mean"].get<double>()) + "\n";
      rows.push_back(std::move(row));
    }
  // Neighbor stability averaged two ways: over every matched anchor, and
  // over the per-pair means.
  auto mean = [](const std::vector<double> &v) {
    double s = 0;
    for (double x : v)
      s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  Json agg;
  agg["pairs"] = anchor_vals.size();
  agg["anchor_stability_mean"] = mean(anchor_vals);
  agg["neighbor_stability_over_anchors"] = mean(pooled);
  agg["neighbor_stability_over_pairs"] = mean(pair_means);
  if (opts.format == Format::Json) {
    Json j;
    j["schema"] = "anchors/1";
    j["project"] = m.project;
    j["pairs"] = std::move(rows);
    j["aggregate"] = std::move(agg);
    write_text_file(opts.out / "report" / "anchors.json", dump_json(j));
  } else {
    write_text_file(opts.out / "report" / "anchors.csv", csv);
    write_text_file(opts.out / "report" / "anchors_aggregate.csv",
                    "pairs,anchor_stability_mean,neighbor_stability_over_anchors,"
                    "neighbor_stability_over_pairs\n" +
                        std::to_string(anchor_vals.size()) + "," + fixed(mean(anchor_vals)) +
                        "," + fixed(mean(pooled)) + "," + fixed(mean(pair_means)) + "\n");
  }
  return failed ? kExitPartial : kExitOk;
}

int run_report(const Options &opts) {
  const fs::path dir = opts.out / "report";
  if (!fs::is_directory(dir))
    fail(ErrorKind::Io, dir.string() + ": no reports; run eval first");
  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json" && e.path().filename() != "anchors.json")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::string csv = "graph_id,method,regions,similarity_median,similarity_mean,"
                    "granularity_median,granularity_mean,exact_matches\n";
  Json rows = Json::array();
  for (const auto &f : files) {
    Json r = parse_json(read_text_file(f), f.string());
    expect_schema(r, "report/1", f.string());
    const auto &regions = require_array(r, "regions", "/regions");
    std::size_t exact = 0;
    for (const auto &x : regions)
      exact += x.at("similarity").get<double>() == 1.0 && x.at("granularity").get<double>() == 1.0;
    const auto &s = r.at("summary");
    Json row = {{"graph_id", r.at("graph_id")},
                {"method", r.at("method")},
                {"regions", regions.size()},
                {"similarity_median", s.at("similarity").at("median")},
                {"similarity_mean", s.at("similarity").at("mean")},
                {"granularity_median", s.at("granularity").at("median")},
                {"granularity_mean", s.at("granularity").at("mean")},
                {"exact_matches", exact}};
    csv += r.at("graph_id").get<std::string>() + "," + r.at("method").get<std::string>() + "," +
           std::to_string(regions.size()) + "," +
           fixed(row["similarity_median"].get<double>()) + "," +
           fixed(row["similarity_mean"].get<double>()) + "," +
           fixed(row["granularity_median"].get<double>()) + "," +
           fixed(row["granularity_mean"].get<double>()) + "," + std::to_string(exact) + "\n";
    rows.push_back(std::move(row));
  }
  Json j;
  j["schema"] = "summary/1";
  j["reports"] = std::move(rows);
  if (fs::exists(opts.out / "b2b" / "distribution.json"))
    j["distribution"] =
        parse_json(read_text_file(opts.out / "b2b" / "distribution.json"), "distribution")
            .at("aggregate");
  if (fs::exists(dir / "anchors.json")) {
    Json a = parse_json(read_text_file(dir / "anchors.json"), "anchors");
    j["anchors"] = a.at("pairs");
    if (a.contains("aggregate"))
      j["anchor_aggregate"] = a.at("aggregate");
  }
  if (opts.format == Format::Json)
    write_text_file(opts.out / "summary.json", dump_json(j));
  else
    write_text_file(opts.out / "summary.csv", csv);
  std::fputs(csv.c_str(), stdout);
  return kExitOk;
}

int run_synth(const SynthConfig &cfg, const fs::path &out) {
  auto corpus = generate_corpus(cfg);
  write_corpus(corpus, out);
  std::printf("synth: %zu source functions, %zu calls, %zu settings, %zu never inlined -> %s\n",
              corpus.program.functions.size(), corpus.program.calls.size(),
              corpus.settings.size(), corpus.never_inlined.size(), out.string().c_str());
  return kExitOk;
}

} // namespace mefr::cli
