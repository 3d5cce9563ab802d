#include <cstdlib>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mefr/error.hpp"
#include "pipeline.hpp"

using namespace mefr;
using namespace mefr::cli;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("mefr");
  logger->set_pattern("mefr: %^%l%$: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char *env = std::getenv("MEFR_LOG")) {
    auto lvl = spdlog::level::from_str(env);
    if (lvl != spdlog::level::off || std::string(env) == "off")
      spdlog::set_level(lvl);
  }
}

} // namespace

int main(int argc, char **argv) {
  setup_logging();

  CLI::App app{"mefr: function-region oracle and decomposition scoring for call graphs"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opts;
  std::string mode = "partition", format = "json";
  app.add_option("--manifest", opts.manifest, "manifest/1 file")->check(CLI::ExistingFile);
  app.add_option("--source-index", opts.source_index, "srcidx/1 file (overrides the manifest)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", opts.out, "output directory");
  app.add_option("--jobs", opts.jobs, "worker threads (default: logical cores)")
      ->check(CLI::PositiveNumber);
  app.add_option("--mode", mode, "region construction mode")
      ->check(CLI::IsMember({"verbatim", "partition"}));
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));

  auto *extract = app.add_subcommand("extract", "call graphs, line tables and b2s maps");
  auto *map = app.add_subcommand("map", "pairwise binary-to-binary mappings");
  std::vector<std::string> pairs;
  map->add_option("--pair", pairs, "LEFT:RIGHT setting pair (repeatable; default all pairs)");
  auto *oracle = app.add_subcommand("oracle", "boundary functions and regions");
  auto *eval = app.add_subcommand("eval", "score a decomposition against the regions");
  EvalRequest req;
  eval->add_option("--method", req.method, "builtin decomposer")
      ->check(CLI::IsMember({"oracle", "singleton", "modularity", "expander", "anchor"}));
  eval->add_option("--decomp", req.decomposition, "external decomp/1 file")
      ->check(CLI::ExistingFile);
  eval->add_option("--max-size", req.max_size, "community size cap for modularity");
  eval->add_option("--radius", req.radius, "expander radius");
  eval->add_option("--hops", req.hops, "anchor extension depth");
  eval->add_flag("--unit-weights", req.unit_weights, "modularity on the simple graph");
  eval->add_option("--sim-edges", req.similarity_edges, "similarity histogram edges")
      ->delimiter(',');
  eval->add_option("--gran-edges", req.granularity_edges, "granularity histogram edges")
      ->delimiter(',');
  auto *report = app.add_subcommand("report", "collect reports into one summary");

  auto *synth = app.add_subcommand("synth", "synthetic corpora with ground truth");
  synth->require_subcommand(1);
  auto *gen = synth->add_subcommand("gen", "generate a corpus");
  SynthConfig cfg;
  gen->add_option("--seed", cfg.seed, "random seed");
  gen->add_option("--n", cfg.n_source_functions, "source functions")->check(CLI::PositiveNumber);
  gen->add_option("--settings", cfg.n_settings, "compilation settings");
  gen->add_option("--density", cfg.edge_density, "call density");
  gen->add_option("--inline-prob", cfg.inline_policy.inline_prob, "inlining chance at full strength");
  gen->add_option("--size-threshold", cfg.inline_policy.size_threshold, "largest inlinable callee, in lines");
  bool no_single_caller = false;
  gen->add_flag("--no-single-caller", no_single_caller,
                "do not always inline callees with one call site");
  gen->add_option("--back-edges", cfg.back_edge_fraction, "fraction of back edges");
  gen->add_option("--per-file", cfg.functions_per_file, "functions per source file");
  gen->add_option("--project", cfg.project, "project name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  opts.mode = parse_mefr_mode(mode);
  opts.format = format == "csv" ? Format::Csv : Format::Json;

  try {
    if (*gen) {
      cfg.inline_policy.always_single_caller = !no_single_caller;
      validate_config(cfg);
      return run_synth(cfg, opts.out);
    }
    if (opts.manifest.empty() && !*report) {
      spdlog::error("--manifest is required");
      return kExitUsage;
    }
    if (*extract)
      return run_extract(opts);
    if (*map)
      return run_map(opts, pairs);
    if (*oracle)
      return run_oracle(opts);
    if (*eval)
      return run_eval(opts, req);
    if (*report)
      return run_report(opts);
  } catch (const Error &e) {
    spdlog::error("{}", e.what());
    return e.is_input_error() ? kExitUsage : kExitPartial;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return kExitPartial;
  }
  return kExitUsage;
}
