#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>

#include "gcontext/config.hpp"
#include "gcontext/error.hpp"
#include "gcontext/executor.hpp"
#include "gcontext/ingest.hpp"
#include "gcontext/io.hpp"
#include "gcontext/log.hpp"
#include "gcontext/pipeline.hpp"
#include "gcontext/profiler.hpp"
#include "gcontext/scheduling.hpp"

namespace fs = std::filesystem;
using namespace gcontext;
using nlohmann::json;

namespace {

constexpr int exit_usage = 1;
constexpr int exit_data = 2;

// "name=index,name=index" column overrides.
std::map<std::string, std::size_t> parse_columns(const std::string& text) {
  std::map<std::string, std::size_t> out;
  if (text.empty()) return out;
  for (auto part : split(text, ',')) {
    auto kv = split(part, '=');
    if (kv.size() != 2) throw UsageError("--columns: expected name=index, got '" + std::string(part) + "'");
    try {
      out[std::string(trim(kv[0]))] = std::stoul(std::string(trim(kv[1])));
    } catch (const std::exception&) {
      throw UsageError("--columns: bad index in '" + std::string(part) + "'");
    }
  }
  return out;
}

template <class Columns>
void set_column(Columns& cols, const std::map<std::string, std::size_t>& overrides,
                const std::map<std::string, std::size_t Columns::*>& fields) {
  for (const auto& [name, idx] : overrides) {
    auto it = fields.find(name);
    if (it == fields.end()) throw UsageError("--columns: unknown column '" + name + "'");
    cols.*(it->second) = idx;
  }
}

int cmd_ingest(const std::string& kind_text, const std::vector<std::string>& inputs, const std::string& out_dir,
               const std::string& gff_root, const std::string& columns) {
  const auto kind = parse_store_kind(kind_text);
  if (inputs.empty()) throw UsageError("--in: at least one input file required");
  std::vector<fs::path> in(inputs.begin(), inputs.end());
  fs::create_directories(out_dir);
  const auto out = store_path(out_dir, kind);
  const auto overrides = parse_columns(columns);
  IngestManifest m;
  switch (kind) {
    case StoreKind::mappings: {
      if (in.size() != 1) throw UsageError("--in: the mappings store is built from exactly one file");
      MappingColumns cols;
      set_column(cols, overrides,
                 {{"uniprot_ac", &MappingColumns::uniprot_ac},
                  {"uniprot_id", &MappingColumns::uniprot_id},
                  {"gene_id", &MappingColumns::gene_id},
                  {"refseq", &MappingColumns::refseq},
                  {"uniparc", &MappingColumns::uniparc},
                  {"embl_cds", &MappingColumns::embl_cds},
                  {"expected_columns", &MappingColumns::expected_columns}});
      m = build_mappings_store(in.front(), out, cols);
      break;
    }
    case StoreKind::assemblies: {
      if (gff_root.empty()) throw UsageError("--gff-root is required for --kind assemblies");
      AssemblySummaryColumns cols;
      set_column(cols, overrides,
                 {{"accession", &AssemblySummaryColumns::accession},
                  {"taxid", &AssemblySummaryColumns::taxid},
                  {"organism", &AssemblySummaryColumns::organism},
                  {"ftp_path", &AssemblySummaryColumns::ftp_path}});
      m = build_assemblies_store(in, gff_root, out, cols);
      break;
    }
    case StoreKind::sequences:
      m = build_sequences_store(in, out);
      break;
    case StoreKind::taxonomy:
      if (in.size() != 1) throw UsageError("--in: the taxonomy table is built from exactly one file");
      m = build_taxonomy_table(in.front(), out);
      break;
  }
  std::cout << to_json(m).dump(2) << '\n';
  return 0;
}

int cmd_run(std::vector<std::string> args) {
  if (std::find(args.begin(), args.end(), "--help") != args.end() ||
      std::find(args.begin(), args.end(), "-h") != args.end()) {
    std::cout << "Usage: gcontext run --targets FILE --out DIR --data DIR [options]\n\n" << config_help();
    return 0;
  }
  args.insert(args.begin(), "run");
  auto cfg = parse_config(args);
  set_log_level(cfg.log_level);
  PipelineHooks hooks;
  hooks.on_listening = [](std::uint16_t port) {
    std::cerr << "coordinator listening on port " << port << std::endl;
  };
  auto report = run_pipeline(cfg, hooks);
  auto j = to_json(report);
  j["profile"] = report.profile_path.string();
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct BenchArgs {
  std::size_t tasks = 200;
  std::size_t workers = 8;
  std::string distribution = "heavy";
  double heavy_fraction = 0.1;
  double heavy_share = 0.8;
  double pareto_alpha = 1.5;
  std::uint64_t seed = 1;
  std::vector<std::size_t> chunk_sizes{1, 4};
  bool real = false;
  std::string transport = "multiprocess";
  double task_ms = 50;
};

int cmd_bench(const BenchArgs& a) {
  if (a.tasks == 0 || a.workers == 0) throw UsageError("--tasks and --workers must be positive");
  if (a.real) {
    std::vector<double> items(a.tasks, a.task_ms);
    auto run = [&](int workers) {
      PoolOptions o;
      o.transport = parse_transport(a.transport);
      o.workers = workers;
      auto pool = Pool::open(o);
      auto t0 = monotonic_ns();
      parallel_map<double>(*pool, "bench.spin", items, {ChunkingMode::dynamic_chunks, 1});
      return static_cast<double>(monotonic_ns() - t0) / 1e9;
    };
    const double serial = run(1);
    const double parallel = run(static_cast<int>(a.workers));
    std::printf("tasks %zu x %.1f ms, transport %s\n", a.tasks, a.task_ms, a.transport.c_str());
    std::printf("%-10s %12s\n", "workers", "wall_s");
    std::printf("%-10d %12s\n", 1, format_fixed(serial).c_str());
    std::printf("%-10zu %12s\n", a.workers, format_fixed(parallel).c_str());
    std::printf("speedup %s\n", format_fixed(serial / parallel).c_str());
    return 0;
  }
  std::vector<double> times;
  if (a.distribution == "uniform")
    times = uniform_task_times(a.tasks, 1.0);
  else if (a.distribution == "heavy")
    times = heavy_tailed_task_times(a.tasks, a.heavy_fraction, a.heavy_share, a.seed);
  else if (a.distribution == "pareto")
    times = pareto_task_times(a.tasks, a.pareto_alpha, a.seed);
  else
    throw UsageError("--distribution: expected uniform, heavy or pareto");
  std::vector<ChunkingPolicy> policies{{ChunkingMode::static_chunks, 1}};
  for (auto c : a.chunk_sizes) {
    if (c == 0) throw UsageError("--chunk-sizes: sizes must be positive");
    policies.push_back({ChunkingMode::dynamic_chunks, c});
  }
  auto results = bench_scheduling(times, a.workers, policies);
  double total = 0;
  for (double t : times) total += t;
  std::printf("distribution %s, %zu tasks, %zu workers, total work %s\n", a.distribution.c_str(), a.tasks, a.workers,
              format_fixed(total).c_str());
  std::printf("%-18s %14s %12s\n", "policy", "makespan", "vs_static");
  for (const auto& r : results) {
    std::string name = r.policy.mode == ChunkingMode::static_chunks
                           ? "static"
                           : "dynamic(" + std::to_string(r.policy.dynamic_chunk_size) + ")";
    std::printf("%-18s %14s %12s\n", name.c_str(), format_fixed(r.makespan).c_str(),
                format_fixed(r.makespan / results.front().makespan).c_str());
  }
  return 0;
}

int cmd_profile_report(const std::string& run_dir, std::size_t width) {
  fs::path p = run_dir;
  if (fs::is_directory(p)) p /= "profile.json";
  json profile;
  try {
    profile = json::parse(read_text_file(p));
  } catch (const json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  }
  std::cout << render_profile_report(profile, width);
  auto problems = check_profile(profile);
  for (const auto& s : problems) std::cout << "integrity: " << s << '\n';
  return problems.empty() ? 0 : exit_data;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Genomic context analysis over a coordinator/worker pool"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "error | warn | info | debug");

  auto* ingest = app.add_subcommand("ingest", "Build a store from raw dumps");
  std::string kind, out_dir, gff_root, columns;
  std::vector<std::string> inputs;
  ingest->add_option("--kind", kind, "mappings | assemblies | sequences | taxonomy")->required();
  ingest->add_option("--in", inputs, "input files")->required();
  ingest->add_option("--out", out_dir, "data directory")->required();
  ingest->add_option("--gff-root", gff_root, "directory of annotation files (assemblies)");
  ingest->add_option("--columns", columns, "column overrides, name=index,...");

  auto* run = app.add_subcommand("run", "Run the pipeline (see `gcontext run --help`)");
  run->prefix_command();
  run->set_help_flag();

  auto* bench = app.add_subcommand("bench", "Compare chunking policies");
  BenchArgs bargs;
  bench->add_option("--tasks", bargs.tasks);
  bench->add_option("--workers", bargs.workers);
  bench->add_option("--distribution", bargs.distribution, "uniform | heavy | pareto");
  bench->add_option("--heavy-fraction", bargs.heavy_fraction);
  bench->add_option("--heavy-share", bargs.heavy_share);
  bench->add_option("--pareto-alpha", bargs.pareto_alpha);
  bench->add_option("--seed", bargs.seed);
  bench->add_option("--chunk-sizes", bargs.chunk_sizes)->delimiter(',');
  bench->add_flag("--real", bargs.real, "time CPU-bound tasks on a real pool instead of simulating");
  bench->add_option("--transport", bargs.transport);
  bench->add_option("--task-ms", bargs.task_ms);

  auto* report = app.add_subcommand("profile-report", "Summarise profile.json of a run");
  std::string run_dir;
  std::size_t width = 60;
  report->add_option("run_dir", run_dir, "run output directory or profile.json")->required();
  report->add_option("--width", width);

  auto* worker = app.add_subcommand("worker", "Join a socket-transport coordinator");
  std::string connect;
  std::optional<int> worker_id;
  double timeout_s = 30;
  worker->add_option("--connect", connect, "HOST:PORT")->required();
  worker->add_option("--id", worker_id, "requested worker id");
  worker->add_option("--timeout", timeout_s, "seconds to wait for the coordinator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : exit_usage;
  }

  try {
    set_log_level(parse_log_level(log_level));
    if (*ingest) return cmd_ingest(kind, inputs, out_dir, gff_root, columns);
    if (*run) return cmd_run(run->remaining());
    if (*bench) return cmd_bench(bargs);
    if (*report) return cmd_profile_report(run_dir, width);
    if (*worker)
      return connect_and_run_worker(connect, *builtin_task_registry(), worker_id,
                                    std::chrono::milliseconds(static_cast<std::int64_t>(timeout_s * 1000)));
  } catch (const UsageError& e) {
    std::cerr << "gcontext: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "gcontext: " << e.what() << '\n';
    return exit_data;
  }
  return 0;
}
