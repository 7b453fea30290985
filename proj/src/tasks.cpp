#include <unistd.h>

#include <chrono>
#include <cmath>

#include "gcontext/annotate.hpp"
#include "gcontext/collect.hpp"
#include "gcontext/executor.hpp"
#include "gcontext/serialize.hpp"
#include "gcontext/stores.hpp"

namespace gcontext {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path data_dir_of(const json& params) { return params.at("data_dir").get<std::string>(); }

const MappingsStore& mappings_of(WorkerContext& ctx, const json& params) {
  auto dir = data_dir_of(params);
  return ctx.cached<MappingsStore>("mappings:" + dir.string(),
                                   [&] { return MappingsStore::open(store_path(dir, StoreKind::mappings)); });
}

const AssembliesStore& assemblies_of(WorkerContext& ctx, const json& params) {
  auto dir = data_dir_of(params);
  return ctx.cached<AssembliesStore>("assemblies:" + dir.string(),
                                     [&] { return AssembliesStore::open(store_path(dir, StoreKind::assemblies)); });
}

const SequencesStore& sequences_of(WorkerContext& ctx, const json& params) {
  auto dir = data_dir_of(params);
  return ctx.cached<SequencesStore>("sequences:" + dir.string(),
                                    [&] { return SequencesStore::open(store_path(dir, StoreKind::sequences)); });
}

json resolve_task(const json& items, const json& params, WorkerContext& ctx) {
  auto targets = items.get<std::vector<Target>>();
  auto resolutions = resolve_batch(targets, mappings_of(ctx, params));
  json out = json::array();
  for (const auto& r : resolutions)
    out.push_back({{"canonical_code", r.canonical_code ? json(*r.canonical_code) : json(nullptr)},
                   {"reason", r.reason}});
  return out;
}

json locate_task(const json& items, const json& params, WorkerContext& ctx) {
  const auto& store = assemblies_of(ctx, params);
  auto codes = items.get<std::vector<std::string>>();
  auto found = store.lookup_assembly(codes);
  json out = json::array();
  for (const auto& code : codes) {
    auto chosen = choose_assembly(found.at(code));
    if (!chosen) {
      out.push_back(nullptr);
      continue;
    }
    out.push_back({{"record", *chosen}, {"annotation_path", store.annotation_path(*chosen).string()}});
  }
  return out;
}

json flanking_task(const json& items, const json& params, WorkerContext& ctx) {
  auto& cache = ctx.cached<GffCache>("gff-cache", [] { return GffCache(32); });
  const int n_up = params.at("n_up").get<int>();
  const int n_down = params.at("n_down").get<int>();
  json out = json::array();
  for (const auto& item : items) {
    FlankingRequest r{item.at("code").get<std::string>(), item.at("accession").get<std::string>(),
                      item.at("annotation_path").get<std::string>(), item.at("file_missing").get<bool>()};
    auto outcome = flank_target(r, n_up, n_down, cache);
    out.push_back({{"status", std::string(to_string(outcome.status))},
                   {"genes", outcome.flanking.genes},
                   {"complete", outcome.flanking.complete}});
  }
  return out;
}

json sequences_task(const json& items, const json& params, WorkerContext& ctx) {
  const auto& store = sequences_of(ctx, params);
  std::vector<std::string> all;
  for (const auto& list : items)
    for (const auto& c : list) all.push_back(c.get<std::string>());
  auto found = store.fetch_sequences(all);
  json out = json::array();
  for (const auto& list : items) {
    json seqs = json::object();
    for (const auto& c : list) {
      const auto& s = found.at(c.get<std::string>());
      if (s) seqs[c.get<std::string>()] = *s;
    }
    out.push_back(std::move(seqs));
  }
  return out;
}

json assign_task(const json& items, const json& params, WorkerContext&) {
  const auto& index = params.at("index");
  json out = json::array();
  for (const auto& list : items) {
    json ids = json::object();
    for (const auto& c : list) {
      auto code = c.get<std::string>();
      auto it = index.find(code);
      ids[code] = it == index.end() ? -1 : it->get<int>();
    }
    out.push_back(std::move(ids));
  }
  return out;
}

json fingerprint_task(const json& items, const json&, WorkerContext&) {
  json out = json::array();
  for (const auto& ids : items) out.push_back(fingerprint_of(ids.get<std::map<std::string, int>>()));
  return out;
}

json square_task(const json& items, const json&, WorkerContext&) {
  json out = json::array();
  for (const auto& v : items) {
    auto x = v.get<std::int64_t>();
    out.push_back(x * x);
  }
  return out;
}

// Busy-waits for each item's milliseconds; returns the items unchanged.
json spin_task(const json& items, const json&, WorkerContext&) {
  json out = json::array();
  volatile double sink = 0;
  for (const auto& v : items) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::microseconds(
                                                                  static_cast<std::int64_t>(v.get<double>() * 1000));
    std::uint64_t i = 0;
    while (std::chrono::steady_clock::now() < deadline)
      for (int k = 0; k < 1000; ++k) sink = sink + std::sqrt(static_cast<double>(++i));
    out.push_back(v);
  }
  return out;
}

// Fails every chunk containing params.fail_value, and every chunk run on
// worker params.fail_worker.
json fail_task(const json& items, const json& params, WorkerContext& ctx) {
  if (params.contains("fail_worker") && params.at("fail_worker").get<int>() == ctx.worker_id())
    throw Error("injected failure on worker " + std::to_string(ctx.worker_id()));
  if (params.contains("fail_value"))
    for (const auto& v : items)
      if (v == params.at("fail_value")) throw Error("injected failure on item " + v.dump());
  return square_task(items, params, ctx);
}

// Kills the worker process when run on worker params.crash_worker.
json crash_task(const json& items, const json& params, WorkerContext& ctx) {
  if (params.at("crash_worker").get<int>() == ctx.worker_id()) {
    if (ctx.in_process()) throw Error("simulated crash of worker " + std::to_string(ctx.worker_id()));
    _exit(3);
  }
  return square_task(items, params, ctx);
}

}  // namespace

std::shared_ptr<const TaskRegistry> builtin_task_registry() {
  static const std::shared_ptr<const TaskRegistry> registry = [] {
    auto r = std::make_shared<TaskRegistry>();
    r->add("collect.resolve", resolve_task);
    r->add("collect.locate", locate_task);
    r->add("collect.flanking", flanking_task);
    r->add("collect.sequences", sequences_task);
    r->add("families.assign", assign_task);
    r->add("annotate.fingerprint", fingerprint_task);
    r->add("bench.square", square_task);
    r->add("bench.spin", spin_task);
    r->add("bench.fail", fail_task);
    r->add("bench.crash", crash_task);
    return std::shared_ptr<const TaskRegistry>(std::move(r));
  }();
  return registry;
}

}  // namespace gcontext
