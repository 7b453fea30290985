#include "gcontext/pipeline.hpp"

#include <algorithm>
#include <set>

#include "gcontext/annotate.hpp"
#include "gcontext/collect.hpp"
#include "gcontext/error.hpp"
#include "gcontext/families.hpp"
#include "gcontext/io.hpp"
#include "gcontext/log.hpp"
#include "gcontext/output.hpp"
#include "gcontext/profiler.hpp"
#include "gcontext/serialize.hpp"
#include "gcontext/stores.hpp"
#include "gcontext/targets.hpp"

namespace gcontext {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const ExitReport& r) {
  return json{{"targets_parsed", r.targets_parsed},
              {"targets_resolved", r.targets_resolved},
              {"targets_unresolved", r.targets_unresolved},
              {"contexts_built", r.contexts_built},
              {"contexts_usable", r.contexts_usable},
              {"contexts_incomplete", r.contexts_incomplete},
              {"families_found", r.families_found},
              {"operon_types", r.operon_types},
              {"lineages_attached", r.lineages_attached},
              {"lineages_unknown", r.lineages_unknown},
              {"annotation_rows", r.annotation_rows},
              {"annotations_unmatched", r.annotations_unmatched},
              {"annotations_malformed", r.annotations_malformed},
              {"taxonomy_loads", r.taxonomy_loads}};
}

namespace {

// Runs one step; anything it throws is rethrown tagged with the step name.
template <class Thunk>
void stage(Profiler& profiler, const char* name, bool parallel, Thunk&& thunk) {
  try {
    profiler.record_step(name, parallel, std::forward<Thunk>(thunk));
  } catch (const StageError&) {
    throw;
  } catch (const ParallelMapError& e) {
    throw StageError(name, std::string(e.what()) + " (chunk " + std::to_string(e.chunk_id()) + ")");
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::map<std::string, std::string> clustering_input(const std::vector<GenomicContext>& contexts) {
  std::map<std::string, std::string> seqs;
  for (const auto& c : contexts)
    if (c.usable())
      for (const auto& [code, s] : c.sequences) seqs.emplace(code, s);
  return seqs;
}

}  // namespace

ExitReport run_pipeline(const RunConfig& cfg, const PipelineHooks& hooks) {
  ExitReport report;
  fs::create_directories(cfg.out_dir);
  remove_done_sentinel(cfg.out_dir);
  for (auto name : bundle_files) {
    std::error_code ec;
    fs::remove(cfg.out_dir / name, ec);
  }

  PoolOptions pool_options;
  pool_options.transport = cfg.transport;
  pool_options.workers = cfg.workers;
  pool_options.cores_per_worker = cfg.cores_per_worker;
  pool_options.listen = cfg.listen;
  pool_options.handshake_timeout = cfg.handshake_timeout;
  pool_options.on_listening = hooks.on_listening;
  std::unique_ptr<Pool> pool;
  try {
    pool = Pool::open(pool_options);
  } catch (const std::exception& e) {
    throw StageError("executor", e.what());
  }
  const auto policy = cfg.chunking_policy();
  const auto loads_before = TaxonomyTable::load_count();

  Profiler profiler;
  profiler.begin_run();
  OutputData data;
  std::vector<Target> resolved;
  try {
    stage(profiler, "mapping", true, [&] {
      auto targets = parse_targets(cfg.targets_paths);
      report.targets_parsed = targets.size();
      json items = targets;
      auto out = map_and_record(*pool, profiler, "collect.resolve", items, {{"data_dir", cfg.data_dir.string()}},
                                policy);
      std::vector<Resolution> resolutions;
      for (const auto& r : out.results)
        resolutions.push_back({r.at("canonical_code").is_null()
                                   ? std::nullopt
                                   : std::optional<std::string>(r.at("canonical_code").get<std::string>()),
                               r.at("reason").get<std::string>()});
      auto outcome = partition_resolutions(targets, resolutions);
      resolved = std::move(outcome.resolved);
      data.unresolved = std::move(outcome.unresolved);
      report.targets_resolved = resolved.size();
      report.targets_unresolved = data.unresolved.size();
    });

    try {
      data.contexts = collect_contexts(resolved, {cfg.data_dir, cfg.n_flanking_up, cfg.n_flanking_down}, *pool,
                                       policy, profiler);
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      std::string step = profiler.steps().empty() ? "collect" : profiler.steps().back().step_name;
      throw StageError(step, e.what());
    }
    report.contexts_built = data.contexts.size();
    for (const auto& c : data.contexts) {
      if (!c.usable()) continue;
      ++report.contexts_usable;
      if (!c.complete) ++report.contexts_incomplete;
    }

    std::map<std::string, std::string> sequences;
    stage(profiler, "find_families", false, [&] {
      sequences = clustering_input(data.contexts);
      std::vector<std::string> labels;
      for (const auto& [code, s] : sequences) labels.push_back(code);
      std::vector<SimilarityHit> hits;
      if (cfg.similarity_backend == SimilarityBackend::builtin) {
        hits = builtin_all_vs_all(sequences, cfg.kmer_size);
      } else {
        ExternalToolOptions tool{*cfg.external_tool_path, cfg.cores_per_worker, cfg.external_query_column,
                                 cfg.external_subject_column, cfg.external_score_column};
        hits = external_all_vs_all(sequences, tool);
        // Hits for codes outside the input would not fit the matrix.
        std::erase_if(hits, [&](const SimilarityHit& h) { return !sequences.count(h.query) || !sequences.count(h.subject); });
      }
      auto matrix = hits_to_distance(hits, labels);
      data.families = single_linkage(matrix, cfg.family_distance_cutoff);
      choose_representatives(data.families, sequences);
      report.families_found = data.families.size();
    });

    stage(profiler, "assign_families", true, [&] {
      json index = json::object();
      for (const auto& f : data.families)
        for (const auto& m : f.members) index[m] = f.family_id;
      json items = json::array();
      std::vector<std::size_t> slots;
      for (std::size_t i = 0; i < data.contexts.size(); ++i) {
        if (!data.contexts[i].usable()) continue;
        json codes = json::array();
        for (const auto& g : data.contexts[i].genes) codes.push_back(g.protein_code);
        items.push_back(std::move(codes));
        slots.push_back(i);
      }
      auto out = map_and_record(*pool, profiler, "families.assign", items, {{"index", index}}, policy);
      std::size_t missing = 0;
      for (std::size_t k = 0; k < slots.size(); ++k) {
        auto ids = out.results.at(k).get<std::map<std::string, int>>();
        for (const auto& [code, id] : ids) missing += id < 0;
        data.contexts[slots[k]].family_ids = std::move(ids);
      }
      if (missing) log_warn(missing, " gene(s) belong to no family; assigned family -1");
    });

    stage(profiler, "operons", true, [&] {
      json items = json::array();
      std::vector<std::size_t> slots;
      for (std::size_t i = 0; i < data.contexts.size(); ++i) {
        if (!data.contexts[i].usable()) continue;
        items.push_back(data.contexts[i].family_ids);
        slots.push_back(i);
      }
      auto out = map_and_record(*pool, profiler, "annotate.fingerprint", items, json::object(), policy);
      std::vector<std::pair<std::string, std::vector<int>>> fps;
      for (std::size_t k = 0; k < slots.size(); ++k)
        fps.emplace_back(data.contexts[slots[k]].target.raw_id, out.results.at(k).get<std::vector<int>>());
      data.operons = cluster_operons(fps, cfg.operon_distance_cutoff);
      std::map<std::string, int> type_of;
      for (const auto& t : data.operons)
        for (const auto& m : t.member_targets) type_of[m] = t.operon_id;
      for (auto& c : data.contexts) {
        auto it = type_of.find(c.target.raw_id);
        if (it != type_of.end()) c.operon_type = it->second;
      }
      report.operon_types = data.operons.size();
    });

    stage(profiler, "taxonomy", false, [&] {
      auto table = TaxonomyTable::load(store_path(cfg.data_dir, StoreKind::taxonomy));
      auto assemblies = AssembliesStore::open(store_path(cfg.data_dir, StoreKind::assemblies));
      auto stats = attach_lineages(data.contexts, table, assemblies);
      report.lineages_attached = stats.attached;
      report.lineages_unknown = stats.unknown_taxid;
      data.taxonomy_tree = build_taxonomy_tree(data.contexts);
    });

    stage(profiler, "annotate_functions", false, [&] {
      data.annotations = apply_user_annotations(data.contexts, data.families, cfg.annotation_files);
      report.annotation_rows = data.annotations.rows;
      report.annotations_unmatched = data.annotations.unmatched;
      report.annotations_malformed = data.annotations.malformed;
    });

    report.taxonomy_loads = TaxonomyTable::load_count() - loads_before;
    stage(profiler, "output", false, [&] {
      write_tables(data, cfg.out_dir);
      write_text_file(cfg.out_dir / "run.json", to_json(report).dump(1) + "\n");
    });
  } catch (...) {
    profiler.end_run();
    try {
      emit_profile(profiler, cfg.out_dir);
    } catch (const std::exception& e) {
      log_warn("could not write profile: ", e.what());
    }
    throw;
  }
  profiler.end_run();
  emit_profile(profiler, cfg.out_dir);
  report.profile_path = cfg.out_dir / "profile.json";
  write_done_sentinel(cfg.out_dir);
  return report;
}

}  // namespace gcontext
