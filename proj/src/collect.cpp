#include "gcontext/collect.hpp"

#include <algorithm>

#include "gcontext/gff.hpp"
#include "gcontext/log.hpp"
#include "gcontext/profiler.hpp"
#include "gcontext/serialize.hpp"

namespace gcontext {

using nlohmann::json;

std::vector<Resolution> resolve_batch(const std::vector<Target>& targets, const MappingsStore& mappings) {
  std::vector<Resolution> out(targets.size());
  std::map<IdStandard, std::vector<std::string>> by_standard;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    switch (t.id_standard) {
      case IdStandard::refseq:
      case IdStandard::genbank:
        out[i].canonical_code = t.raw_id;
        break;
      case IdStandard::unknown:
        out[i].reason = "unrecognised identifier";
        break;
      default:
        by_standard[t.id_standard].push_back(t.raw_id);
    }
  }
  std::map<IdStandard, std::map<std::string, std::optional<MappingRecord>>> found;
  for (auto& [standard, ids] : by_standard) found[standard] = mappings.records(ids, standard);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    auto it = found.find(t.id_standard);
    if (it == found.end()) continue;
    const auto& record = it->second.at(t.raw_id);
    if (record) {
      auto refseq = record->values(IdStandard::refseq);
      if (!refseq.empty()) {
        out[i].canonical_code = refseq.front();
        continue;
      }
      auto embl = record->values(IdStandard::embl_cds);
      if (!embl.empty()) {
        out[i].canonical_code = embl.front();
        continue;
      }
    }
    if (t.id_standard == IdStandard::embl_cds) {
      out[i].canonical_code = t.raw_id;
      continue;
    }
    out[i].reason = record ? "no RefSeq or EMBL-CDS protein in mapping" : "not found in mappings store";
  }
  return out;
}

ResolveOutcome partition_resolutions(const std::vector<Target>& targets, const std::vector<Resolution>& resolutions) {
  if (targets.size() != resolutions.size()) throw Error("resolution count does not match target count");
  ResolveOutcome outcome;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (resolutions[i].canonical_code) {
      auto t = targets[i];
      t.canonical_code = resolutions[i].canonical_code;
      outcome.resolved.push_back(std::move(t));
    } else {
      outcome.unresolved.push_back({targets[i], resolutions[i].reason});
    }
  }
  return outcome;
}

ResolveOutcome resolve_targets(const std::vector<Target>& targets, const MappingsStore& mappings) {
  return partition_resolutions(targets, resolve_batch(targets, mappings));
}

std::optional<AssemblyRecord> choose_assembly(const std::vector<AssemblyRecord>& candidates) {
  if (candidates.empty()) return std::nullopt;
  return *std::min_element(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    bool ra = a.source_db == SourceDb::refseq, rb = b.source_db == SourceDb::refseq;
    if (ra != rb) return ra;
    return a.assembly_accession < b.assembly_accession;
  });
}

FlankingResult extract_flanking(const std::vector<Gene>& genes, const std::string& target_code, int n_up,
                                int n_down) {
  if (n_up < 0 || n_down < 0) throw UsageError("flank sizes must be non-negative");
  auto it = std::find_if(genes.begin(), genes.end(), [&](const Gene& g) { return g.protein_code == target_code; });
  if (it == genes.end()) throw NotAnnotatedError();
  const auto t = static_cast<std::ptrdiff_t>(it - genes.begin());
  std::ptrdiff_t lo = t, hi = t;
  const auto n = static_cast<std::ptrdiff_t>(genes.size());
  while (lo > 0 && genes[lo - 1].contig == it->contig) --lo;
  while (hi + 1 < n && genes[hi + 1].contig == it->contig) ++hi;
  const std::ptrdiff_t before = t - lo, after = hi - t;
  const bool minus = it->strand == Strand::minus;
  const std::ptrdiff_t up_avail = minus ? after : before;
  const std::ptrdiff_t down_avail = minus ? before : after;
  const auto take_up = std::min<std::ptrdiff_t>(n_up, up_avail);
  const auto take_down = std::min<std::ptrdiff_t>(n_down, down_avail);

  FlankingResult result;
  result.complete = take_up == n_up && take_down == n_down;
  // Positional offset of relative position r.
  auto at = [&](std::ptrdiff_t r) { return minus ? t - r : t + r; };
  for (std::ptrdiff_t r = -take_up; r <= take_down; ++r) {
    Gene g = genes[static_cast<std::size_t>(at(r))];
    g.relative_position = static_cast<int>(r);
    result.genes.push_back(std::move(g));
  }
  return result;
}

const std::vector<Gene>& GffCache::get(const std::filesystem::path& path) {
  const auto key = path.string();
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    if (it->first == key) {
      entries_.splice(entries_.begin(), entries_, it);
      return entries_.front().second;
    }
  }
  auto genes = parse_gff_cds(path);
  ++parses_;
  entries_.emplace_front(key, std::move(genes));
  while (entries_.size() > std::max<std::size_t>(1, capacity_)) entries_.pop_back();
  return entries_.front().second;
}

FlankingOutcome flank_target(const FlankingRequest& request, int n_up, int n_down, GffCache& cache) {
  FlankingOutcome outcome;
  if (request.file_missing || request.annotation_path.empty() ||
      !std::filesystem::exists(request.annotation_path)) {
    outcome.status = ContextStatus::file_missing;
    return outcome;
  }
  try {
    outcome.flanking = extract_flanking(cache.get(request.annotation_path), request.code, n_up, n_down);
  } catch (const NotAnnotatedError&) {
    outcome.status = ContextStatus::not_annotated;
  }
  return outcome;
}

std::vector<GenomicContext> collect_contexts(const std::vector<Target>& resolved, const CollectOptions& options,
                                             Pool& pool, const ChunkingPolicy& policy, Profiler& profiler) {
  std::vector<GenomicContext> contexts(resolved.size());
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    if (!resolved[i].canonical_code) throw Error("collect_contexts needs resolved targets");
    contexts[i].target = resolved[i];
  }
  const json store_params = {{"data_dir", options.data_dir.string()}};
  std::vector<FlankingRequest> requests(contexts.size());

  profiler.record_step("assemblies", true, [&] {
    json codes = json::array();
    for (const auto& t : resolved) codes.push_back(*t.canonical_code);
    auto out = map_and_record(pool, profiler, "collect.locate", codes, store_params, policy);
    for (std::size_t i = 0; i < contexts.size(); ++i) {
      const auto& r = out.results.at(i);
      requests[i].code = *resolved[i].canonical_code;
      if (r.is_null()) {
        contexts[i].status = ContextStatus::no_assembly;
        continue;
      }
      auto record = r.at("record").get<AssemblyRecord>();
      contexts[i].assembly_accession = record.assembly_accession;
      requests[i].accession = record.assembly_accession;
      requests[i].annotation_path = r.at("annotation_path").get<std::string>();
      requests[i].file_missing = record.file_missing;
    }
  });

  profiler.record_step("parse_assemblies", true, [&] {
    json items = json::array();
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
      if (contexts[i].status != ContextStatus::ok) continue;
      const auto& q = requests[i];
      items.push_back({{"code", q.code},
                       {"accession", q.accession},
                       {"annotation_path", q.annotation_path},
                       {"file_missing", q.file_missing}});
      slots.push_back(i);
    }
    const json params = {{"n_up", options.n_up}, {"n_down", options.n_down}};
    auto out = map_and_record(pool, profiler, "collect.flanking", items, params, policy);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      auto& ctx = contexts[slots[k]];
      const auto& r = out.results.at(k);
      ctx.status = parse_context_status(r.at("status").get<std::string>());
      ctx.genes = r.at("genes").get<std::vector<Gene>>();
      ctx.complete = r.at("complete").get<bool>();
    }
  });

  profiler.record_step("sequences", true, [&] {
    json items = json::array();
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
      if (!contexts[i].usable()) continue;
      json codes = json::array();
      for (const auto& g : contexts[i].genes) codes.push_back(g.protein_code);
      items.push_back(std::move(codes));
      slots.push_back(i);
    }
    auto out = map_and_record(pool, profiler, "collect.sequences", items, store_params, policy);
    for (std::size_t k = 0; k < slots.size(); ++k)
      contexts[slots[k]].sequences = out.results.at(k).get<std::map<std::string, std::string>>();
  });

  std::size_t failed = 0;
  for (const auto& c : contexts)
    if (!c.usable()) {
      ++failed;
      log_warn("target ", c.target.raw_id, ": ", to_string(c.status));
    }
  if (failed) log_info(failed, " of ", contexts.size(), " targets yielded no usable context");
  return contexts;
}

}  // namespace gcontext
