#pragma once

#include <cstddef>
#include <filesystem>
#include <list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcontext/error.hpp"
#include "gcontext/executor.hpp"
#include "gcontext/model.hpp"
#include "gcontext/stores.hpp"

namespace gcontext {

class Profiler;

struct Unresolved {
  Target target;
  std::string reason;
  friend bool operator==(const Unresolved&, const Unresolved&) = default;
};

struct Resolution {
  std::optional<std::string> canonical_code;
  std::string reason;  // set when canonical_code is empty
};

/// Resolves each target to an NCBI protein code. RefSeq and GenBank ids
/// pass through. Others go through the mappings store, preferring the
/// record's RefSeq value over its EMBL-CDS protein id.
std::vector<Resolution> resolve_batch(const std::vector<Target>& targets, const MappingsStore& mappings);

struct ResolveOutcome {
  std::vector<Target> resolved;  // canonical_code set, input order kept
  std::vector<Unresolved> unresolved;
};

ResolveOutcome resolve_targets(const std::vector<Target>& targets, const MappingsStore& mappings);

/// Partitions targets given their resolutions (parallel path).
ResolveOutcome partition_resolutions(const std::vector<Target>& targets, const std::vector<Resolution>& resolutions);

/// RefSeq assemblies before GenBank ones, then the smallest accession.
std::optional<AssemblyRecord> choose_assembly(const std::vector<AssemblyRecord>& candidates);

class NotAnnotatedError : public DataError {
 public:
  NotAnnotatedError() : DataError("target not annotated in assembly") {}
};

struct FlankingResult {
  std::vector<Gene> genes;  // ordered by relative_position
  bool complete = false;
};

/// Selects up to n_up genes upstream and n_down downstream of the target on
/// its contig. `genes` must be sorted by (contig, position). For a target
/// on the minus strand upstream lies at higher coordinates.
FlankingResult extract_flanking(const std::vector<Gene>& genes, const std::string& target_code, int n_up, int n_down);

/// Small per-worker LRU of parsed annotation files.
class GffCache {
 public:
  explicit GffCache(std::size_t capacity = 32) : capacity_(capacity) {}
  const std::vector<Gene>& get(const std::filesystem::path& path);
  std::size_t parses() const noexcept { return parses_; }

 private:
  std::size_t capacity_;
  std::size_t parses_ = 0;
  std::list<std::pair<std::string, std::vector<Gene>>> entries_;
};

struct FlankingRequest {
  std::string code;
  std::string accession;
  std::string annotation_path;  // absolute
  bool file_missing = false;
};

struct FlankingOutcome {
  ContextStatus status = ContextStatus::ok;
  FlankingResult flanking;
};

FlankingOutcome flank_target(const FlankingRequest& request, int n_up, int n_down, GffCache& cache);

struct CollectOptions {
  std::filesystem::path data_dir;
  int n_up = 4;
  int n_down = 4;
};

/// Step 1 after resolution: locate assemblies, parse annotations, extract
/// flanking genes and fetch sequences, each as a distributed map recorded
/// as its own profiler step. One context per resolved target, input order.
std::vector<GenomicContext> collect_contexts(const std::vector<Target>& resolved, const CollectOptions& options,
                                             Pool& pool, const ChunkingPolicy& policy, Profiler& profiler);

}  // namespace gcontext
