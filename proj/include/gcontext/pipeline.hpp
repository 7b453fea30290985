#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "gcontext/config.hpp"

namespace gcontext {

struct ExitReport {
  std::size_t targets_parsed = 0;
  std::size_t targets_resolved = 0;
  std::size_t targets_unresolved = 0;
  std::size_t contexts_built = 0;
  std::size_t contexts_usable = 0;
  std::size_t contexts_incomplete = 0;
  std::size_t families_found = 0;
  std::size_t operon_types = 0;
  std::size_t lineages_attached = 0;
  std::size_t lineages_unknown = 0;
  std::size_t annotation_rows = 0;
  std::size_t annotations_unmatched = 0;
  std::size_t annotations_malformed = 0;
  std::size_t taxonomy_loads = 0;
  std::filesystem::path profile_path;
};

nlohmann::json to_json(const ExitReport& report);

struct PipelineHooks {
  /// Socket transport: receives the bound coordinator port.
  std::function<void(std::uint16_t)> on_listening;
};

/// Runs collect, find-families, annotate and output in order. Writes the
/// bundle under cfg.out_dir; DONE is written only after a successful run.
/// Any stage failure raises StageError naming the step; profile.json is
/// still written.
ExitReport run_pipeline(const RunConfig& cfg, const PipelineHooks& hooks = {});

}  // namespace gcontext
