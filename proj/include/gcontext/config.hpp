#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gcontext/annotate.hpp"
#include "gcontext/executor.hpp"
#include "gcontext/log.hpp"

namespace gcontext {

enum class SimilarityBackend { builtin, external };
std::string_view to_string(SimilarityBackend backend);

struct RunConfig {
  std::vector<std::filesystem::path> targets_paths;
  std::filesystem::path out_dir;
  std::filesystem::path data_dir;
  int n_flanking_up = 4;
  int n_flanking_down = 4;
  double family_distance_cutoff = 0.7;
  double operon_distance_cutoff = 0.5;
  int workers = 1;
  int cores_per_worker = 1;
  Transport transport = Transport::inprocess;
  std::string listen = "127.0.0.1:0";
  std::chrono::milliseconds handshake_timeout{30000};
  ChunkingMode chunking = ChunkingMode::static_chunks;
  std::size_t dynamic_chunk_size = 1;
  SimilarityBackend similarity_backend = SimilarityBackend::builtin;
  std::size_t kmer_size = 5;
  std::optional<std::filesystem::path> external_tool_path;
  std::size_t external_query_column = 0;
  std::size_t external_subject_column = 1;
  std::size_t external_score_column = 2;
  std::map<AnnotationKind, std::filesystem::path> annotation_files;
  LogLevel log_level = LogLevel::warn;

  ChunkingPolicy chunking_policy() const { return {chunking, dynamic_chunk_size}; }
};

/// Parses `run` options. `argv` may start with the subcommand name. Values
/// on the command line win over the config file (given by `config_file` or
/// `--config`), which wins over the defaults above. The result is fully
/// validated, including every referenced path. Errors are UsageError and
/// name the offending key.
RunConfig parse_config(const std::vector<std::string>& argv,
                       const std::optional<std::filesystem::path>& config_file = std::nullopt);

/// Checks invariants and paths of an already built config.
void validate_config(const RunConfig& config);

/// Option table rendered for `gcontext run --help`.
std::string config_help();

}  // namespace gcontext
