#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcontext/annotate.hpp"
#include "gcontext/collect.hpp"
#include "gcontext/families.hpp"
#include "gcontext/model.hpp"

namespace gcontext {

/// Files of a complete bundle, excluding the DONE sentinel.
inline constexpr std::array<std::string_view, 9> bundle_files = {
    "contexts.json", "families.tsv",  "operons.tsv",  "taxonomy_tree.json", "contexts.svg",
    "unresolved.tsv", "profile.json", "gantt.csv",    "run.json"};

/// Files whose bytes depend only on the inputs and the configuration
/// (timings excluded).
inline constexpr std::array<std::string_view, 6> deterministic_files = {
    "contexts.json", "families.tsv", "operons.tsv", "taxonomy_tree.json", "contexts.svg", "unresolved.tsv"};

inline constexpr std::string_view done_file = "DONE";

struct OutputData {
  std::vector<GenomicContext> contexts;
  std::vector<Unresolved> unresolved;
  std::vector<Family> families;
  std::vector<OperonType> operons;
  nlohmann::json taxonomy_tree = nlohmann::json::object();
  AnnotationTables annotations;
};

std::string render_contexts_json(const std::vector<GenomicContext>& contexts);
std::vector<GenomicContext> contexts_from_json(std::string_view text);

std::string render_families_tsv(const std::vector<Family>& families, const AnnotationTables& annotations);
std::string render_operons_tsv(const std::vector<OperonType>& operons);
std::string render_unresolved_tsv(const std::vector<Unresolved>& unresolved);
std::string render_taxonomy_tree(const nlohmann::json& tree);

/// Fixed color table; family ids are hashed into it. Family -1 is grey.
inline constexpr std::array<std::string_view, 20> family_palette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94", "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5"};
inline constexpr std::string_view unassigned_color = "#e0e0e0";

std::string_view family_color(int family_id);

/// One row per usable context, genes as strand-directed arrows scaled to
/// their length, the target outlined, and a legend of family colors.
std::string render_context_svg(const std::vector<GenomicContext>& contexts);

/// Writes every deterministic file under `out_dir`.
void write_tables(const OutputData& data, const std::filesystem::path& out_dir);

/// The DONE sentinel lists the bundle's files; it is written last.
void write_done_sentinel(const std::filesystem::path& out_dir);
void remove_done_sentinel(const std::filesystem::path& out_dir);
bool bundle_complete(const std::filesystem::path& out_dir);

}  // namespace gcontext
