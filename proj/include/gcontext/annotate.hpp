#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcontext/families.hpp"
#include "gcontext/model.hpp"
#include "gcontext/stores.hpp"

namespace gcontext {

/// Sorted distinct family ids of a context, excluding -1.
std::vector<int> context_fingerprint(const GenomicContext& context);
std::vector<int> fingerprint_of(const std::map<std::string, int>& family_ids);

/// 1 - |a ∩ b| / |a ∪ b| over sorted sets; 1 when both are empty.
double jaccard_distance(const std::vector<int>& a, const std::vector<int>& b);

struct OperonType {
  int operon_id = 0;
  std::vector<std::string> member_targets;  // raw ids, sorted
  std::vector<int> fingerprint;              // consensus

  friend bool operator==(const OperonType&, const OperonType&) = default;
};

/// Single-linkage over Jaccard distances of (raw_id, fingerprint) pairs.
/// Ids are numbered by each type's smallest member. The consensus
/// fingerprint keeps the families present in at least half the members.
std::vector<OperonType> cluster_operons(const std::vector<std::pair<std::string, std::vector<int>>>& fingerprints,
                                        double cutoff);

/// Fingerprints usable contexts, clusters them and stores operon_type.
std::vector<OperonType> cluster_operons(std::vector<GenomicContext>& contexts, double cutoff);

struct LineageStats {
  std::size_t attached = 0;
  std::size_t unknown_taxid = 0;
};

Lineage lineage_from_row(const TaxonomyRow& row);

/// Joins usable contexts to the taxonomy in one batch: assembly -> taxid
/// through the assemblies store, taxid -> ranks through the loaded table.
LineageStats attach_lineages(std::vector<GenomicContext>& contexts, const TaxonomyTable& taxonomy,
                             const AssembliesStore& assemblies);

/// Nested superkingdom -> phylum -> class -> order -> genus -> species ->
/// sorted raw ids. Only contexts with a found lineage appear. Empty ranks
/// group under "unknown".
nlohmann::json build_taxonomy_tree(const std::vector<GenomicContext>& contexts);

enum class AnnotationKind { pdb_structure, tm_segments, signal_peptide, function };
std::string_view to_string(AnnotationKind kind);
AnnotationKind parse_annotation_kind(std::string_view text);
bool is_family_level(AnnotationKind kind);

struct UserAnnotation {
  AnnotationKind kind = AnnotationKind::function;
  std::string code;
  std::string payload;
  std::string source_file;
  friend bool operator==(const UserAnnotation&, const UserAnnotation&) = default;
};

struct AnnotationTables {
  /// family_id -> kind -> sorted distinct payloads (family-level kinds).
  std::map<int, std::map<AnnotationKind, std::set<std::string>>> families;
  /// protein_code -> kind -> sorted distinct payloads (member-level kinds).
  std::map<std::string, std::map<AnnotationKind, std::set<std::string>>> members;
  std::size_t rows = 0;
  std::size_t unmatched = 0;
  std::size_t malformed = 0;
};

/// Reads `code<TAB>payload` rows; malformed rows are counted and skipped.
std::vector<UserAnnotation> read_annotation_file(AnnotationKind kind, const std::filesystem::path& path,
                                                 std::size_t* malformed = nullptr);

/// Joins annotation files against the families and the usable contexts.
/// Member-level payloads are also copied into each context's annotations.
AnnotationTables apply_user_annotations(std::vector<GenomicContext>& contexts, const std::vector<Family>& families,
                                        const std::map<AnnotationKind, std::filesystem::path>& files);

}  // namespace gcontext
