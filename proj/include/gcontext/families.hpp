#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gcontext/model.hpp"

namespace gcontext {

struct SimilarityHit {
  std::string query;
  std::string subject;
  double score = 0.0;
  double self_score_query = 0.0;
  double self_score_subject = 0.0;

  friend bool operator==(const SimilarityHit&, const SimilarityHit&) = default;
};

/// Largest matrix the dense representation accepts.
inline constexpr std::size_t max_matrix_labels = 20000;

/// Symmetric distance matrix stored as its strict upper triangle.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  /// `labels` must be unique; they are sorted. Every distance starts at 1.
  explicit DistanceMatrix(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t index_of(const std::string& label) const;

  double at(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, double value);

 private:
  std::size_t offset(std::size_t i, std::size_t j) const;

  std::vector<std::string> labels_;
  std::vector<double> upper_;
};

/// Pairwise scores from shared distinct k-mers. Self scores are the number
/// of distinct k-mers of each sequence; pairs sharing none are omitted.
std::vector<SimilarityHit> builtin_all_vs_all(const std::map<std::string, std::string>& sequences,
                                              std::size_t k = 5);

struct ExternalToolOptions {
  std::filesystem::path tool_path;
  int threads = 1;
  std::size_t query_column = 0;
  std::size_t subject_column = 1;
  std::size_t score_column = 2;
};

struct ExternalToolStats {
  std::size_t rows = 0;
  std::size_t malformed = 0;
  std::size_t estimated_self_scores = 0;
};

/// Runs `tool --query FASTA --out TSV --threads N` and parses its
/// (query, subject, bitscore) table. Self hits give self scores.
std::vector<SimilarityHit> external_all_vs_all(const std::map<std::string, std::string>& sequences,
                                               const ExternalToolOptions& options,
                                               ExternalToolStats* stats = nullptr);

/// Parses a hit table as produced by an external aligner.
std::vector<SimilarityHit> parse_hit_table(const std::filesystem::path& tsv, const ExternalToolOptions& options,
                                           ExternalToolStats* stats = nullptr);

/// D = 1 - min(1, score / min(self_i, self_j)); 1 without a hit. When both
/// directions are present the smaller distance wins.
DistanceMatrix hits_to_distance(const std::vector<SimilarityHit>& hits, const std::vector<std::string>& labels);

struct Merge {
  std::size_t a = 0;  // smallest label index in each merged cluster
  std::size_t b = 0;
  double distance = 0.0;
};

/// Single-linkage merge sequence (minimum spanning tree order).
std::vector<Merge> single_linkage_dendrogram(const DistanceMatrix& d);

struct Family {
  int family_id = 0;
  std::vector<std::string> members;  // sorted
  std::string representative;

  friend bool operator==(const Family&, const Family&) = default;
};

/// Flat clusters: merges with distance strictly below `cutoff`. Families are
/// numbered by their smallest member. Representatives are left empty.
std::vector<Family> single_linkage(const DistanceMatrix& d, double cutoff);

/// Longest sequence, ties to the lexicographically smallest code.
void choose_representatives(std::vector<Family>& families, const std::map<std::string, std::string>& sequences);

/// protein_code -> family_id lookup.
std::map<std::string, int> family_index(const std::vector<Family>& families);

/// Fills family_ids of usable contexts; codes in no family get -1.
void assign_families(std::vector<GenomicContext>& contexts, const std::map<std::string, int>& index);

}  // namespace gcontext
