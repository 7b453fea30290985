#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gcontext/targets.hpp"

namespace gcontext {

enum class Strand { plus, minus };

inline char strand_char(Strand s) { return s == Strand::plus ? '+' : '-'; }

/// One CDS feature. `relative_position` is 0 for the target, negative
/// upstream and positive downstream (biological orientation).
struct Gene {
  std::string protein_code;
  std::string contig;
  std::int64_t start = 0;
  std::int64_t end = 0;
  Strand strand = Strand::plus;
  std::string product;
  int relative_position = 0;

  std::int64_t length() const noexcept { return end - start + 1; }
  friend bool operator==(const Gene&, const Gene&) = default;
};

struct Lineage {
  std::int64_t taxid = 0;
  bool found = false;  // false when the taxid is absent from the taxonomy table
  std::string superkingdom;
  std::string phylum;
  std::string class_name;
  std::string order;
  std::string genus;
  std::string species;

  friend bool operator==(const Lineage&, const Lineage&) = default;
};

enum class ContextStatus { ok, no_assembly, file_missing, not_annotated };

std::string_view to_string(ContextStatus status);
ContextStatus parse_context_status(std::string_view text);

struct GenomicContext {
  Target target;
  ContextStatus status = ContextStatus::ok;
  std::string assembly_accession;
  std::vector<Gene> genes;  // ordered by relative_position
  std::map<std::string, std::string> sequences;
  bool complete = false;
  std::map<std::string, int> family_ids;
  std::optional<int> operon_type;
  std::optional<Lineage> lineage;
  /// Member-level user annotations: protein_code -> kind -> payload.
  std::map<std::string, std::map<std::string, std::string>> annotations;

  bool usable() const noexcept { return status == ContextStatus::ok; }
  friend bool operator==(const GenomicContext&, const GenomicContext&) = default;
};

}  // namespace gcontext
