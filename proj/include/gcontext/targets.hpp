#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gcontext {

/// Protein identifier schemes recognised in target lists.
enum class IdStandard {
  uniprot_ac,
  uniprot_id,
  refseq,
  genbank,
  gene_id,
  uniparc,
  embl_cds,
  unknown,
};

std::string_view to_string(IdStandard standard);
IdStandard parse_id_standard(std::string_view text);

struct Target {
  std::string raw_id;
  IdStandard id_standard = IdStandard::unknown;
  std::optional<std::string> canonical_code;
  std::optional<std::string> source_label;

  friend bool operator==(const Target&, const Target&) = default;
};

/// Classifies an identifier. Patterns are tried in a fixed priority order:
/// RefSeq, UniParc, UniProtKB-AC, UniProtKB-ID, GeneID, EMBL-CDS, GenBank.
IdStandard detect_id_standard(std::string_view raw_id);

/// Reads one or more target files (one identifier per line, or FASTA whose
/// headers name the identifiers). Output keeps the first occurrence of each
/// identifier in file order. With several files each target is labelled
/// with the stem of the file it came from.
std::vector<Target> parse_targets(const std::vector<std::filesystem::path>& paths);

}  // namespace gcontext
