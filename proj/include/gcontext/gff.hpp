#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gcontext/model.hpp"

namespace gcontext {

struct GffParseStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::size_t cds_without_id = 0;
};

/// Protein identifier of a CDS feature from its attribute column:
/// `protein_id`, else `Name`, else `ID` with a leading "cds-" removed.
std::string cds_protein_id(std::string_view attributes);

/// Value of one attribute, percent-decoded; empty when absent.
std::string gff_attribute(std::string_view attributes, std::string_view key);

/// CDS features of a (possibly gzip-compressed) GFF3 file, one Gene per
/// protein and contig. Split CDS lines are merged to [min start, max end].
/// Output is sorted by (contig, start, end, protein_code).
std::vector<Gene> parse_gff_cds(const std::filesystem::path& gff_path, GffParseStats* stats = nullptr);

}  // namespace gcontext
