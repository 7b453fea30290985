#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcontext/stores.hpp"

namespace gcontext {

/// Summary written next to each store as `<store>.manifest.json`.
struct IngestManifest {
  StoreKind store_name = StoreKind::mappings;
  std::vector<std::string> source_files;
  std::size_t record_count = 0;
  std::size_t malformed_count = 0;
  std::string build_timestamp;  // UTC, ISO-8601
  int format_version = store_format_version;
  nlohmann::json details = nlohmann::json::object();
};

nlohmann::json to_json(const IngestManifest& manifest);
IngestManifest manifest_from_json(const nlohmann::json& j);
std::filesystem::path manifest_path(const std::filesystem::path& store_file);

/// Zero-based column positions in UniProt `idmapping_selected.tab`.
struct MappingColumns {
  std::size_t uniprot_ac = 0;
  std::size_t uniprot_id = 1;
  std::size_t gene_id = 2;
  std::size_t refseq = 3;
  std::size_t uniparc = 10;
  std::size_t embl_cds = 17;
  std::size_t expected_columns = 22;
};

/// Zero-based column positions in NCBI `assembly_summary_*.txt`.
struct AssemblySummaryColumns {
  std::size_t accession = 0;
  std::size_t taxid = 5;
  std::size_t organism = 7;
  std::size_t ftp_path = 19;
};

IngestManifest build_mappings_store(const std::filesystem::path& idmapping_tsv,
                                    const std::filesystem::path& out,
                                    const MappingColumns& columns = {});

IngestManifest build_assemblies_store(const std::vector<std::filesystem::path>& summary_tables,
                                      const std::filesystem::path& gff_root,
                                      const std::filesystem::path& out,
                                      const AssemblySummaryColumns& columns = {});

IngestManifest build_sequences_store(const std::vector<std::filesystem::path>& faa_files,
                                     const std::filesystem::path& out);

IngestManifest build_taxonomy_table(const std::filesystem::path& rankedlineage_dmp,
                                    const std::filesystem::path& out);

/// Locates the annotation file for an assembly under `gff_root`, trying
/// `<ftp basename>_genomic.gff[.gz]` then `<accession>*.gff[.gz]`.
/// Returns an empty path when nothing matches.
std::filesystem::path find_annotation_file(const std::filesystem::path& gff_root,
                                           const std::string& accession,
                                           const std::string& ftp_path);

}  // namespace gcontext
