#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gcontext/targets.hpp"

namespace gcontext {

enum class StoreKind { mappings, assemblies, sequences, taxonomy };

std::string_view to_string(StoreKind kind);
StoreKind parse_store_kind(std::string_view text);

/// Version written into every store; readers refuse anything else.
inline constexpr int store_format_version = 1;

/// Fixed file name of each store under the data directory.
std::filesystem::path store_path(const std::filesystem::path& data_dir, StoreKind kind);

struct StoreHandle {
  StoreKind kind = StoreKind::mappings;
  std::filesystem::path path;
  int format_version = store_format_version;
  bool read_only = true;
};

/// One row of the UniProt id mapping. Fields hold the raw column value,
/// which may list several identifiers separated by "; ".
struct MappingRecord {
  std::optional<std::string> uniprot_ac;
  std::optional<std::string> uniprot_id;
  std::optional<std::string> refseq;
  std::optional<std::string> embl_cds;
  std::optional<std::string> gene_id;
  std::optional<std::string> uniparc;

  const std::optional<std::string>* field(IdStandard standard) const;
  std::vector<std::string> values(IdStandard standard) const;
  friend bool operator==(const MappingRecord&, const MappingRecord&) = default;
};

/// Standards housed in the mappings store.
bool mapping_store_houses(IdStandard standard);

/// Splits a multi-valued mapping field ("A; B") into trimmed identifiers.
std::vector<std::string> split_mapping_values(std::string_view field);

enum class SourceDb { genbank, refseq };
std::string_view to_string(SourceDb db);

struct AssemblyRecord {
  std::string assembly_accession;
  std::int64_t taxid = 0;
  std::string organism_name;
  std::string annotation_file;  // relative to the store's GFF root
  SourceDb source_db = SourceDb::refseq;
  bool file_missing = false;

  friend bool operator==(const AssemblyRecord&, const AssemblyRecord&) = default;
};

/// Read-only view of mappings.db. Copies share one connection.
class MappingsStore {
 public:
  static MappingsStore open(const std::filesystem::path& path);

  const StoreHandle& handle() const noexcept;

  /// Batched lookup of `ids` (keyed on `from`) returning the first `to`
  /// identifier of the matching record. Misses map to nullopt; every input
  /// id appears exactly once in the result.
  std::map<std::string, std::optional<std::string>> map_ids(const std::vector<std::string>& ids,
                                                            IdStandard from, IdStandard to) const;

  std::map<std::string, std::optional<MappingRecord>> records(const std::vector<std::string>& ids,
                                                              IdStandard from) const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

/// Read-only view of assemblies.db.
class AssembliesStore {
 public:
  static AssembliesStore open(const std::filesystem::path& path);

  const StoreHandle& handle() const noexcept;
  const std::filesystem::path& gff_root() const noexcept;

  /// Assemblies containing each protein, sorted by accession.
  std::map<std::string, std::vector<AssemblyRecord>> lookup_assembly(
      const std::vector<std::string>& protein_codes) const;

  std::map<std::string, std::optional<AssemblyRecord>> records(
      const std::vector<std::string>& accessions) const;

  std::filesystem::path annotation_path(const AssemblyRecord& record) const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

/// Read-only view of sequences.db.
class SequencesStore {
 public:
  static SequencesStore open(const std::filesystem::path& path);

  const StoreHandle& handle() const noexcept;

  std::map<std::string, std::optional<std::string>> fetch_sequences(
      const std::vector<std::string>& protein_codes) const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

struct TaxonomyRow {
  std::int64_t taxid = 0;
  std::string tax_name;
  std::string species;
  std::string genus;
  std::string family;
  std::string order;
  std::string class_name;
  std::string phylum;
  std::string kingdom;
  std::string superkingdom;

  friend bool operator==(const TaxonomyRow&, const TaxonomyRow&) = default;
};

/// Column-oriented in-memory copy of rankedlineage.tbl, sorted by taxid.
class TaxonomyTable {
 public:
  /// Reads the whole table in one pass and bumps load_count().
  static TaxonomyTable load(const std::filesystem::path& path);

  /// Number of load() calls in this process.
  static std::size_t load_count() noexcept;

  std::size_t size() const noexcept { return taxid_.size(); }
  std::optional<TaxonomyRow> find(std::int64_t taxid) const;
  std::optional<std::size_t> index_of(std::int64_t taxid) const;
  TaxonomyRow row(std::size_t index) const;

 private:
  std::vector<std::int64_t> taxid_;
  std::vector<std::string> tax_name_, species_, genus_, family_, order_, class_, phylum_, kingdom_,
      superkingdom_;
};

}  // namespace gcontext
