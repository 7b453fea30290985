#include "gcontext/stores.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <numeric>
#include <set>

#include "gcontext/error.hpp"
#include "gcontext/io.hpp"
#include "sqlite.hpp"

namespace gcontext {

namespace fs = std::filesystem;

std::string_view to_string(StoreKind kind) {
  switch (kind) {
    case StoreKind::mappings: return "mappings";
    case StoreKind::assemblies: return "assemblies";
    case StoreKind::sequences: return "sequences";
    case StoreKind::taxonomy: return "taxonomy";
  }
  return "?";
}

StoreKind parse_store_kind(std::string_view text) {
  for (auto k : {StoreKind::mappings, StoreKind::assemblies, StoreKind::sequences, StoreKind::taxonomy})
    if (to_string(k) == text) return k;
  throw UsageError("unknown store kind '" + std::string(text) + "'");
}

fs::path store_path(const fs::path& data_dir, StoreKind kind) {
  switch (kind) {
    case StoreKind::mappings: return data_dir / "mappings.db";
    case StoreKind::assemblies: return data_dir / "assemblies.db";
    case StoreKind::sequences: return data_dir / "sequences.db";
    case StoreKind::taxonomy: return data_dir / "rankedlineage.tbl";
  }
  return {};
}

std::string_view to_string(SourceDb db) { return db == SourceDb::refseq ? "RefSeq" : "GenBank"; }

bool mapping_store_houses(IdStandard s) {
  switch (s) {
    case IdStandard::uniprot_ac:
    case IdStandard::uniprot_id:
    case IdStandard::refseq:
    case IdStandard::embl_cds:
    case IdStandard::gene_id:
    case IdStandard::uniparc: return true;
    default: return false;
  }
}

std::vector<std::string> split_mapping_values(std::string_view field) {
  std::vector<std::string> out;
  for (auto part : split(field, ';')) {
    part = trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

const std::optional<std::string>* MappingRecord::field(IdStandard s) const {
  switch (s) {
    case IdStandard::uniprot_ac: return &uniprot_ac;
    case IdStandard::uniprot_id: return &uniprot_id;
    case IdStandard::refseq: return &refseq;
    case IdStandard::embl_cds: return &embl_cds;
    case IdStandard::gene_id: return &gene_id;
    case IdStandard::uniparc: return &uniparc;
    default: return nullptr;
  }
}

std::vector<std::string> MappingRecord::values(IdStandard s) const {
  auto* f = field(s);
  if (f == nullptr || !f->has_value()) return {};
  return split_mapping_values(**f);
}

namespace {

constexpr std::size_t batch_limit = 500;

sql::Database open_store(const fs::path& path, StoreKind expected, StoreHandle& handle) {
  auto db = sql::Database::open_read_only(path);
  auto name = db.meta("store_name");
  if (!name || *name != to_string(expected))
    throw DataError(path.string() + " is not a " + std::string(to_string(expected)) + " store");
  auto version = db.meta("format_version");
  int v = version ? std::atoi(version->c_str()) : -1;
  if (v != store_format_version)
    throw DataError(path.string() + ": store format version " + (version ? *version : "?") +
                    " does not match supported version " + std::to_string(store_format_version));
  handle.kind = expected;
  handle.path = path;
  handle.format_version = v;
  handle.read_only = true;
  return db;
}

std::string placeholders(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += i ? ",?" : "?";
  return s;
}

std::vector<std::string> unique_sorted(const std::vector<std::string>& ids) {
  std::vector<std::string> out(ids);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Runs `sql_head IN (...)` over `ids` in bounded batches.
template <class RowFn>
void for_each_batch(const sql::Database& db, const std::string& sql_head, const std::string& sql_tail,
                    const std::vector<std::string>& ids, const std::vector<std::int64_t>& leading_ints,
                    RowFn&& on_row) {
  for (std::size_t begin = 0; begin < ids.size(); begin += batch_limit) {
    auto end = std::min(ids.size(), begin + batch_limit);
    sql::Statement st(db, sql_head + "(" + placeholders(end - begin) + ")" + sql_tail);
    int slot = 1;
    for (auto v : leading_ints) st.bind(slot++, v);
    for (auto i = begin; i < end; ++i) st.bind(slot++, ids[i]);
    while (st.step()) on_row(st);
  }
}

}  // namespace

// ---------------------------------------------------------------- mappings

struct MappingsStore::Impl {
  StoreHandle handle;
  sql::Database db;
};

MappingsStore MappingsStore::open(const fs::path& path) {
  StoreHandle h;
  auto db = open_store(path, StoreKind::mappings, h);
  MappingsStore s;
  s.impl_ = std::make_shared<const Impl>(Impl{std::move(h), std::move(db)});
  return s;
}

const StoreHandle& MappingsStore::handle() const noexcept { return impl_->handle; }

std::map<std::string, std::optional<MappingRecord>> MappingsStore::records(const std::vector<std::string>& ids,
                                                                           IdStandard from) const {
  std::map<std::string, std::optional<MappingRecord>> out;
  for (const auto& id : ids) out.emplace(id, std::nullopt);
  if (!mapping_store_houses(from)) return out;
  auto keys = unique_sorted(ids);
  // Several records may share a key; the one with the smallest accession
  // (then row id) is chosen so lookups are deterministic.
  std::map<std::string, std::pair<std::string, std::int64_t>> best;
  for_each_batch(impl_->db,
                 "SELECT k.key, r.id, r.uniprot_ac, r.uniprot_id, r.gene_id, r.refseq, r.uniparc, r.embl_cds "
                 "FROM keys k JOIN records r ON r.id = k.record_id WHERE k.standard = ? AND k.key IN ",
                 "", keys, {static_cast<std::int64_t>(from)}, [&](const sql::Statement& st) {
                   auto key = st.text(0);
                   auto rank = std::make_pair(st.optional_text(2).value_or(""), st.integer(1));
                   auto it = best.find(key);
                   if (it != best.end() && it->second <= rank) return;
                   best[key] = rank;
                   MappingRecord r;
                   r.uniprot_ac = st.optional_text(2);
                   r.uniprot_id = st.optional_text(3);
                   r.gene_id = st.optional_text(4);
                   r.refseq = st.optional_text(5);
                   r.uniparc = st.optional_text(6);
                   r.embl_cds = st.optional_text(7);
                   out[key] = std::move(r);
                 });
  return out;
}

std::map<std::string, std::optional<std::string>> MappingsStore::map_ids(const std::vector<std::string>& ids,
                                                                         IdStandard from, IdStandard to) const {
  std::map<std::string, std::optional<std::string>> out;
  for (auto& [id, rec] : records(ids, from)) {
    std::optional<std::string> value;
    if (rec) {
      auto values = rec->values(to);
      if (!values.empty()) value = values.front();
    }
    out.emplace(id, std::move(value));
  }
  return out;
}

// -------------------------------------------------------------- assemblies

struct AssembliesStore::Impl {
  StoreHandle handle;
  fs::path gff_root;
  sql::Database db;
};

AssembliesStore AssembliesStore::open(const fs::path& path) {
  StoreHandle h;
  auto db = open_store(path, StoreKind::assemblies, h);
  auto root = db.meta("gff_root");
  if (!root) throw DataError(path.string() + ": missing gff_root");
  AssembliesStore s;
  s.impl_ = std::make_shared<const Impl>(Impl{std::move(h), fs::path(*root), std::move(db)});
  return s;
}

const StoreHandle& AssembliesStore::handle() const noexcept { return impl_->handle; }
const fs::path& AssembliesStore::gff_root() const noexcept { return impl_->gff_root; }

namespace {
AssemblyRecord assembly_from_row(const sql::Statement& st, int first) {
  AssemblyRecord r;
  r.assembly_accession = st.text(first);
  r.taxid = st.integer(first + 1);
  r.organism_name = st.text(first + 2);
  r.annotation_file = st.text(first + 3);
  r.source_db = st.text(first + 4) == "RefSeq" ? SourceDb::refseq : SourceDb::genbank;
  r.file_missing = st.integer(first + 5) != 0;
  return r;
}
}  // namespace

std::map<std::string, std::vector<AssemblyRecord>> AssembliesStore::lookup_assembly(
    const std::vector<std::string>& protein_codes) const {
  std::map<std::string, std::vector<AssemblyRecord>> out;
  for (const auto& c : protein_codes) out.emplace(c, std::vector<AssemblyRecord>{});
  for_each_batch(impl_->db,
                 "SELECT l.protein, a.accession, a.taxid, a.organism, a.annotation_file, a.source_db, "
                 "a.file_missing FROM links l JOIN assemblies a ON a.accession = l.accession WHERE l.protein IN ",
                 "", unique_sorted(protein_codes), {},
                 [&](const sql::Statement& st) { out[st.text(0)].push_back(assembly_from_row(st, 1)); });
  for (auto& [code, list] : out) {
    std::sort(list.begin(), list.end(), [](const AssemblyRecord& a, const AssemblyRecord& b) {
      return a.assembly_accession < b.assembly_accession;
    });
  }
  return out;
}

std::map<std::string, std::optional<AssemblyRecord>> AssembliesStore::records(
    const std::vector<std::string>& accessions) const {
  std::map<std::string, std::optional<AssemblyRecord>> out;
  for (const auto& a : accessions) out.emplace(a, std::nullopt);
  for_each_batch(impl_->db,
                 "SELECT accession, taxid, organism, annotation_file, source_db, file_missing FROM assemblies "
                 "WHERE accession IN ",
                 "", unique_sorted(accessions), {}, [&](const sql::Statement& st) {
                   auto r = assembly_from_row(st, 0);
                   auto key = r.assembly_accession;
                   out[key] = std::move(r);
                 });
  return out;
}

fs::path AssembliesStore::annotation_path(const AssemblyRecord& record) const {
  if (record.annotation_file.empty()) return {};
  return impl_->gff_root / record.annotation_file;
}

// --------------------------------------------------------------- sequences

struct SequencesStore::Impl {
  StoreHandle handle;
  sql::Database db;
};

SequencesStore SequencesStore::open(const fs::path& path) {
  StoreHandle h;
  auto db = open_store(path, StoreKind::sequences, h);
  SequencesStore s;
  s.impl_ = std::make_shared<const Impl>(Impl{std::move(h), std::move(db)});
  return s;
}

const StoreHandle& SequencesStore::handle() const noexcept { return impl_->handle; }

std::map<std::string, std::optional<std::string>> SequencesStore::fetch_sequences(
    const std::vector<std::string>& protein_codes) const {
  std::map<std::string, std::optional<std::string>> out;
  for (const auto& c : protein_codes) out.emplace(c, std::nullopt);
  for_each_batch(impl_->db, "SELECT code, sequence FROM sequences WHERE code IN ", "",
                 unique_sorted(protein_codes), {},
                 [&](const sql::Statement& st) { out[st.text(0)] = st.text(1); });
  return out;
}

// ---------------------------------------------------------------- taxonomy

namespace {
std::atomic<std::size_t> g_taxonomy_loads{0};
}

std::size_t TaxonomyTable::load_count() noexcept { return g_taxonomy_loads.load(); }

TaxonomyTable TaxonomyTable::load(const fs::path& path) {
  ++g_taxonomy_loads;
  LineReader reader(path);
  std::string line;
  if (!reader.next(line) || !starts_with(line, "#gcontext-taxonomy\t"))
    throw DataError(path.string() + " is not a taxonomy table");
  auto expected = "format_version=" + std::to_string(store_format_version);
  if (line.substr(line.find('\t') + 1) != expected)
    throw DataError(path.string() + ": unsupported taxonomy table version (" + line + ")");

  struct Row {
    std::int64_t taxid;
    std::vector<std::string> fields;
  };
  std::vector<Row> rows;
  while (reader.next(line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 10) throw DataError(path.string() + ": bad row at line " + std::to_string(reader.line_number()));
    std::int64_t taxid = 0;
    auto [p, ec] = std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), taxid);
    if (ec != std::errc{}) throw DataError(path.string() + ": bad taxid at line " + std::to_string(reader.line_number()));
    Row r{taxid, {}};
    for (std::size_t i = 1; i < cols.size(); ++i) r.fields.emplace_back(cols[i]);
    rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.taxid < b.taxid; });

  TaxonomyTable t;
  auto n = rows.size();
  for (auto* col : {&t.tax_name_, &t.species_, &t.genus_, &t.family_, &t.order_, &t.class_, &t.phylum_,
                    &t.kingdom_, &t.superkingdom_})
    col->reserve(n);
  t.taxid_.reserve(n);
  for (auto& r : rows) {
    if (!t.taxid_.empty() && t.taxid_.back() == r.taxid) continue;  // first occurrence wins
    t.taxid_.push_back(r.taxid);
    t.tax_name_.push_back(std::move(r.fields[0]));
    t.species_.push_back(std::move(r.fields[1]));
    t.genus_.push_back(std::move(r.fields[2]));
    t.family_.push_back(std::move(r.fields[3]));
    t.order_.push_back(std::move(r.fields[4]));
    t.class_.push_back(std::move(r.fields[5]));
    t.phylum_.push_back(std::move(r.fields[6]));
    t.kingdom_.push_back(std::move(r.fields[7]));
    t.superkingdom_.push_back(std::move(r.fields[8]));
  }
  return t;
}

std::optional<std::size_t> TaxonomyTable::index_of(std::int64_t taxid) const {
  auto it = std::lower_bound(taxid_.begin(), taxid_.end(), taxid);
  if (it == taxid_.end() || *it != taxid) return std::nullopt;
  return static_cast<std::size_t>(it - taxid_.begin());
}

TaxonomyRow TaxonomyTable::row(std::size_t i) const {
  return TaxonomyRow{taxid_[i],  tax_name_[i], species_[i], genus_[i],        family_[i],
                     order_[i],  class_[i],    phylum_[i],  kingdom_[i], superkingdom_[i]};
}

std::optional<TaxonomyRow> TaxonomyTable::find(std::int64_t taxid) const {
  auto i = index_of(taxid);
  if (!i) return std::nullopt;
  return row(*i);
}

}  // namespace gcontext
