#include "gcontext/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>

#include "gcontext/error.hpp"
#include "gcontext/gff.hpp"
#include "gcontext/io.hpp"
#include "gcontext/log.hpp"
#include "sqlite.hpp"

namespace gcontext {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now_iso() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> path_strings(const std::vector<fs::path>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.string());
  return out;
}

// Builds into a temporary file and renames on success so a failed build
// never leaves a half-written store behind.
fs::path temp_store_path(const fs::path& out) {
  auto tmp = out;
  tmp += ".building";
  return tmp;
}

void finish_store(const fs::path& tmp, const fs::path& out, const IngestManifest& manifest) {
  fs::rename(tmp, out);
  write_text_file(manifest_path(out), to_json(manifest).dump(2) + "\n");
}

std::int64_t count_rows(const sql::Database& db, const std::string& table) {
  sql::Statement st(db, "SELECT COUNT(*) FROM " + table);
  st.step();
  return st.integer(0);
}

void check_count(const sql::Database& db, const std::string& table, std::size_t expected) {
  auto actual = count_rows(db, table);
  if (actual != static_cast<std::int64_t>(expected))
    throw DataError("post-build check failed for " + table + ": indexed " + std::to_string(actual) +
                    " records, counted " + std::to_string(expected));
}

sql::Database create_store(const fs::path& tmp, StoreKind kind) {
  auto db = sql::Database::create(tmp);
  db.set_meta("store_name", to_string(kind));
  db.set_meta("format_version", std::to_string(store_format_version));
  return db;
}

bool parse_i64(std::string_view s, std::int64_t& out) {
  s = trim(s);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::string ftp_basename(const std::string& ftp_path) {
  if (ftp_path.empty() || ftp_path == "na") return {};
  auto base = fs::path(ftp_path).filename().string();
  if (base.empty()) base = fs::path(ftp_path).parent_path().filename().string();
  return base;
}

fs::path find_protein_file(const fs::path& root, const std::string& accession, const std::string& ftp_path) {
  std::error_code ec;
  std::vector<std::string> stems;
  if (auto base = ftp_basename(ftp_path); !base.empty()) stems.push_back(base);
  stems.push_back(accession);
  for (const auto& stem : stems)
    for (auto suffix : {"_protein.faa.gz", "_protein.faa", ".faa.gz", ".faa"}) {
      auto name = stem + suffix;
      if (fs::is_regular_file(root / name, ec)) return name;
    }
  return {};
}

std::vector<std::string> fasta_codes(const fs::path& faa) {
  std::vector<std::string> out;
  LineReader reader(faa);
  std::string line;
  while (reader.next(line)) {
    if (line.empty() || line[0] != '>') continue;
    auto header = std::string_view(line).substr(1);
    auto token = header.substr(0, header.find_first_of(" \t"));
    if (!token.empty()) out.emplace_back(token);
  }
  return out;
}

}  // namespace

json to_json(const IngestManifest& m) {
  return json{{"store_name", to_string(m.store_name)},
              {"source_files", m.source_files},
              {"record_count", m.record_count},
              {"malformed_count", m.malformed_count},
              {"build_timestamp", m.build_timestamp},
              {"format_version", m.format_version},
              {"details", m.details}};
}

IngestManifest manifest_from_json(const json& j) {
  IngestManifest m;
  m.store_name = parse_store_kind(j.at("store_name").get<std::string>());
  m.source_files = j.at("source_files").get<std::vector<std::string>>();
  m.record_count = j.at("record_count").get<std::size_t>();
  m.malformed_count = j.at("malformed_count").get<std::size_t>();
  m.build_timestamp = j.at("build_timestamp").get<std::string>();
  m.format_version = j.at("format_version").get<int>();
  m.details = j.value("details", json::object());
  return m;
}

fs::path manifest_path(const fs::path& store_file) {
  auto p = store_file;
  p += ".manifest.json";
  return p;
}

// ---------------------------------------------------------------- mappings

IngestManifest build_mappings_store(const fs::path& idmapping_tsv, const fs::path& out,
                                    const MappingColumns& columns) {
  const std::pair<IdStandard, std::size_t> housed[] = {
      {IdStandard::uniprot_ac, columns.uniprot_ac}, {IdStandard::uniprot_id, columns.uniprot_id},
      {IdStandard::gene_id, columns.gene_id},       {IdStandard::refseq, columns.refseq},
      {IdStandard::uniparc, columns.uniparc},       {IdStandard::embl_cds, columns.embl_cds},
  };
  for (const auto& [std_, col] : housed) {
    if (col >= columns.expected_columns)
      throw UsageError("mapping column index " + std::to_string(col) + " outside expected column count");
  }

  IngestManifest manifest;
  manifest.store_name = StoreKind::mappings;
  manifest.source_files = {idmapping_tsv.string()};

  auto tmp = temp_store_path(out);
  std::size_t records = 0;
  std::size_t keys = 0;
  std::size_t empty_rows = 0;
  {
    auto db = create_store(tmp, StoreKind::mappings);
    db.exec(
        "CREATE TABLE records(id INTEGER PRIMARY KEY, uniprot_ac TEXT, uniprot_id TEXT, gene_id TEXT, "
        "refseq TEXT, uniparc TEXT, embl_cds TEXT)");
    db.exec("CREATE TABLE keys(standard INTEGER NOT NULL, key TEXT NOT NULL, record_id INTEGER NOT NULL)");
    db.exec("BEGIN");
    sql::Statement insert_record(
        db, "INSERT INTO records(id, uniprot_ac, uniprot_id, gene_id, refseq, uniparc, embl_cds) "
            "VALUES(?, ?, ?, ?, ?, ?, ?)");
    sql::Statement insert_key(db, "INSERT INTO keys(standard, key, record_id) VALUES(?, ?, ?)");

    LineReader reader(idmapping_tsv);
    std::string line;
    while (reader.next(line)) {
      if (line.empty()) continue;
      auto cols = split(line, '\t');
      if (cols.size() != columns.expected_columns) {
        ++manifest.malformed_count;
        continue;
      }
      bool any = false;
      for (const auto& [std_, col] : housed) any = any || !trim(cols[col]).empty();
      if (!any) {
        ++empty_rows;
        ++manifest.malformed_count;
        continue;
      }
      const auto id = static_cast<std::int64_t>(records + 1);
      insert_record.bind(1, id);
      int slot = 2;
      for (const auto& [std_, col] : housed) {
        auto v = trim(cols[col]);
        if (v.empty())
          insert_record.bind_null(slot);
        else
          insert_record.bind(slot, v);
        ++slot;
      }
      insert_record.step();
      insert_record.reset();
      for (const auto& [std_, col] : housed) {
        for (const auto& value : split_mapping_values(cols[col])) {
          insert_key.bind(1, static_cast<std::int64_t>(std_)).bind(2, value).bind(3, id);
          insert_key.step();
          insert_key.reset();
          ++keys;
        }
      }
      ++records;
    }
    db.exec("COMMIT");
    db.exec("CREATE INDEX keys_lookup ON keys(standard, key)");
    check_count(db, "records", records);
  }
  if (records == 0) {
    fs::remove(tmp);
    throw DataError("no valid rows in " + idmapping_tsv.string());
  }
  manifest.record_count = records;
  manifest.build_timestamp = utc_now_iso();
  manifest.details = {{"keys", keys}, {"rows_without_ids", empty_rows}};
  finish_store(tmp, out, manifest);
  return manifest;
}

// -------------------------------------------------------------- assemblies

fs::path find_annotation_file(const fs::path& gff_root, const std::string& accession,
                              const std::string& ftp_path) {
  std::error_code ec;
  std::vector<std::string> candidates;
  if (auto base = ftp_basename(ftp_path); !base.empty()) {
    candidates.push_back(base + "_genomic.gff.gz");
    candidates.push_back(base + "_genomic.gff");
  }
  candidates.push_back(accession + "_genomic.gff.gz");
  candidates.push_back(accession + "_genomic.gff");
  candidates.push_back(accession + ".gff.gz");
  candidates.push_back(accession + ".gff");
  for (const auto& name : candidates) {
    if (fs::is_regular_file(gff_root / name, ec)) return name;
  }
  return {};
}

IngestManifest build_assemblies_store(const std::vector<fs::path>& summary_tables, const fs::path& gff_root,
                                      const fs::path& out, const AssemblySummaryColumns& columns) {
  if (summary_tables.empty()) throw UsageError("assemblies: no summary tables given");
  std::error_code ec;
  if (!fs::is_directory(gff_root, ec)) throw DataError("GFF root is not a directory: " + gff_root.string());
  const auto needed =
      std::max({columns.accession, columns.taxid, columns.organism, columns.ftp_path}) + 1;

  IngestManifest manifest;
  manifest.store_name = StoreKind::assemblies;
  manifest.source_files = path_strings(summary_tables);

  auto tmp = temp_store_path(out);
  std::size_t duplicates = 0;
  std::size_t file_missing = 0;
  std::size_t gff_malformed = 0;
  std::size_t records = 0;
  std::size_t links = 0;
  {
    auto db = create_store(tmp, StoreKind::assemblies);
    db.set_meta("gff_root", fs::absolute(gff_root).lexically_normal().string());
    db.exec(
        "CREATE TABLE assemblies(accession TEXT PRIMARY KEY, taxid INTEGER NOT NULL, organism TEXT NOT NULL, "
        "annotation_file TEXT NOT NULL, source_db TEXT NOT NULL, file_missing INTEGER NOT NULL) WITHOUT ROWID");
    db.exec("CREATE TABLE links(protein TEXT NOT NULL, accession TEXT NOT NULL, PRIMARY KEY(protein, accession)) "
            "WITHOUT ROWID");
    db.exec("BEGIN");
    sql::Statement exists(db, "SELECT 1 FROM assemblies WHERE accession = ?");
    sql::Statement drop_links(db, "DELETE FROM links WHERE accession = ?");
    sql::Statement upsert(db,
                          "INSERT OR REPLACE INTO assemblies(accession, taxid, organism, annotation_file, "
                          "source_db, file_missing) VALUES(?, ?, ?, ?, ?, ?)");
    sql::Statement link(db, "INSERT OR IGNORE INTO links(protein, accession) VALUES(?, ?)");

    for (const auto& table : summary_tables) {
      LineReader reader(table);
      std::string line;
      while (reader.next(line)) {
        if (line.empty() || line[0] == '#') continue;
        auto cols = split(line, '\t');
        if (cols.size() < needed) {
          ++manifest.malformed_count;
          continue;
        }
        std::string accession(trim(cols[columns.accession]));
        std::int64_t taxid = 0;
        SourceDb source;
        if (starts_with(accession, "GCF_"))
          source = SourceDb::refseq;
        else if (starts_with(accession, "GCA_"))
          source = SourceDb::genbank;
        else {
          ++manifest.malformed_count;
          continue;
        }
        if (!parse_i64(cols[columns.taxid], taxid) || taxid <= 0) {
          ++manifest.malformed_count;
          continue;
        }
        exists.bind(1, accession);
        bool duplicate = exists.step();
        exists.reset();
        if (duplicate) {
          ++duplicates;
          log_warn("duplicate assembly accession ", accession, " in ", table.string(), "; last row wins");
          drop_links.bind(1, accession);
          drop_links.step();
          drop_links.reset();
        }
        auto annotation = find_annotation_file(gff_root, accession, std::string(trim(cols[columns.ftp_path])));
        const bool missing = annotation.empty();
        if (missing) {
          ++file_missing;
          log_warn("no annotation file for ", accession, " under ", gff_root.string());
        }
        upsert.bind(1, accession)
            .bind(2, taxid)
            .bind(3, trim(cols[columns.organism]))
            .bind(4, annotation.string())
            .bind(5, to_string(source))
            .bind(6, std::int64_t{missing ? 1 : 0});
        upsert.step();
        upsert.reset();
        if (!missing) {
          GffParseStats stats;
          for (const auto& gene : parse_gff_cds(gff_root / annotation, &stats)) {
            link.bind(1, gene.protein_code).bind(2, accession);
            link.step();
            link.reset();
          }
          gff_malformed += stats.malformed;
        } else if (auto faa = find_protein_file(gff_root, accession, std::string(trim(cols[columns.ftp_path])));
                   !faa.empty()) {
          // Without a GFF the proteins still resolve to this assembly so the
          // missing file surfaces downstream.
          for (const auto& code : fasta_codes(gff_root / faa)) {
            link.bind(1, code).bind(2, accession);
            link.step();
            link.reset();
          }
        }
      }
    }
    db.exec("COMMIT");
    records = static_cast<std::size_t>(count_rows(db, "assemblies"));
    links = static_cast<std::size_t>(count_rows(db, "links"));
  }
  if (records == 0) {
    fs::remove(tmp);
    throw DataError("no valid assembly rows in the summary tables");
  }
  manifest.record_count = records;
  manifest.build_timestamp = utc_now_iso();
  manifest.details = {{"protein_links", links},
                      {"duplicate_accessions", duplicates},
                      {"file_missing", file_missing},
                      {"gff_malformed_lines", gff_malformed}};
  finish_store(tmp, out, manifest);
  return manifest;
}

// --------------------------------------------------------------- sequences

IngestManifest build_sequences_store(const std::vector<fs::path>& faa_files, const fs::path& out) {
  if (faa_files.empty()) throw UsageError("sequences: no FASTA files given");
  IngestManifest manifest;
  manifest.store_name = StoreKind::sequences;
  manifest.source_files = path_strings(faa_files);

  auto tmp = temp_store_path(out);
  std::size_t records = 0;
  std::size_t conflicts = 0;
  std::size_t empty = 0;
  std::size_t duplicates = 0;
  {
    auto db = create_store(tmp, StoreKind::sequences);
    db.exec("CREATE TABLE sequences(code TEXT PRIMARY KEY, sequence TEXT NOT NULL) WITHOUT ROWID");
    db.exec("BEGIN");
    sql::Statement find(db, "SELECT sequence FROM sequences WHERE code = ?");
    sql::Statement insert(db, "INSERT INTO sequences(code, sequence) VALUES(?, ?)");

    std::string code;
    std::string sequence;
    bool in_record = false;
    auto flush = [&] {
      if (!in_record) return;
      in_record = false;
      if (sequence.empty()) {
        ++empty;
        return;
      }
      find.bind(1, code);
      if (find.step()) {
        if (find.text(0) == sequence)
          ++duplicates;
        else
          ++conflicts;
        find.reset();
        return;
      }
      find.reset();
      insert.bind(1, code).bind(2, sequence);
      insert.step();
      insert.reset();
      ++records;
    };

    for (const auto& file : faa_files) {
      LineReader reader(file);
      std::string line;
      while (reader.next(line)) {
        if (!line.empty() && line[0] == '>') {
          flush();
          auto header = std::string_view(line).substr(1);
          auto token = header.substr(0, header.find_first_of(" \t"));
          if (token.empty()) {
            ++manifest.malformed_count;
            continue;
          }
          code.assign(token);
          sequence.clear();
          in_record = true;
          continue;
        }
        if (!in_record) continue;
        for (char c : line) {
          if (c == '*' || std::isspace(static_cast<unsigned char>(c))) continue;
          sequence.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        }
      }
      flush();
    }
    db.exec("COMMIT");
    check_count(db, "sequences", records);
  }
  if (records == 0) {
    fs::remove(tmp);
    throw DataError("no sequences parsed from the FASTA inputs");
  }
  manifest.record_count = records;
  manifest.build_timestamp = utc_now_iso();
  manifest.details = {{"conflicts", conflicts}, {"empty_sequences", empty}, {"identical_duplicates", duplicates}};
  finish_store(tmp, out, manifest);
  return manifest;
}

// ---------------------------------------------------------------- taxonomy

IngestManifest build_taxonomy_table(const fs::path& rankedlineage_dmp, const fs::path& out) {
  IngestManifest manifest;
  manifest.store_name = StoreKind::taxonomy;
  manifest.source_files = {rankedlineage_dmp.string()};

  auto tmp = temp_store_path(out);
  std::size_t records = 0;
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write " + tmp.string());
    os << "#gcontext-taxonomy\tformat_version=" << store_format_version << '\n';
    os << "#tax_id\ttax_name\tspecies\tgenus\tfamily\torder\tclass\tphylum\tkingdom\tsuperkingdom\n";
    LineReader reader(rankedlineage_dmp);
    std::string line;
    while (reader.next(line)) {
      std::string_view body = line;
      if (body.empty()) continue;
      if (body.size() < 2 || body.substr(body.size() - 2) != "\t|") {
        ++manifest.malformed_count;
        continue;
      }
      body.remove_suffix(2);
      auto fields = split(body, "\t|\t");
      std::int64_t taxid = 0;
      if (fields.size() != 10 || !parse_i64(fields[0], taxid) || taxid <= 0) {
        ++manifest.malformed_count;
        continue;
      }
      bool bad = false;
      for (auto f : fields) bad = bad || f.find('\t') != std::string_view::npos;
      if (bad) {
        ++manifest.malformed_count;
        continue;
      }
      os << taxid;
      for (std::size_t i = 1; i < fields.size(); ++i) os << '\t' << fields[i];
      os << '\n';
      ++records;
    }
    os.flush();
    if (!os) throw DataError("short write to " + tmp.string());
  }
  if (records == 0) {
    fs::remove(tmp);
    throw DataError("no valid lines in " + rankedlineage_dmp.string());
  }
  manifest.record_count = records;
  manifest.build_timestamp = utc_now_iso();
  finish_store(tmp, out, manifest);
  return manifest;
}

}  // namespace gcontext
