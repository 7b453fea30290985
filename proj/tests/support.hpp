#pragma once

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gcontext/ingest.hpp"
#include "gcontext/io.hpp"

namespace support {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "gcontext-test-XXXXXX").string();
    if (!mkdtemp(pattern.data())) std::abort();
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline fs::path write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  // Unlink first: truncating in place is slow on some sandbox filesystems.
  std::error_code ec;
  fs::remove(path, ec);
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

inline std::string read_file(const fs::path& path) { return gcontext::read_text_file(path); }

inline fs::path source_dir() { return GCONTEXT_SOURCE_DIR; }
inline fs::path mini_dir() { return source_dir() / "tests" / "data" / "mini"; }
inline fs::path golden_dir() { return source_dir() / "tests" / "golden" / "mini"; }
inline fs::path cli_path() { return GCONTEXT_CLI; }

/// Builds the four stores of the bundled mini dataset under `data_dir`.
inline void build_mini_stores(const fs::path& data_dir) {
  const auto raw = mini_dir() / "raw";
  fs::create_directories(data_dir);
  gcontext::build_mappings_store(raw / "idmapping_selected.tab",
                                 gcontext::store_path(data_dir, gcontext::StoreKind::mappings));
  gcontext::build_assemblies_store({raw / "assembly_summary_refseq.txt", raw / "assembly_summary_genbank.txt"},
                                   raw / "gff", gcontext::store_path(data_dir, gcontext::StoreKind::assemblies));
  std::vector<fs::path> faa;
  for (const auto& e : fs::directory_iterator(raw / "gff"))
    if (e.path().filename().string().find("_protein.faa") != std::string::npos) faa.push_back(e.path());
  std::sort(faa.begin(), faa.end());
  gcontext::build_sequences_store(faa, gcontext::store_path(data_dir, gcontext::StoreKind::sequences));
  gcontext::build_taxonomy_table(raw / "rankedlineage.dmp",
                                 gcontext::store_path(data_dir, gcontext::StoreKind::taxonomy));
}

/// Pinned configuration of the golden run (every tunable spelled out).
inline std::vector<std::string> mini_run_args(const fs::path& data_dir, const fs::path& out_dir) {
  const auto m = mini_dir();
  return {"run",
          "--targets", (m / "targets.txt").string(),
          "--out", out_dir.string(),
          "--data", data_dir.string(),
          "--flank-up", "4",
          "--flank-down", "4",
          "--family-cutoff", "0.7",
          "--operon-cutoff", "0.5",
          "--similarity-backend", "builtin",
          "--kmer", "5",
          "--pdb-structure-file", (m / "annotations" / "pdb.tsv").string(),
          "--function-file", (m / "annotations" / "function.tsv").string(),
          "--tm-segments-file", (m / "annotations" / "tm_segments.tsv").string(),
          "--signal-peptide-file", (m / "annotations" / "signal_peptide.tsv").string(),
          "--log-level", "error"};
}

}  // namespace support
