#pragma once

// Synthetic raw dumps with a known number of injected malformed rows.

#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"

namespace fixtures {

namespace fs = std::filesystem;

struct Dump {
  fs::path path;
  std::size_t good = 0;
  std::size_t bad = 0;
};

inline std::string join_tab(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) s += '\t';
    s += cols[i];
  }
  return s;
}

inline std::string mapping_row(std::size_t i) {
  std::vector<std::string> cols(22);
  cols[0] = "A" + std::to_string(10000 + i);
  cols[1] = "P" + std::to_string(i) + "_SYNTH";
  cols[2] = std::to_string(500000 + i);
  cols[3] = "WP_" + std::to_string(900000000 + i) + ".1";
  if (i % 3 == 0) cols[3] += "; WP_" + std::to_string(800000000 + i) + ".1";
  cols[10] = "UPI" + std::string(10 - std::to_string(i).size(), '0') + std::to_string(i);
  cols[17] = "ABC" + std::to_string(10000 + i % 90000) + ".1";
  return join_tab(cols);
}

/// Malformed mapping rows cycle through wrong arity and rows with no ids.
inline std::string bad_mapping_row(std::size_t i) {
  switch (i % 3) {
    case 0: return "only\tthree\tcolumns";
    case 1: return std::string(21, '\t');
    default: return join_tab(std::vector<std::string>(25, "X"));
  }
}

/// `n` rows of which every 20th (5%) is malformed.
inline Dump mapping_dump(const fs::path& path, std::size_t n) {
  Dump d{path};
  std::string text;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 20 == 7) {
      text += bad_mapping_row(i) + "\n";
      ++d.bad;
    } else {
      text += mapping_row(i) + "\n";
      ++d.good;
    }
  }
  support::write_file(path, text);
  return d;
}

inline std::string taxonomy_line(std::int64_t taxid) {
  const std::string id = std::to_string(taxid);
  return id + "\t|\tOrganism " + id + "\t|\tSpecies " + id + "\t|\tGenus" + std::to_string(taxid % 50) +
         "\t|\tFamily" + std::to_string(taxid % 20) + "\t|\tOrder" + std::to_string(taxid % 10) + "\t|\tClass" +
         std::to_string(taxid % 5) + "\t|\tPhylum" + std::to_string(taxid % 3) + "\t|\t\t|\tBacteria\t|\n";
}

inline std::string bad_taxonomy_line(std::size_t i) {
  switch (i % 4) {
    case 0: return "1\t|\ttoo\t|\tfew\t|\n";
    case 1: return "notanumber\t|\ta\t|\tb\t|\tc\t|\td\t|\te\t|\tf\t|\tg\t|\th\t|\ti\t|\n";
    case 2: return "77\t|\ta\t|\tb\t|\tc\t|\td\t|\te\t|\tf\t|\tg\t|\th\t|\ti\n";
    default: return "-5\t|\ta\t|\tb\t|\tc\t|\td\t|\te\t|\tf\t|\tg\t|\th\t|\ti\t|\n";
  }
}

inline Dump taxonomy_dump(const fs::path& path, std::size_t n) {
  Dump d{path};
  std::string text;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 20 == 3) {
      text += bad_taxonomy_line(i);
      ++d.bad;
    } else {
      text += taxonomy_line(static_cast<std::int64_t>(1000 + i));
      ++d.good;
    }
  }
  support::write_file(path, text);
  return d;
}

inline std::string assembly_row(const std::string& accession, std::int64_t taxid, const std::string& ftp_base) {
  std::vector<std::string> cols(22, "na");
  cols[0] = accession;
  cols[5] = std::to_string(taxid);
  cols[7] = "Organism of " + accession;
  cols[19] = "https://ftp.example.org/genomes/" + ftp_base;
  return join_tab(cols);
}

inline std::string gff_cds(const std::string& contig, long start, long end, char strand, const std::string& code) {
  return contig + "\tsynthetic\tCDS\t" + std::to_string(start) + "\t" + std::to_string(end) + "\t.\t" + strand +
         "\t0\tID=cds-" + code + ";Name=" + code + ";protein_id=" + code + ";product=protein " + code + "\n";
}

struct AssemblyFixture {
  fs::path summary;
  fs::path gff_root;
  std::size_t good = 0;
  std::size_t bad = 0;
  std::size_t proteins = 0;
};

/// `n` summary rows, every 20th malformed, each good row with a small GFF.
inline AssemblyFixture assembly_dump(const fs::path& dir, std::size_t n) {
  AssemblyFixture f{dir / "assembly_summary.txt", dir / "gff"};
  fs::create_directories(f.gff_root);
  std::string text = "# header\n#assembly_accession\tcols\n";
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 20 == 11) {
      text += (i % 40 == 11) ? "XYZ_1.1\tfoo\n" : assembly_row("GCF_" + std::to_string(i) + ".1", 0, "x") + "\n";
      ++f.bad;
      continue;
    }
    const std::string acc = "GCF_" + std::to_string(100000000 + i) + ".1";
    const std::string base = acc + "_ASM" + std::to_string(i) + "v1";
    text += assembly_row(acc, static_cast<std::int64_t>(1000 + i), base) + "\n";
    std::string gff = "##gff-version 3\n";
    for (int g = 0; g < 3; ++g) {
      gff += gff_cds("contig1", 100 + g * 1000, 900 + g * 1000, g % 2 ? '-' : '+',
                     "WP_" + std::to_string(700000000 + i * 3 + g) + ".1");
      ++f.proteins;
    }
    support::write_file(f.gff_root / (base + "_genomic.gff"), gff);
    ++f.good;
  }
  support::write_file(f.summary, text);
  return f;
}

inline Dump fasta_dump(const fs::path& path, std::size_t n) {
  Dump d{path};
  std::string text;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 20 == 5) {
      text += ">\nMKV\n";
      ++d.bad;
      continue;
    }
    text += ">WP_" + std::to_string(600000000 + i) + ".1 protein\nMK" + std::string(i % 40 + 5, 'A') + "\nLV*\n";
    ++d.good;
  }
  support::write_file(path, text);
  return d;
}

}  // namespace fixtures
