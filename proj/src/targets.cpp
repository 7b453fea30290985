#include "gcontext/targets.hpp"

#include <cctype>
#include <unordered_set>

#include "gcontext/error.hpp"
#include "gcontext/io.hpp"

namespace gcontext {

std::string_view to_string(IdStandard standard) {
  switch (standard) {
    case IdStandard::uniprot_ac: return "UniProtKB-AC";
    case IdStandard::uniprot_id: return "UniProtKB-ID";
    case IdStandard::refseq: return "RefSeq";
    case IdStandard::genbank: return "GenBank";
    case IdStandard::gene_id: return "GeneID";
    case IdStandard::uniparc: return "UniParc";
    case IdStandard::embl_cds: return "EMBL-CDS";
    case IdStandard::unknown: return "Unknown";
  }
  return "Unknown";
}

IdStandard parse_id_standard(std::string_view text) {
  for (auto s : {IdStandard::uniprot_ac, IdStandard::uniprot_id, IdStandard::refseq,
                 IdStandard::genbank, IdStandard::gene_id, IdStandard::uniparc,
                 IdStandard::embl_cds, IdStandard::unknown}) {
    if (to_string(s) == text) return s;
  }
  throw DataError("unknown id standard '" + std::string(text) + "'");
}

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_upper_alnum(char c) { return is_upper(c) || is_digit(c); }
bool is_upper_hex(char c) { return is_digit(c) || (c >= 'A' && c <= 'F'); }

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!is_digit(c)) return false;
  return true;
}

// Strips a trailing ".<digits>" version suffix. Returns false when a dot is
// present but not followed by digits only.
bool strip_version(std::string_view& s) {
  auto dot = s.find('.');
  if (dot == std::string_view::npos) return true;
  if (!all_digits(s.substr(dot + 1))) return false;
  s = s.substr(0, dot);
  return true;
}

// AP_, NP_, WP_, XP_, YP_ followed by digits, optional version.
bool is_refseq(std::string_view s) {
  if (s.size() < 4 || s[2] != '_' || s[1] != 'P') return false;
  if (s[0] != 'A' && s[0] != 'N' && s[0] != 'W' && s[0] != 'X' && s[0] != 'Y') return false;
  auto rest = s.substr(3);
  if (!strip_version(rest)) return false;
  return all_digits(rest);
}

bool is_uniparc(std::string_view s) {
  if (s.size() != 13 || !starts_with(s, "UPI")) return false;
  for (char c : s.substr(3))
    if (!is_upper_hex(c)) return false;
  return true;
}

// [OPQ][0-9][A-Z0-9]{3}[0-9] | [A-NR-Z][0-9]([A-Z][A-Z0-9]{2}[0-9]){1,2}
bool is_uniprot_ac(std::string_view s) {
  if (s.size() != 6 && s.size() != 10) return false;
  char c0 = s[0];
  if (!is_upper(c0) || !is_digit(s[1])) return false;
  if (c0 == 'O' || c0 == 'P' || c0 == 'Q') {
    return s.size() == 6 && is_upper_alnum(s[2]) && is_upper_alnum(s[3]) &&
           is_upper_alnum(s[4]) && is_digit(s[5]);
  }
  for (std::size_t block = 2; block < s.size(); block += 4) {
    if (!is_upper(s[block]) || !is_upper_alnum(s[block + 1]) || !is_upper_alnum(s[block + 2]) ||
        !is_digit(s[block + 3]))
      return false;
  }
  return true;
}

// Entry-name mnemonic: [A-Z0-9]{1,10}_[A-Z0-9]{1,5}
bool is_uniprot_id(std::string_view s) {
  auto us = s.find('_');
  if (us == std::string_view::npos || us == 0 || us > 10) return false;
  auto tail = s.substr(us + 1);
  if (tail.empty() || tail.size() > 5) return false;
  for (char c : s.substr(0, us))
    if (!is_upper_alnum(c)) return false;
  for (char c : tail)
    if (!is_upper_alnum(c)) return false;
  return true;
}

// Three letters, five digits, optional version.
bool is_embl_cds(std::string_view s) {
  if (!strip_version(s)) return false;
  if (s.size() != 8) return false;
  return is_upper(s[0]) && is_upper(s[1]) && is_upper(s[2]) && all_digits(s.substr(3));
}

// Letters followed by digits, optional version.
bool is_genbank(std::string_view s) {
  if (!strip_version(s)) return false;
  std::size_t i = 0;
  while (i < s.size() && is_upper(s[i])) ++i;
  return i > 0 && all_digits(s.substr(i));
}

}  // namespace

IdStandard detect_id_standard(std::string_view raw_id) {
  if (is_refseq(raw_id)) return IdStandard::refseq;
  if (is_uniparc(raw_id)) return IdStandard::uniparc;
  if (is_uniprot_ac(raw_id)) return IdStandard::uniprot_ac;
  if (is_uniprot_id(raw_id)) return IdStandard::uniprot_id;
  if (all_digits(raw_id)) return IdStandard::gene_id;
  if (is_embl_cds(raw_id)) return IdStandard::embl_cds;
  if (is_genbank(raw_id)) return IdStandard::genbank;
  return IdStandard::unknown;
}

std::vector<Target> parse_targets(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw UsageError("no target files given");
  std::vector<Target> out;
  std::unordered_set<std::string> seen;
  const bool label = paths.size() > 1;
  for (const auto& path : paths) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
      throw DataError("cannot read targets file " + path.string());
    LineReader reader(path);
    std::string line;
    std::size_t found = 0;
    bool fasta = false;
    bool decided = false;
    while (reader.next(line)) {
      auto text = trim(line);
      if (text.empty() || text.front() == '#') continue;
      if (!decided) {
        fasta = text.front() == '>';
        decided = true;
      }
      std::string_view id;
      if (fasta) {
        if (text.front() != '>') continue;
        text.remove_prefix(1);
      }
      id = text.substr(0, text.find_first_of(" \t"));
      if (id.empty()) continue;
      ++found;
      std::string raw(id);
      if (!seen.insert(raw).second) continue;
      Target t;
      t.id_standard = detect_id_standard(raw);
      t.raw_id = std::move(raw);
      if (label) t.source_label = path.stem().string();
      out.push_back(std::move(t));
    }
    if (found == 0) throw DataError("no targets parsed from " + path.string());
  }
  return out;
}

}  // namespace gcontext
