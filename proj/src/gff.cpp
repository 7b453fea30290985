#include "gcontext/gff.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <tuple>

#include "gcontext/error.hpp"
#include "gcontext/io.hpp"

namespace gcontext {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      int hi = hex_value(s[i + 1]);
      int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

std::string gff_attribute(std::string_view attributes, std::string_view key) {
  for (auto part : split(attributes, ';')) {
    part = trim(part);
    auto eq = part.find('=');
    if (eq == std::string_view::npos) continue;
    if (part.substr(0, eq) == key) return percent_decode(part.substr(eq + 1));
  }
  return {};
}

std::string cds_protein_id(std::string_view attributes) {
  if (auto v = gff_attribute(attributes, "protein_id"); !v.empty()) return v;
  if (auto v = gff_attribute(attributes, "Name"); !v.empty()) return v;
  auto id = gff_attribute(attributes, "ID");
  if (starts_with(id, "cds-")) id.erase(0, 4);
  return id;
}

std::vector<Gene> parse_gff_cds(const std::filesystem::path& gff_path, GffParseStats* stats) {
  GffParseStats local;
  GffParseStats& st = stats ? *stats : local;
  LineReader reader(gff_path);
  std::map<std::pair<std::string, std::string>, Gene> merged;  // (contig, protein)
  std::string line;
  while (reader.next(line)) {
    ++st.lines;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (starts_with(line, "##FASTA")) break;
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 9) {
      ++st.malformed;
      continue;
    }
    if (cols[2] != "CDS") continue;
    Gene g;
    if (!parse_int(cols[3], g.start) || !parse_int(cols[4], g.end) || g.start < 1 || g.end < g.start ||
        (cols[6] != "+" && cols[6] != "-")) {
      ++st.malformed;
      continue;
    }
    g.protein_code = cds_protein_id(cols[8]);
    if (g.protein_code.empty()) {
      ++st.cds_without_id;
      continue;
    }
    g.contig = std::string(cols[0]);
    g.strand = cols[6] == "+" ? Strand::plus : Strand::minus;
    g.product = gff_attribute(cols[8], "product");
    auto key = std::make_pair(g.contig, g.protein_code);
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(std::move(key), std::move(g));
    } else {
      // Merge must not depend on line order: the leftmost segment decides
      // the strand, the smallest non-empty product wins.
      Gene& m = it->second;
      if (g.start < m.start || (g.start == m.start && g.strand < m.strand)) {
        m.start = g.start;
        m.strand = g.strand;
      }
      m.end = std::max(m.end, g.end);
      if (!g.product.empty() && (m.product.empty() || g.product < m.product)) m.product = std::move(g.product);
    }
  }
  std::vector<Gene> out;
  out.reserve(merged.size());
  for (auto& [key, gene] : merged) out.push_back(std::move(gene));
  std::sort(out.begin(), out.end(), [](const Gene& a, const Gene& b) {
    return std::tie(a.contig, a.start, a.end, a.protein_code) <
           std::tie(b.contig, b.start, b.end, b.protein_code);
  });
  return out;
}

}  // namespace gcontext
