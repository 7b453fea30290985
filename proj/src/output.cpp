#include "gcontext/output.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>

#include "gcontext/error.hpp"
#include "gcontext/io.hpp"
#include "gcontext/serialize.hpp"

namespace gcontext {

namespace fs = std::filesystem;
using nlohmann::json;

std::string render_contexts_json(const std::vector<GenomicContext>& contexts) {
  json doc = {{"format_version", 1}, {"contexts", contexts}};
  return doc.dump(1) + "\n";
}

std::vector<GenomicContext> contexts_from_json(std::string_view text) {
  auto doc = json::parse(text);
  return doc.at("contexts").get<std::vector<GenomicContext>>();
}

namespace {

template <class Range>
std::string join(const Range& values, std::string_view sep) {
  std::ostringstream os;
  bool first = true;
  for (const auto& v : values) {
    if (!first) os << sep;
    os << v;
    first = false;
  }
  return os.str();
}

std::string or_dash(const std::string& s) { return s.empty() ? "-" : s; }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) {
  // Two decimals are enough for drawing and keep the file small.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_families_tsv(const std::vector<Family>& families, const AnnotationTables& annotations) {
  std::ostringstream os;
  os << "family_id\trepresentative\tsize\tmembers\tpdb\tfunction\n";
  for (const auto& f : families) {
    std::string pdb, function;
    auto it = annotations.families.find(f.family_id);
    if (it != annotations.families.end()) {
      if (auto k = it->second.find(AnnotationKind::pdb_structure); k != it->second.end()) pdb = join(k->second, ";");
      if (auto k = it->second.find(AnnotationKind::function); k != it->second.end()) function = join(k->second, ";");
    }
    os << f.family_id << '\t' << f.representative << '\t' << f.members.size() << '\t' << join(f.members, ",")
       << '\t' << or_dash(pdb) << '\t' << or_dash(function) << '\n';
  }
  return os.str();
}

std::string render_operons_tsv(const std::vector<OperonType>& operons) {
  std::ostringstream os;
  os << "operon_id\tsize\tfingerprint\tmembers\n";
  for (const auto& o : operons)
    os << o.operon_id << '\t' << o.member_targets.size() << '\t' << or_dash(join(o.fingerprint, ",")) << '\t'
       << join(o.member_targets, ",") << '\n';
  return os.str();
}

std::string render_unresolved_tsv(const std::vector<Unresolved>& unresolved) {
  std::ostringstream os;
  os << "raw_id\tid_standard\tsource_label\treason\n";
  for (const auto& u : unresolved)
    os << u.target.raw_id << '\t' << to_string(u.target.id_standard) << '\t'
       << or_dash(u.target.source_label.value_or("")) << '\t' << u.reason << '\n';
  return os.str();
}

std::string render_taxonomy_tree(const json& tree) { return tree.dump(1) + "\n"; }

std::string_view family_color(int family_id) {
  if (family_id < 0) return unassigned_color;
  // Knuth multiplicative hash spreads neighbouring ids across the table.
  const auto h = static_cast<std::uint32_t>(static_cast<std::uint64_t>(family_id) * 2654435761u);
  return family_palette[(h >> 16) % family_palette.size()];
}

std::string render_context_svg(const std::vector<GenomicContext>& contexts) {
  constexpr double label_width = 170, margin = 10, row_height = 28, arrow_height = 16, head = 8, gap = 6;
  constexpr double drawing_width = 900;
  std::vector<const GenomicContext*> rows;
  for (const auto& c : contexts)
    if (c.usable() && !c.genes.empty()) rows.push_back(&c);
  // One bp scale for all rows: the widest context fills the drawing area.
  double widest_bp = 1;
  std::size_t widest_genes = 1;
  for (const auto* c : rows) {
    double bp = 0;
    for (const auto& g : c->genes) bp += static_cast<double>(g.length());
    widest_bp = std::max(widest_bp, bp);
    widest_genes = std::max(widest_genes, c->genes.size());
  }
  const double scale = (drawing_width - gap * static_cast<double>(widest_genes)) / widest_bp;

  std::set<int> used;
  for (const auto* c : rows)
    for (const auto& g : c->genes) {
      auto it = c->family_ids.find(g.protein_code);
      used.insert(it == c->family_ids.end() ? -1 : it->second);
    }
  const double legend_top = margin + row_height * static_cast<double>(rows.size()) + margin;
  const double legend_rows = static_cast<double>((used.size() + 7) / 8);
  const double width = margin * 2 + label_width + drawing_width;
  const double height = legend_top + 20 * legend_rows + margin + 16;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\"" << px(height)
     << "\" viewBox=\"0 0 " << px(width) << ' ' << px(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << px(width) << "\" height=\"" << px(height) << "\" fill=\"#ffffff\"/>\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& c = *rows[r];
    const double top = margin + row_height * static_cast<double>(r);
    const double mid = top + row_height / 2;
    os << "<g class=\"context\" data-target=\"" << xml_escape(c.target.raw_id) << "\">\n";
    os << "<text x=\"" << px(margin) << "\" y=\"" << px(mid + 4) << "\">" << xml_escape(c.target.raw_id)
       << "</text>\n";
    double x = margin + label_width;
    for (const auto& g : c.genes) {
      const double w = std::max(2.0, static_cast<double>(g.length()) * scale);
      const double h = std::min(head, w);
      const double y0 = mid - arrow_height / 2, y1 = mid + arrow_height / 2;
      auto fam = c.family_ids.find(g.protein_code);
      const int family = fam == c.family_ids.end() ? -1 : fam->second;
      const bool target = g.relative_position == 0;
      std::string points;
      if (g.strand == Strand::plus) {
        points = px(x) + "," + px(y0) + " " + px(x + w - h) + "," + px(y0) + " " + px(x + w) + "," + px(mid) + " " +
                 px(x + w - h) + "," + px(y1) + " " + px(x) + "," + px(y1);
      } else {
        points = px(x + w) + "," + px(y0) + " " + px(x + h) + "," + px(y0) + " " + px(x) + "," + px(mid) + " " +
                 px(x + h) + "," + px(y1) + " " + px(x + w) + "," + px(y1);
      }
      os << "<polygon class=\"gene\" data-protein=\"" << xml_escape(g.protein_code) << "\" data-strand=\""
         << strand_char(g.strand) << "\" points=\"" << points << "\" fill=\"" << family_color(family)
         << "\" stroke=\"" << (target ? "#000000" : "#555555") << "\" stroke-width=\"" << (target ? "2" : "0.5")
         << "\"><title>" << xml_escape(g.protein_code) << " family " << family << "</title></polygon>\n";
      x += w + gap;
    }
    os << "</g>\n";
  }
  os << "<g class=\"legend\">\n";
  std::size_t k = 0;
  for (int family : used) {
    const double lx = margin + 130 * static_cast<double>(k % 8);
    const double ly = legend_top + 20 * static_cast<double>(k / 8);
    os << "<rect x=\"" << px(lx) << "\" y=\"" << px(ly) << "\" width=\"12\" height=\"12\" fill=\""
       << family_color(family) << "\" stroke=\"#555555\" stroke-width=\"0.5\"/>\n";
    os << "<text x=\"" << px(lx + 16) << "\" y=\"" << px(ly + 10) << "\">"
       << (family < 0 ? std::string("no family") : "family " + std::to_string(family)) << "</text>\n";
    ++k;
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

void write_tables(const OutputData& data, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_text_file(out_dir / "contexts.json", render_contexts_json(data.contexts));
  write_text_file(out_dir / "families.tsv", render_families_tsv(data.families, data.annotations));
  write_text_file(out_dir / "operons.tsv", render_operons_tsv(data.operons));
  write_text_file(out_dir / "taxonomy_tree.json", render_taxonomy_tree(data.taxonomy_tree));
  write_text_file(out_dir / "contexts.svg", render_context_svg(data.contexts));
  write_text_file(out_dir / "unresolved.tsv", render_unresolved_tsv(data.unresolved));
}

void write_done_sentinel(const fs::path& out_dir) {
  std::vector<std::string> names(bundle_files.begin(), bundle_files.end());
  std::sort(names.begin(), names.end());
  for (const auto& n : names)
    if (!fs::exists(out_dir / n)) throw DataError("bundle file " + n + " missing; not marking run complete");
  write_text_file(out_dir / done_file, join(names, "\n") + "\n");
}

void remove_done_sentinel(const fs::path& out_dir) {
  std::error_code ec;
  fs::remove(out_dir / done_file, ec);
}

bool bundle_complete(const fs::path& out_dir) { return fs::exists(out_dir / done_file); }

}  // namespace gcontext
