#include <gtest/gtest.h>

#include <sstream>

#include "gcontext/error.hpp"
#include "gcontext/output.hpp"
#include "support.hpp"
#include "xml_check.hpp"

using namespace gcontext;
using nlohmann::json;
using support::XmlChecker;

namespace {

Gene gene(std::string code, std::int64_t start, std::int64_t end, Strand s, int rel) {
  Gene g;
  g.protein_code = std::move(code);
  g.contig = "NZ_CP000001.1";
  g.start = start;
  g.end = end;
  g.strand = s;
  g.product = "protein " + g.protein_code;
  g.relative_position = rel;
  return g;
}

GenomicContext three_gene_context(const std::string& raw_id = "P0A7G6") {
  GenomicContext c;
  c.target.raw_id = raw_id;
  c.target.id_standard = IdStandard::uniprot_ac;
  c.target.canonical_code = "WP_2.1";
  c.target.source_label = "groupA";
  c.assembly_accession = "GCF_1.1";
  c.genes = {gene("WP_1.1", 100, 400, Strand::plus, -1), gene("WP_2.1", 500, 1400, Strand::minus, 0),
             gene("WP_3.1", 1500, 1800, Strand::plus, 1)};
  c.sequences = {{"WP_1.1", "MKV"}, {"WP_2.1", "MKVLA"}, {"WP_3.1", "MA"}};
  c.complete = true;
  c.family_ids = {{"WP_1.1", 0}, {"WP_2.1", 4}, {"WP_3.1", -1}};
  c.operon_type = 2;
  Lineage l;
  l.taxid = 562;
  l.found = true;
  l.superkingdom = "Bacteria";
  l.genus = "Escherichia";
  l.species = "Escherichia coli";
  c.lineage = l;
  c.annotations["WP_1.1"]["tm_segments"] = "3-20;40-60";
  return c;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Vertices of a polygon's points attribute.
std::vector<std::pair<double, double>> vertices(const std::string& points) {
  std::vector<std::pair<double, double>> out;
  std::istringstream in(points);
  for (std::string p; in >> p;) {
    auto comma = p.find(',');
    out.emplace_back(std::stod(p.substr(0, comma)), std::stod(p.substr(comma + 1)));
  }
  return out;
}

}  // namespace

TEST(FamiliesTsv, ColumnsAndAnnotations) {
  AnnotationTables tables;
  tables.families[1][AnnotationKind::pdb_structure] = {"2XYZ", "1ABC"};
  tables.families[1][AnnotationKind::function] = {"kinase"};
  std::vector<Family> fams = {{0, {"WP_1.1"}, "WP_1.1"}, {1, {"WP_2.1", "WP_3.1"}, "WP_3.1"}};
  EXPECT_EQ(render_families_tsv(fams, tables),
            "family_id\trepresentative\tsize\tmembers\tpdb\tfunction\n"
            "0\tWP_1.1\t1\tWP_1.1\t-\t-\n"
            "1\tWP_3.1\t2\tWP_2.1,WP_3.1\t1ABC;2XYZ\tkinase\n");
}

TEST(OperonsTsv, RowsAndHeaderOnlyWhenEmpty) {
  EXPECT_EQ(render_operons_tsv({}), "operon_id\tsize\tfingerprint\tmembers\n");
  EXPECT_EQ(render_operons_tsv({{0, {"a", "b"}, {1, 3}}, {1, {"c"}, {}}}),
            "operon_id\tsize\tfingerprint\tmembers\n0\t2\t1,3\ta,b\n1\t1\t-\tc\n");
}

TEST(UnresolvedTsv, Rows) {
  Unresolved u;
  u.target.raw_id = "P99999";
  u.target.id_standard = IdStandard::uniprot_ac;
  u.reason = "not found in mappings store";
  EXPECT_EQ(render_unresolved_tsv({u}),
            "raw_id\tid_standard\tsource_label\treason\nP99999\tUniProtKB-AC\t-\tnot found in mappings store\n");
}

TEST(ContextsJson, RoundTripsAndKeepsInputOrder) {
  auto a = three_gene_context("Z_FIRST");
  GenomicContext b;
  b.target.raw_id = "A_SECOND";
  b.target.id_standard = IdStandard::refseq;
  b.status = ContextStatus::file_missing;
  b.assembly_accession = "GCF_9.1";
  std::vector<GenomicContext> in = {a, b};
  auto text = render_contexts_json(in);
  EXPECT_EQ(contexts_from_json(text), in);
  auto doc = json::parse(text);
  EXPECT_EQ(doc.at("format_version"), 1);
  EXPECT_EQ(doc.at("contexts").at(0).at("target").at("raw_id"), "Z_FIRST");
  EXPECT_EQ(doc.at("contexts").at(1).at("status"), "file_missing");
  // Canonical form: re-dumping with sorted keys reproduces the bytes.
  EXPECT_EQ(doc.dump(1) + "\n", text);
}

TEST(ContextsJson, StatusNames) {
  for (auto s : {ContextStatus::ok, ContextStatus::no_assembly, ContextStatus::file_missing, ContextStatus::not_annotated})
    EXPECT_EQ(parse_context_status(to_string(s)), s);
  EXPECT_THROW(parse_context_status("pending"), Error);
}

TEST(FamilyColor, PaletteRules) {
  EXPECT_EQ(family_color(-1), "#e0e0e0");
  std::set<std::string_view> seen;
  for (int id = 0; id < 200; ++id) {
    auto c = family_color(id);
    EXPECT_NE(std::find(family_palette.begin(), family_palette.end(), c), family_palette.end());
    EXPECT_EQ(family_color(id), c);
    seen.insert(c);
  }
  EXPECT_GE(seen.size(), 15u);
  EXPECT_NE(family_color(0), family_color(1));
}

TEST(ContextSvg, OneContextThreeGenes) {
  auto svg = render_context_svg({three_gene_context()});
  XmlChecker xml(svg);
  ASSERT_EQ(xml.check(), "");
  std::size_t arrows = 0, legend_groups = 0, rows = 0;
  for (const auto& e : xml.elements()) {
    if (e.name == "polygon" && e.attributes.count("class") && e.attributes.at("class") == "gene") ++arrows;
    if (e.name == "g" && e.attributes.count("class") && e.attributes.at("class") == "legend") ++legend_groups;
    if (e.name == "g" && e.attributes.count("class") && e.attributes.at("class") == "context") ++rows;
  }
  EXPECT_EQ(arrows, 3u);
  EXPECT_EQ(legend_groups, 1u);
  EXPECT_EQ(rows, 1u);
  EXPECT_EQ(svg, render_context_svg({three_gene_context()}));
}

TEST(ContextSvg, OrientationOutlineAndColors) {
  auto svg = render_context_svg({three_gene_context()});
  XmlChecker xml(svg);
  ASSERT_EQ(xml.check(), "");
  for (const auto& e : xml.elements()) {
    if (e.name != "polygon") continue;
    auto v = vertices(e.attributes.at("points"));
    ASSERT_EQ(v.size(), 5u);
    double min_x = v[0].first, max_x = v[0].first;
    for (auto [x, y] : v) {
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
    }
    // The tip is the vertex at mid height (index 2).
    const auto tip = v[2].first;
    const auto& code = e.attributes.at("data-protein");
    if (e.attributes.at("data-strand") == "-") {
      EXPECT_EQ(tip, min_x) << code;
    } else {
      EXPECT_EQ(tip, max_x) << code;
    }
    const bool target = code == "WP_2.1";
    EXPECT_EQ(e.attributes.at("stroke") == "#000000", target) << code;
    const int fam = code == "WP_1.1" ? 0 : code == "WP_2.1" ? 4 : -1;
    EXPECT_EQ(e.attributes.at("fill"), family_color(fam));
  }
}

TEST(ContextSvg, LengthScaling) {
  auto svg = render_context_svg({three_gene_context()});
  XmlChecker xml(svg);
  ASSERT_EQ(xml.check(), "");
  std::map<std::string, double> width;
  for (const auto& e : xml.elements()) {
    if (e.name != "polygon") continue;
    auto v = vertices(e.attributes.at("points"));
    double lo = 1e9, hi = -1e9;
    for (auto [x, y] : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    width[e.attributes.at("data-protein")] = hi - lo;
  }
  // 301 bp, 901 bp and 301 bp genes.
  EXPECT_NEAR(width.at("WP_2.1") / width.at("WP_1.1"), 901.0 / 301.0, 0.02);
  EXPECT_NEAR(width.at("WP_3.1"), width.at("WP_1.1"), 0.02);
}

TEST(ContextSvg, EscapesAndSkipsUnusableContexts) {
  auto odd = three_gene_context("id<&>\"'");
  auto failed = three_gene_context("failed");
  failed.status = ContextStatus::not_annotated;
  auto svg = render_context_svg({odd, failed});
  XmlChecker xml(svg);
  ASSERT_EQ(xml.check(), "");
  EXPECT_EQ(svg.find("data-target=\"failed\""), std::string::npos);
  EXPECT_NE(svg.find("id&lt;&amp;&gt;&quot;&apos;"), std::string::npos);
  const auto blank = render_context_svg({});
  EXPECT_EQ(XmlChecker(blank).check(), "");
}

TEST(XmlChecker, RejectsBrokenDocuments) {
  EXPECT_NE(XmlChecker("<a><b></a>").check(), "");
  EXPECT_NE(XmlChecker("<a x=1/>").check(), "");
  EXPECT_NE(XmlChecker("<a>&bogus;</a>").check(), "");
  EXPECT_NE(XmlChecker("<a/><b/>").check(), "");
  EXPECT_NE(XmlChecker("<a>").check(), "");
  EXPECT_EQ(XmlChecker("<?xml version=\"1.0\"?>\n<a k='v'><b/>t &amp; u</a>\n").check(), "");
}

TEST(Bundle, TablesAndDoneSentinel) {
  support::TempDir dir;
  OutputData data;
  data.contexts = {three_gene_context()};
  data.families = {{0, {"WP_1.1"}, "WP_1.1"}, {4, {"WP_2.1"}, "WP_2.1"}};
  data.taxonomy_tree = {{"Bacteria", {{"unknown", json::array({"P0A7G6"})}}}};
  write_tables(data, dir.path());
  for (auto f : deterministic_files) EXPECT_TRUE(std::filesystem::exists(dir / std::string(f))) << f;
  EXPECT_THROW(write_done_sentinel(dir.path()), DataError);  // profile, gantt, run.json absent
  EXPECT_FALSE(bundle_complete(dir.path()));
  for (auto f : {"profile.json", "gantt.csv", "run.json"}) support::write_file(dir / f, "{}\n");
  write_done_sentinel(dir.path());
  EXPECT_TRUE(bundle_complete(dir.path()));
  auto listed = lines(support::read_file(dir / "DONE"));
  std::vector<std::string> want(bundle_files.begin(), bundle_files.end());
  std::sort(want.begin(), want.end());
  EXPECT_EQ(listed, want);
  remove_done_sentinel(dir.path());
  EXPECT_FALSE(bundle_complete(dir.path()));
  EXPECT_EQ(json::parse(support::read_file(dir / "taxonomy_tree.json")), data.taxonomy_tree);
}

TEST(Bundle, RewriteGivesIdenticalBytes) {
  support::TempDir a, b;
  OutputData data;
  data.contexts = {three_gene_context(), three_gene_context("Q9H0H5")};
  data.operons = {{0, {"P0A7G6", "Q9H0H5"}, {0, 4}}};
  write_tables(data, a.path());
  write_tables(data, b.path());
  write_tables(data, a.path());
  for (auto f : deterministic_files)
    EXPECT_EQ(support::read_file(a / std::string(f)), support::read_file(b / std::string(f))) << f;
}
