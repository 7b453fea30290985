#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "gcontext/annotate.hpp"
#include "gcontext/error.hpp"
#include "gcontext/families.hpp"
#include "gcontext/ingest.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gcontext;
using support::TempDir;
using support::write_file;

namespace {

GenomicContext context(const std::string& raw_id, std::map<std::string, int> families) {
  GenomicContext c;
  c.target.raw_id = raw_id;
  c.status = ContextStatus::ok;
  for (const auto& [code, id] : families) {
    Gene g;
    g.protein_code = code;
    c.genes.push_back(g);
  }
  c.family_ids = std::move(families);
  return c;
}

std::vector<std::vector<std::string>> operon_members(const std::vector<OperonType>& types) {
  std::vector<std::vector<std::string>> out;
  for (const auto& t : types) out.push_back(t.member_targets);
  return out;
}

}  // namespace

TEST(Fingerprint, Examples) {
  EXPECT_EQ(fingerprint_of({{"a", 2}, {"b", 0}, {"c", 2}}), (std::vector<int>{0, 2}));
  EXPECT_TRUE(fingerprint_of({{"a", -1}, {"b", -1}}).empty());
  EXPECT_EQ(fingerprint_of({{"a", 5}}), (std::vector<int>{5}));
  EXPECT_EQ(context_fingerprint(context("t", {{"x", 3}, {"y", 1}, {"z", -1}})), (std::vector<int>{1, 3}));
}

TEST(Jaccard, Examples) {
  EXPECT_DOUBLE_EQ(jaccard_distance({1, 2, 3}, {2, 3, 4}), 0.5);
  EXPECT_DOUBLE_EQ(jaccard_distance({1, 2}, {1, 2}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard_distance({}, {}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard_distance({1}, {}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard_distance({1}, {2}), 1.0);
}

TEST(ClusterOperons, IdenticalFingerprintsShareAType) {
  auto types = cluster_operons({{"t2", {1, 2}}, {"t1", {1, 2}}}, 0.5);
  ASSERT_EQ(types.size(), 1u);
  EXPECT_EQ(types[0].member_targets, (std::vector<std::string>{"t1", "t2"}));
  EXPECT_EQ(types[0].fingerprint, (std::vector<int>{1, 2}));
}

TEST(ClusterOperons, TwoPlantedGroupsAmongSixContexts) {
  std::vector<GenomicContext> contexts = {
      context("a1", {{"p1", 0}, {"p2", 1}, {"p3", 2}, {"p4", 3}}),
      context("b1", {{"q1", 10}, {"q2", 11}, {"q3", 12}}),
      context("a2", {{"p5", 0}, {"p6", 1}, {"p7", 2}, {"p8", 4}}),
      context("b2", {{"q4", 10}, {"q5", 11}, {"q6", 13}}),
      context("a3", {{"p9", 0}, {"pa", 1}, {"pb", 3}}),
      context("b3", {{"q7", 10}, {"q8", 12}, {"q9", 11}, {"qa", 14}}),
  };
  auto types = cluster_operons(contexts, 0.6);
  // Oracle: thresholded components over the Jaccard matrix.
  std::vector<std::string> labels;
  for (const auto& c : contexts) labels.push_back(c.target.raw_id);
  DistanceMatrix d(labels);
  std::map<std::string, std::vector<int>> fp;
  for (const auto& c : contexts) fp[c.target.raw_id] = context_fingerprint(c);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j)
      d.set(i, j, jaccard_distance(fp[d.labels()[i]], fp[d.labels()[j]]));
  EXPECT_EQ(operon_members(types), oracles::threshold_components(d, 0.6));
  ASSERT_EQ(types.size(), 2u);
  EXPECT_EQ(types[0].member_targets, (std::vector<std::string>{"a1", "a2", "a3"}));
  EXPECT_EQ(types[0].fingerprint, (std::vector<int>{0, 1, 2, 3}));  // 2 and 3 in two of three members, 4 in one
  EXPECT_EQ(types[1].member_targets, (std::vector<std::string>{"b1", "b2", "b3"}));
  for (const auto& c : contexts) {
    ASSERT_TRUE(c.operon_type);
    EXPECT_EQ(*c.operon_type, c.target.raw_id[0] == 'a' ? 0 : 1);
  }
}

TEST(ClusterOperons, ConsensusKeepsFamiliesInAtLeastHalf) {
  auto types = cluster_operons({{"x", {1, 2, 3}}, {"y", {1, 2, 4}}, {"z", {1, 5, 2}}, {"w", {1, 2, 3}}}, 0.9);
  ASSERT_EQ(types.size(), 1u);
  // 1 and 2 in all four; 3 in two of four (half); 4 and 5 in one.
  EXPECT_EQ(types[0].fingerprint, (std::vector<int>{1, 2, 3}));
}

TEST(ClusterOperons, UnusableContextsAreSkippedAndEmptyFingerprintsStaySeparate) {
  auto bad = context("bad", {{"p", 1}});
  bad.status = ContextStatus::file_missing;
  std::vector<GenomicContext> contexts = {context("e1", {{"p", -1}}), context("e2", {{"q", -1}}), bad};
  auto types = cluster_operons(contexts, 1.0);
  EXPECT_EQ(types.size(), 2u);
  EXPECT_FALSE(contexts[2].operon_type);
}

TEST(ClusterOperons, PartitionAndRefinementOnRandomFingerprints) {
  std::mt19937 rng(5);
  for (int round = 0; round < 200; ++round) {
    std::vector<std::pair<std::string, std::vector<int>>> fps;
    int n = 1 + static_cast<int>(rng() % 25);
    for (int i = 0; i < n; ++i) {
      std::set<int> s;
      int m = static_cast<int>(rng() % 5);
      for (int k = 0; k < m; ++k) s.insert(static_cast<int>(rng() % 8));
      fps.push_back({"t" + std::to_string(100 + i), {s.begin(), s.end()}});
    }
    double c1 = static_cast<double>(rng() % 11) / 10.0, c2 = static_cast<double>(rng() % 11) / 10.0;
    if (c1 > c2) std::swap(c1, c2);
    auto lo = cluster_operons(fps, c1);
    auto hi = cluster_operons(fps, c2);
    std::map<std::string, int> hi_of;
    std::size_t total = 0;
    for (const auto& t : hi)
      for (const auto& m : t.member_targets) hi_of[m] = t.operon_id;
    for (const auto& t : lo) {
      total += t.member_targets.size();
      std::set<int> parents;
      for (const auto& m : t.member_targets) parents.insert(hi_of.at(m));
      ASSERT_EQ(parents.size(), 1u);
    }
    ASSERT_EQ(total, fps.size());
    ASSERT_EQ(hi_of.size(), fps.size());
  }
}

TEST(ClusterOperons, CollapsingDuplicatesMatchesFullMatrixOracle) {
  std::mt19937 rng(17);
  for (int round = 0; round < 300; ++round) {
    // Few distinct fingerprints over many targets, so duplicates are common.
    std::vector<std::vector<int>> pool(1 + rng() % 6);
    for (auto& fp : pool) {
      std::set<int> s;
      for (int k = static_cast<int>(rng() % 4); k > 0; --k) s.insert(static_cast<int>(rng() % 6));
      fp.assign(s.begin(), s.end());
    }
    std::vector<std::pair<std::string, std::vector<int>>> fps;
    const int n = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) fps.push_back({"t" + std::to_string(1000 - i), pool[rng() % pool.size()]});
    const double cutoff = static_cast<double>(rng() % 11) / 10.0;
    std::vector<std::string> labels;
    for (const auto& [id, fp] : fps) labels.push_back(id);
    DistanceMatrix d(labels);
    std::map<std::string, std::vector<int>> by(fps.begin(), fps.end());
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j = i + 1; j < d.size(); ++j)
        d.set(i, j, jaccard_distance(by.at(d.labels()[i]), by.at(d.labels()[j])));
    auto got = cluster_operons(fps, cutoff);
    ASSERT_EQ(operon_members(got), oracles::threshold_components(d, cutoff)) << round << " cutoff " << cutoff;
    for (std::size_t k = 0; k < got.size(); ++k) ASSERT_EQ(got[k].operon_id, static_cast<int>(k));
  }
}

class LineageFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    auto gff = dir_ / "gff";
    std::string summary;
    for (auto [acc, taxid] : std::vector<std::pair<std::string, long>>{{"GCF_1.1", 562}, {"GCF_2.1", 562},
                                                                        {"GCF_3.1", 1280}, {"GCF_4.1", 999999}}) {
      write_file(gff / (acc + "_genomic.gff"), fixtures::gff_cds("c", 1, 90, '+', "WP_" + acc));
      summary += fixtures::assembly_row(acc, taxid, acc) + "\n";
    }
    build_assemblies_store({write_file(dir_ / "s.txt", summary)}, gff, dir_ / "a.db");
    write_file(dir_ / "rl.dmp",
               "562\t|\tEscherichia coli\t|\t\t|\tEscherichia\t|\tEnterobacteriaceae\t|\tEnterobacterales\t|\t"
               "Gammaproteobacteria\t|\tPseudomonadota\t|\t\t|\tBacteria\t|\n"
               "1280\t|\tStaphylococcus aureus\t|\tStaphylococcus aureus\t|\tStaphylococcus\t|\t\t|\tBacillales\t|\t"
               "Bacilli\t|\t\t|\t\t|\tBacteria\t|\n");
    build_taxonomy_table(dir_ / "rl.dmp", dir_ / "t.tbl");
  }
  std::vector<GenomicContext> contexts() {
    std::vector<GenomicContext> out;
    for (auto [raw, acc] : std::vector<std::pair<std::string, std::string>>{
             {"t1", "GCF_1.1"}, {"t2", "GCF_2.1"}, {"t3", "GCF_3.1"}, {"t4", "GCF_4.1"}, {"t5", "GCF_1.1"}}) {
      auto c = context(raw, {{"WP_" + acc, 0}});
      c.assembly_accession = acc;
      out.push_back(c);
    }
    out.back().status = ContextStatus::not_annotated;
    return out;
  }
  TempDir dir_;
};

TEST_F(LineageFixture, AttachesByTaxid) {
  auto cs = contexts();
  auto table = TaxonomyTable::load(dir_ / "t.tbl");
  auto stats = attach_lineages(cs, table, AssembliesStore::open(dir_ / "a.db"));
  EXPECT_EQ(stats.attached, 3u);
  EXPECT_EQ(stats.unknown_taxid, 1u);
  ASSERT_TRUE(cs[0].lineage);
  EXPECT_EQ(cs[0].lineage->taxid, 562);
  EXPECT_TRUE(cs[0].lineage->found);
  EXPECT_EQ(cs[0].lineage->genus, "Escherichia");
  EXPECT_EQ(cs[0].lineage->species, "Escherichia coli");  // empty species column falls back to the name
  EXPECT_EQ(cs[2].lineage->species, "Staphylococcus aureus");
  EXPECT_EQ(cs[2].lineage->phylum, "");
  ASSERT_TRUE(cs[3].lineage);
  EXPECT_FALSE(cs[3].lineage->found);
  EXPECT_EQ(cs[3].lineage->taxid, 999999);
  EXPECT_EQ(cs[3].lineage->genus, "");
  EXPECT_FALSE(cs[4].lineage);
}

TEST_F(LineageFixture, TaxonomyTreeGroupsAndConservesLeaves) {
  auto cs = contexts();
  attach_lineages(cs, TaxonomyTable::load(dir_ / "t.tbl"), AssembliesStore::open(dir_ / "a.db"));
  auto tree = build_taxonomy_tree(cs);
  auto ecoli = tree.at("Bacteria").at("Pseudomonadota").at("Gammaproteobacteria").at("Enterobacterales").at(
      "Escherichia").at("Escherichia coli");
  EXPECT_EQ(ecoli, nlohmann::json({"t1", "t2"}));
  EXPECT_TRUE(tree.at("Bacteria").contains("unknown"));
  EXPECT_EQ(tree.at("Bacteria").at("unknown").at("Bacilli").at("Bacillales").at("Staphylococcus").at(
                "Staphylococcus aureus"),
            nlohmann::json({"t3"}));
  // Leaf count equals the number of contexts with a found lineage.
  std::size_t leaves = 0;
  std::function<void(const nlohmann::json&)> walk = [&](const nlohmann::json& j) {
    if (j.is_array()) {
      leaves += j.size();
      return;
    }
    for (const auto& [k, v] : j.items()) walk(v);
  };
  walk(tree);
  EXPECT_EQ(leaves, 3u);
}

TEST(AnnotationKinds, Names) {
  for (auto k : {AnnotationKind::pdb_structure, AnnotationKind::tm_segments, AnnotationKind::signal_peptide,
                 AnnotationKind::function})
    EXPECT_EQ(parse_annotation_kind(to_string(k)), k);
  EXPECT_TRUE(is_family_level(AnnotationKind::pdb_structure));
  EXPECT_TRUE(is_family_level(AnnotationKind::function));
  EXPECT_FALSE(is_family_level(AnnotationKind::tm_segments));
  EXPECT_FALSE(is_family_level(AnnotationKind::signal_peptide));
  EXPECT_THROW(parse_annotation_kind("go_terms"), Error);
}

TEST(UserAnnotations, FamilyAndMemberJoins) {
  TempDir dir;
  auto pdb = write_file(dir / "pdb.tsv", "# code\tpdb\nWP_9\t1ABC\nWP_8\t2XYZ\nWP_404\t3QQQ\nbroken-row\n");
  auto tm = write_file(dir / "tm.tsv", "WP_8\t12-34\nWP_7\t5-20\n");
  auto fn = write_file(dir / "fn.tsv", "WP_9\tkinase\n");
  std::vector<Family> families = {{0, {"WP_1"}, "WP_1"}, {3, {"WP_8", "WP_9"}, "WP_9"}};
  std::vector<GenomicContext> contexts = {context("t", {{"WP_8", 3}, {"WP_9", 3}})};
  auto tables = apply_user_annotations(contexts, families,
                                       {{AnnotationKind::pdb_structure, pdb},
                                        {AnnotationKind::tm_segments, tm},
                                        {AnnotationKind::function, fn}});
  EXPECT_EQ(tables.families.at(3).at(AnnotationKind::pdb_structure), (std::set<std::string>{"1ABC", "2XYZ"}));
  EXPECT_EQ(tables.families.at(3).at(AnnotationKind::function), (std::set<std::string>{"kinase"}));
  EXPECT_EQ(tables.members.at("WP_8").at(AnnotationKind::tm_segments), (std::set<std::string>{"12-34"}));
  EXPECT_EQ(tables.unmatched, 2u);  // WP_404 and WP_7
  EXPECT_EQ(tables.malformed, 1u);
  EXPECT_EQ(tables.rows, 6u);
  EXPECT_EQ(contexts[0].annotations.at("WP_8").at("tm_segments"), "12-34");
}

TEST(UserAnnotations, NoFilesGiveEmptyTables) {
  std::vector<GenomicContext> contexts = {context("t", {{"WP_1", 0}})};
  auto tables = apply_user_annotations(contexts, {{0, {"WP_1"}, "WP_1"}}, {});
  EXPECT_TRUE(tables.families.empty());
  EXPECT_TRUE(tables.members.empty());
  EXPECT_EQ(tables.unmatched, 0u);
}

TEST(UserAnnotations, ReaderRecordsProvenance) {
  TempDir dir;
  auto p = write_file(dir / "sp.tsv", "WP_1\tSP 1-22\nWP_2\t\nWP_3\ta\tb\n");
  std::size_t malformed = 0;
  auto rows = read_annotation_file(AnnotationKind::signal_peptide, p, &malformed);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].kind, AnnotationKind::signal_peptide);
  EXPECT_EQ(rows[0].payload, "SP 1-22");
  EXPECT_EQ(rows[0].source_file, p.string());
  EXPECT_EQ(malformed, 2u);
}
