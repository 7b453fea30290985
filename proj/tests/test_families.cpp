#include <gtest/gtest.h>

#include <random>
#include <set>

#include "gcontext/error.hpp"
#include "gcontext/families.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gcontext;
using support::TempDir;
using support::write_file;

namespace {

std::filesystem::path mock(const std::string& name) { return support::source_dir() / "tests" / "mock" / name; }

const SimilarityHit* find_hit(const std::vector<SimilarityHit>& hits, const std::string& a, const std::string& b) {
  for (const auto& h : hits)
    if ((h.query == a && h.subject == b) || (h.query == b && h.subject == a)) return &h;
  return nullptr;
}

std::string random_protein(std::mt19937& rng, std::size_t n) {
  static const std::string aa = "ACDEFGHIKLMNPQRSTVWY";
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += aa[rng() % 4 + (rng() % 2) * 4];  // small alphabet, many shared k-mers
  return s;
}

}  // namespace

TEST(DistanceMatrix, Basics) {
  DistanceMatrix d({"C", "A", "B"});
  EXPECT_EQ(d.labels(), (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(d.index_of("C"), 2u);
  EXPECT_THROW(d.index_of("Z"), DataError);
  EXPECT_EQ(d.at(0, 0), 0.0);
  EXPECT_EQ(d.at(0, 2), 1.0);
  d.set(2, 0, 0.25);
  EXPECT_EQ(d.at(0, 2), 0.25);
  EXPECT_EQ(d.at(2, 0), 0.25);
  EXPECT_THROW(d.set(1, 1, 0.5), Error);
  EXPECT_THROW(DistanceMatrix({"A", "A"}), DataError);
}

TEST(DistanceMatrix, RefusesOversizedInput) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i <= max_matrix_labels; ++i) labels.push_back("P" + std::to_string(i));
  try {
    DistanceMatrix d(labels);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("exceeds the limit"), std::string::npos);
  }
}

TEST(BuiltinAllVsAll, Examples) {
  auto hits = builtin_all_vs_all({{"s1", "MKVLAQ"}, {"s2", "KVLAQR"}, {"a", "AAAAA"}, {"c", "CCCCC"}}, 5);
  auto h = find_hit(hits, "s1", "s2");
  ASSERT_NE(h, nullptr);
  EXPECT_EQ(h->score, 1.0);
  EXPECT_EQ(h->self_score_query, 2.0);
  EXPECT_EQ(h->self_score_subject, 2.0);
  EXPECT_EQ(find_hit(hits, "a", "c"), nullptr);
  EXPECT_THROW(builtin_all_vs_all({{"x", "MK"}}, 1), UsageError);
}

TEST(BuiltinAllVsAll, IdenticalSequencesHaveZeroDistance) {
  auto hits = builtin_all_vs_all({{"x", "MKVLAQRST"}, {"y", "MKVLAQRST"}, {"z", "MK"}}, 5);
  auto d = hits_to_distance(hits, {"x", "y", "z"});
  EXPECT_EQ(d.at(0, 1), 0.0);
  EXPECT_EQ(d.at(0, 2), 1.0);  // shorter than k: empty k-mer set, no hits
}

TEST(BuiltinAllVsAll, MatchesSetIntersectionOracle) {
  std::mt19937 rng(99);
  for (int round = 0; round < 30; ++round) {
    std::map<std::string, std::string> seqs;
    int n = 2 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) seqs["p" + std::to_string(i)] = random_protein(rng, 3 + rng() % 40);
    const std::size_t k = 2 + rng() % 4;
    auto kmers = [&](const std::string& s) {
      std::set<std::string> out;
      for (std::size_t i = 0; i + k <= s.size(); ++i) out.insert(s.substr(i, k));
      return out;
    };
    auto hits = builtin_all_vs_all(seqs, k);
    for (auto a = seqs.begin(); a != seqs.end(); ++a)
      for (auto b = std::next(a); b != seqs.end(); ++b) {
        auto ka = kmers(a->second), kb = kmers(b->second);
        std::size_t shared = 0;
        for (const auto& x : ka) shared += kb.count(x);
        auto h = find_hit(hits, a->first, b->first);
        if (shared == 0) {
          ASSERT_EQ(h, nullptr);
          continue;
        }
        ASSERT_NE(h, nullptr);
        ASSERT_EQ(h->score, static_cast<double>(shared));
        const double sa = h->query == a->first ? h->self_score_query : h->self_score_subject;
        const double sb = h->query == a->first ? h->self_score_subject : h->self_score_query;
        ASSERT_EQ(sa, static_cast<double>(ka.size()));
        ASSERT_EQ(sb, static_cast<double>(kb.size()));
        ASSERT_LE(h->score, std::min(sa, sb));
      }
  }
}

TEST(HitsToDistance, Formula) {
  std::vector<SimilarityHit> hits = {{"A", "B", 1.0, 2.0, 2.0}, {"A", "C", 10.0, 10.0, 10.0}};
  auto d = hits_to_distance(hits, {"A", "B", "C", "D"});
  EXPECT_DOUBLE_EQ(d.at(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(d.at(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(d.at(0, 3), 1.0);
  EXPECT_DOUBLE_EQ(d.at(1, 2), 1.0);
}

TEST(HitsToDistance, ClampsAndTakesTheSmallerDirection) {
  std::vector<SimilarityHit> hits = {{"A", "B", 30.0, 10.0, 20.0}, {"B", "C", 2.0, 20.0, 4.0}, {"C", "B", 3.0, 4.0, 20.0}};
  auto d = hits_to_distance(hits, {"A", "B", "C"});
  EXPECT_DOUBLE_EQ(d.at(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(d.at(1, 2), 0.25);
  EXPECT_THROW(hits_to_distance({{"A", "B", 1.0, 0.0, 2.0}}, {"A", "B"}), DataError);
}

TEST(HitsToDistance, RandomHitsKeepMatrixInvariants) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int round = 0; round < 200; ++round) {
    std::vector<std::string> labels;
    for (int i = 0; i < 10; ++i) labels.push_back("L" + std::to_string(i));
    std::vector<SimilarityHit> hits;
    for (int h = 0; h < 30; ++h)
      hits.push_back({labels[rng() % 10], labels[rng() % 10], u(rng), 1.0 + u(rng), 1.0 + u(rng)});
    auto d = hits_to_distance(hits, labels);
    for (std::size_t i = 0; i < d.size(); ++i) {
      ASSERT_EQ(d.at(i, i), 0.0);
      for (std::size_t j = 0; j < d.size(); ++j) {
        ASSERT_EQ(d.at(i, j), d.at(j, i));
        ASSERT_GE(d.at(i, j), 0.0);
        ASSERT_LE(d.at(i, j), 1.0);
      }
    }
  }
}

TEST(SingleLinkage, ThreeLabelExample) {
  DistanceMatrix d({"A", "B", "C"});
  d.set(0, 1, 0.2);
  d.set(0, 2, 0.9);
  d.set(1, 2, 0.8);
  auto f = single_linkage(d, 0.5);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].family_id, 0);
  EXPECT_EQ(f[0].members, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(f[1].family_id, 1);
  EXPECT_EQ(f[1].members, (std::vector<std::string>{"C"}));
  EXPECT_EQ(oracles::member_lists(f), oracles::agglomerative(d, 0.5));
}

TEST(SingleLinkage, CutoffExtremes) {
  std::mt19937 rng(1);
  auto d = oracles::random_matrix(rng, 12);
  EXPECT_EQ(single_linkage(d, 0.0).size(), 12u);
  DistanceMatrix z({"A", "B", "C", "D"});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) z.set(i, j, 0.0);
  EXPECT_EQ(single_linkage(z, 0.5).size(), 1u);
  // Distances equal to the cutoff do not link.
  DistanceMatrix e({"A", "B"});
  e.set(0, 1, 0.5);
  EXPECT_EQ(single_linkage(e, 0.5).size(), 2u);
  EXPECT_TRUE(single_linkage(DistanceMatrix(std::vector<std::string>{}), 0.5).empty());
}

TEST(SingleLinkage, AgreesWithAgglomerativeOracle) {
  std::mt19937 rng(31);
  for (int round = 0; round < 300; ++round) {
    auto d = oracles::random_matrix(rng, 1 + rng() % 14);
    double cutoff = static_cast<double>(rng() % 11) / 10.0;
    ASSERT_EQ(oracles::member_lists(single_linkage(d, cutoff)), oracles::agglomerative(d, cutoff)) << round;
  }
}

TEST(SingleLinkage, AgreesWithComponentsOracleAndRefines) {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int round = 0; round < 300; ++round) {
    auto d = oracles::random_matrix(rng, 1 + rng() % 64);
    double c1 = u(rng), c2 = u(rng);
    if (c1 > c2) std::swap(c1, c2);
    auto f1 = single_linkage(d, c1);
    auto f2 = single_linkage(d, c2);
    ASSERT_EQ(oracles::member_lists(f1), oracles::threshold_components(d, c1));
    // Every family at the lower cutoff sits inside one family at the higher.
    auto index = family_index(f2);
    for (const auto& fam : f1) {
      std::set<int> parents;
      for (const auto& m : fam.members) parents.insert(index.at(m));
      ASSERT_EQ(parents.size(), 1u);
    }
    std::size_t total = 0;
    for (std::size_t i = 0; i < f1.size(); ++i) {
      ASSERT_EQ(f1[i].family_id, static_cast<int>(i));
      total += f1[i].members.size();
    }
    ASSERT_EQ(total, d.size());
  }
}

TEST(SingleLinkage, DendrogramHasOneMergePerJoin) {
  std::mt19937 rng(8);
  for (int round = 0; round < 50; ++round) {
    auto d = oracles::random_matrix(rng, 2 + rng() % 20);
    auto merges = single_linkage_dendrogram(d);
    ASSERT_EQ(merges.size(), d.size() - 1);
    const double cutoff = 0.45;
    auto below = std::count_if(merges.begin(), merges.end(), [&](const Merge& m) { return m.distance < cutoff; });
    ASSERT_EQ(single_linkage(d, cutoff).size(), d.size() - static_cast<std::size_t>(below));
  }
}

TEST(Representatives, LongestThenLexicographic) {
  std::vector<Family> fams = {{0, {"A", "B", "C"}, ""}, {1, {"D"}, ""}};
  choose_representatives(fams, {{"A", "MKV"}, {"B", "MKVL"}, {"C", "MKVA"}, {"D", "M"}});
  EXPECT_EQ(fams[0].representative, "B");
  EXPECT_EQ(fams[1].representative, "D");
}

TEST(AssignFamilies, LookupAndSentinel) {
  GenomicContext ok;
  ok.status = ContextStatus::ok;
  for (std::string c : {"A", "B", "X"}) {
    Gene g;
    g.protein_code = c;
    ok.genes.push_back(g);
  }
  GenomicContext missing = ok;
  missing.status = ContextStatus::file_missing;
  missing.genes.clear();
  std::vector<GenomicContext> contexts = {ok, missing};
  std::vector<Family> fams = {{0, {"A", "B"}, "A"}};
  assign_families(contexts, family_index(fams));
  EXPECT_EQ(contexts[0].family_ids, (std::map<std::string, int>{{"A", 0}, {"B", 0}, {"X", -1}}));
  EXPECT_TRUE(contexts[1].family_ids.empty());
  EXPECT_THROW(family_index({{0, {"A"}, ""}, {1, {"A"}, ""}}), DataError);
}

TEST(ParseHitTable, ColumnsMalformedRowsAndSelfScores) {
  TempDir dir;
  auto tsv = write_file(dir / "hits.tsv",
                        "A\tA\t10\nA\tB\t5\nB\tB\t8\nbad row\nA\tC\tNaNish\nC\tA\t4\n\nB\tC\t6\n");
  ExternalToolOptions opts;
  ExternalToolStats stats;
  auto hits = parse_hit_table(tsv, opts, &stats);
  EXPECT_EQ(stats.malformed, 2u);
  EXPECT_EQ(stats.estimated_self_scores, 1u);  // C has no self hit
  auto ab = find_hit(hits, "A", "B");
  ASSERT_NE(ab, nullptr);
  EXPECT_EQ(ab->score, 5.0);
  auto ca = find_hit(hits, "C", "A");
  ASSERT_NE(ca, nullptr);
  const double self_c = ca->query == "C" ? ca->self_score_query : ca->self_score_subject;
  EXPECT_EQ(self_c, 6.0);  // largest score seen for C
  EXPECT_EQ(find_hit(hits, "A", "A"), nullptr);
}

TEST(ParseHitTable, CustomColumns) {
  TempDir dir;
  auto tsv = write_file(dir / "hits.tsv", "x\t7\tA\tA\nx\t9\tB\tB\nx\t3\tA\tB\n");
  ExternalToolOptions opts;
  opts.query_column = 2;
  opts.subject_column = 3;
  opts.score_column = 1;
  auto hits = parse_hit_table(tsv, opts);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].score, 3.0);
  EXPECT_EQ(hits[0].self_score_query, 7.0);
}

TEST(ExternalAllVsAll, FixedTableIsParsed) {
  ExternalToolOptions opts;
  opts.tool_path = mock("fixed_aligner.sh");
  ExternalToolStats stats;
  auto hits = external_all_vs_all({{"A", "MKV"}, {"B", "MKL"}}, opts, &stats);
  EXPECT_EQ(stats.rows, 3u);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].self_score_query, 10.0);
  EXPECT_EQ(hits[0].self_score_subject, 8.0);
}

TEST(ExternalAllVsAll, NonzeroExitCarriesStderr) {
  ExternalToolOptions opts;
  opts.tool_path = mock("failing_aligner.sh");
  try {
    external_all_vs_all({{"A", "MKV"}}, opts);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("database file is corrupt"), std::string::npos) << e.what();
  }
}

TEST(ExternalAllVsAll, ThreadCountDoesNotChangeHits) {
  std::mt19937 rng(12);
  std::map<std::string, std::string> seqs;
  for (int i = 0; i < 8; ++i) seqs["p" + std::to_string(i)] = random_protein(rng, 30);
  ExternalToolOptions one;
  one.tool_path = mock("kmer_aligner.py");
  auto four = one;
  four.threads = 4;
  auto h1 = external_all_vs_all(seqs, one);
  EXPECT_FALSE(h1.empty());
  EXPECT_EQ(h1, external_all_vs_all(seqs, four));
}
