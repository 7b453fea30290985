#include "gcontext/families.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include "gcontext/error.hpp"
#include "gcontext/io.hpp"
#include "gcontext/log.hpp"

namespace gcontext {

namespace fs = std::filesystem;

DistanceMatrix::DistanceMatrix(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  if (std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end())
    throw DataError("distance matrix labels are not unique");
  if (labels_.size() > max_matrix_labels)
    throw DataError("distance matrix of " + std::to_string(labels_.size()) + " sequences exceeds the limit of " +
                    std::to_string(max_matrix_labels));
  const auto n = labels_.size();
  upper_.assign(n < 2 ? 0 : n * (n - 1) / 2, 1.0);
}

std::size_t DistanceMatrix::index_of(const std::string& label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) throw DataError("label '" + label + "' not in distance matrix");
  return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t DistanceMatrix::offset(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  const auto n = labels_.size();
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

double DistanceMatrix::at(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  return upper_[offset(i, j)];
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double value) {
  if (i == j) throw Error("diagonal of a distance matrix is fixed at 0");
  upper_[offset(i, j)] = value;
}

std::vector<SimilarityHit> builtin_all_vs_all(const std::map<std::string, std::string>& sequences, std::size_t k) {
  if (k < 2) throw UsageError("k-mer size must be at least 2");
  std::vector<std::string> codes;
  std::vector<std::vector<std::string_view>> kmers;
  for (const auto& [code, seq] : sequences) {
    codes.push_back(code);
    std::vector<std::string_view> set;
    std::string_view s(seq);
    if (s.size() >= k)
      for (std::size_t i = 0; i + k <= s.size(); ++i) set.push_back(s.substr(i, k));
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    kmers.push_back(std::move(set));
  }
  // Inverted index: k-mer -> sequence indices holding it.
  std::map<std::string_view, std::vector<std::size_t>> postings;
  for (std::size_t i = 0; i < kmers.size(); ++i)
    for (auto km : kmers[i]) postings[km].push_back(i);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> shared;
  for (const auto& [km, list] : postings)
    for (std::size_t a = 0; a < list.size(); ++a)
      for (std::size_t b = a + 1; b < list.size(); ++b) ++shared[{list[a], list[b]}];
  std::vector<SimilarityHit> hits;
  hits.reserve(shared.size());
  for (const auto& [pair, count] : shared) {
    hits.push_back({codes[pair.first], codes[pair.second], static_cast<double>(count),
                    static_cast<double>(kmers[pair.first].size()), static_cast<double>(kmers[pair.second].size())});
  }
  return hits;
}

namespace {

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  std::string owned(text);
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(owned.c_str(), &end);
  if (errno != 0 || end != owned.c_str() + owned.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "gcontext-sim-XXXXXX").string();
    if (!mkdtemp(pattern.data())) throw Error("cannot create temporary directory: " + std::string(std::strerror(errno)));
    path = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

std::vector<SimilarityHit> parse_hit_table(const fs::path& tsv, const ExternalToolOptions& options,
                                           ExternalToolStats* stats) {
  ExternalToolStats local;
  struct Raw {
    std::string q, s;
    double score;
  };
  std::vector<Raw> raw;
  std::map<std::string, double> self;
  std::map<std::string, double> max_seen;
  LineReader reader(tsv);
  std::string line;
  const auto need = std::max({options.query_column, options.subject_column, options.score_column}) + 1;
  while (reader.next(line)) {
    if (trim(line).empty() || line[0] == '#') continue;
    ++local.rows;
    auto cols = split(line, '\t');
    if (cols.size() < need) {
      ++local.malformed;
      continue;
    }
    auto q = std::string(trim(cols[options.query_column]));
    auto s = std::string(trim(cols[options.subject_column]));
    auto score = parse_double(cols[options.score_column]);
    if (q.empty() || s.empty() || !score || *score < 0) {
      ++local.malformed;
      continue;
    }
    if (q == s) {
      auto& v = self[q];
      v = std::max(v, *score);
      continue;
    }
    for (const auto& c : {q, s}) {
      auto& m = max_seen[c];
      m = std::max(m, *score);
    }
    raw.push_back({std::move(q), std::move(s), *score});
  }
  for (const auto& [code, best] : max_seen) {
    if (!self.count(code)) {
      self[code] = best;
      ++local.estimated_self_scores;
    }
  }
  if (local.estimated_self_scores > 0)
    log_warn("similarity tool reported no self hit for ", local.estimated_self_scores,
             " sequences; using their best observed score");
  if (local.malformed > 0) log_warn("skipped ", local.malformed, " unparseable rows of ", tsv.string());
  std::vector<SimilarityHit> hits;
  hits.reserve(raw.size());
  for (auto& r : raw) {
    hits.push_back({r.q, r.s, r.score, self[r.q], self[r.s]});
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    return std::tie(a.query, a.subject, a.score) < std::tie(b.query, b.subject, b.score);
  });
  if (stats) *stats = local;
  return hits;
}

std::vector<SimilarityHit> external_all_vs_all(const std::map<std::string, std::string>& sequences,
                                               const ExternalToolOptions& options, ExternalToolStats* stats) {
  TempDir dir;
  const auto fasta = dir.path / "query.faa";
  const auto out = dir.path / "hits.tsv";
  const auto err = dir.path / "stderr.txt";
  {
    std::ostringstream os;
    for (const auto& [code, seq] : sequences) os << '>' << code << '\n' << seq << '\n';
    write_text_file(fasta, os.str());
  }
  const std::string tool = options.tool_path.string();
  const std::string threads = std::to_string(std::max(1, options.threads));
  std::vector<std::string> args = {tool, "--query", fasta.string(), "--out", out.string(), "--threads", threads};
  pid_t pid = fork();
  if (pid < 0) throw Error("fork failed: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    int fd = ::open(err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    if (fd >= 0) {
      dup2(fd, STDERR_FILENO);
      close(fd);
    }
    int devnull = ::open("/dev/null", O_RDWR);
    if (devnull >= 0) {
      dup2(devnull, STDIN_FILENO);
      dup2(devnull, STDOUT_FILENO);
    }
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    execv(tool.c_str(), argv.data());
    _exit(127);
  }
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  std::string captured;
  if (fs::exists(err)) captured = std::string(trim(read_text_file(err)));
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    std::string how = WIFEXITED(status) ? "exited with status " + std::to_string(WEXITSTATUS(status))
                                        : "was killed by signal " + std::to_string(WTERMSIG(status));
    throw DataError("similarity tool " + tool + " " + how + (captured.empty() ? "" : ": " + captured));
  }
  if (!fs::exists(out)) throw DataError("similarity tool " + tool + " wrote no output table");
  return parse_hit_table(out, options, stats);
}

DistanceMatrix hits_to_distance(const std::vector<SimilarityHit>& hits, const std::vector<std::string>& labels) {
  DistanceMatrix d(labels);
  for (const auto& h : hits) {
    if (h.query == h.subject) continue;
    if (!(h.self_score_query > 0) || !(h.self_score_subject > 0))
      throw DataError("non-positive self score for hit " + h.query + " / " + h.subject);
    const auto i = d.index_of(h.query);
    const auto j = d.index_of(h.subject);
    const double denom = std::min(h.self_score_query, h.self_score_subject);
    const double dist = 1.0 - std::min(1.0, std::max(0.0, h.score) / denom);
    if (dist < d.at(i, j)) d.set(i, j, dist);
  }
  return d;
}

std::vector<Merge> single_linkage_dendrogram(const DistanceMatrix& d) {
  const auto n = d.size();
  std::vector<Merge> edges;
  if (n < 2) return edges;
  // Prim's algorithm on the dense matrix.
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, 0);
  best[0] = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!in_tree[v] && (u == n || best[v] < best[u])) u = v;
    in_tree[u] = true;
    if (step > 0) edges.push_back({std::min(parent[u], u), std::max(parent[u], u), best[u]});
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      double w = d.at(u, v);
      if (w < best[v]) {
        best[v] = w;
        parent[v] = u;
      }
    }
  }
  std::stable_sort(edges.begin(), edges.end(), [](const Merge& x, const Merge& y) {
    return std::tie(x.distance, x.a, x.b) < std::tie(y.distance, y.a, y.b);
  });
  // Relabel edges as cluster merges keyed by the smallest member index.
  std::vector<std::size_t> root(n), smallest(n);
  std::iota(root.begin(), root.end(), 0);
  std::iota(smallest.begin(), smallest.end(), 0);
  auto find = [&](std::size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  for (auto& e : edges) {
    auto ra = find(e.a), rb = find(e.b);
    std::size_t sa = smallest[ra], sb = smallest[rb];
    root[rb] = ra;
    smallest[ra] = std::min(sa, sb);
    e.a = std::min(sa, sb);
    e.b = std::max(sa, sb);
  }
  return edges;
}

std::vector<Family> single_linkage(const DistanceMatrix& d, double cutoff) {
  const auto n = d.size();
  std::vector<std::size_t> root(n);
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](std::size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  for (const auto& m : single_linkage_dendrogram(d)) {
    if (!(m.distance < cutoff)) break;
    auto ra = find(m.a), rb = find(m.b);
    if (ra != rb) root[std::max(ra, rb)] = std::min(ra, rb);
  }
  // Labels are sorted, so the first index seen for each root is the
  // family's smallest member and ascending order gives the numbering.
  std::map<std::size_t, int> id_of_root;
  std::vector<Family> families;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = find(i);
    auto [it, fresh] = id_of_root.emplace(r, static_cast<int>(families.size()));
    if (fresh) families.push_back({it->second, {}, {}});
    families[static_cast<std::size_t>(it->second)].members.push_back(d.labels()[i]);
  }
  return families;
}

void choose_representatives(std::vector<Family>& families, const std::map<std::string, std::string>& sequences) {
  for (auto& f : families) {
    std::size_t best_len = 0;
    f.representative.clear();
    for (const auto& m : f.members) {
      auto it = sequences.find(m);
      std::size_t len = it == sequences.end() ? 0 : it->second.size();
      if (f.representative.empty() || len > best_len || (len == best_len && m < f.representative)) {
        f.representative = m;
        best_len = len;
      }
    }
  }
}

std::map<std::string, int> family_index(const std::vector<Family>& families) {
  std::map<std::string, int> index;
  for (const auto& f : families)
    for (const auto& m : f.members)
      if (!index.emplace(m, f.family_id).second) throw DataError("protein " + m + " assigned to two families");
  return index;
}

void assign_families(std::vector<GenomicContext>& contexts, const std::map<std::string, int>& index) {
  std::size_t missing = 0;
  for (auto& ctx : contexts) {
    ctx.family_ids.clear();
    if (!ctx.usable()) continue;
    for (const auto& g : ctx.genes) {
      auto it = index.find(g.protein_code);
      int id = it == index.end() ? -1 : it->second;
      if (id < 0) ++missing;
      ctx.family_ids[g.protein_code] = id;
    }
  }
  if (missing > 0) log_warn(missing, " gene(s) belong to no family; assigned family -1");
}

}  // namespace gcontext
