#include "gcontext/config.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "gcontext/error.hpp"
#include "gcontext/io.hpp"
#include "gcontext/stores.hpp"

namespace gcontext {

namespace fs = std::filesystem;

std::string_view to_string(SimilarityBackend backend) {
  return backend == SimilarityBackend::builtin ? "builtin" : "external";
}

namespace {

struct Option {
  std::string key;  // canonical spelling, dashes
  std::string value_name;
  std::string help;
  bool repeatable = false;
  std::function<void(RunConfig&, const std::string&)> apply;
};

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw UsageError("invalid value '" + value + "' for key '" + key + "': " + why);
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "expected an integer");
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  double out = std::strtod(v.c_str(), &end);
  if (v.empty() || errno != 0 || end != v.c_str() + v.size()) bad_value(key, v, "expected a real number");
  return out;
}

int non_negative(const std::string& key, const std::string& v) {
  auto n = to_integer(key, v);
  if (n < 0 || n > 1000000) bad_value(key, v, "expected a non-negative integer");
  return static_cast<int>(n);
}

int positive(const std::string& key, const std::string& v) {
  auto n = to_integer(key, v);
  if (n < 1 || n > 1000000) bad_value(key, v, "expected a positive integer");
  return static_cast<int>(n);
}

double unit_interval(const std::string& key, const std::string& v) {
  auto x = to_real(key, v);
  if (!(x >= 0.0 && x <= 1.0)) bad_value(key, v, "expected a value in [0, 1]");
  return x;
}

template <class F>
auto enum_value(const std::string& key, const std::string& v, F parse) {
  try {
    return parse(v);
  } catch (const Error& e) {
    bad_value(key, v, e.what());
  }
}

std::vector<Option> option_table() {
  std::vector<Option> t;
  auto add = [&](std::string key, std::string value_name, std::string help,
                 std::function<void(RunConfig&, const std::string&)> apply, bool repeatable = false) {
    t.push_back({std::move(key), std::move(value_name), std::move(help), repeatable, std::move(apply)});
  };
  add("targets", "FILE", "target list (one id per line or FASTA); repeatable",
      [](RunConfig& c, const std::string& v) { c.targets_paths.emplace_back(v); }, true);
  add("out", "DIR", "output directory", [](RunConfig& c, const std::string& v) { c.out_dir = v; });
  add("data", "DIR", "directory holding the built stores (fallback: $GCONTEXT_DATA_DIR)",
      [](RunConfig& c, const std::string& v) { c.data_dir = v; });
  add("flank-up", "N", "genes upstream of the target (default 4)",
      [](RunConfig& c, const std::string& v) { c.n_flanking_up = non_negative("flank-up", v); });
  add("flank-down", "N", "genes downstream of the target (default 4)",
      [](RunConfig& c, const std::string& v) { c.n_flanking_down = non_negative("flank-down", v); });
  add("family-cutoff", "D", "single-linkage cutoff for families (default 0.7)",
      [](RunConfig& c, const std::string& v) { c.family_distance_cutoff = unit_interval("family-cutoff", v); });
  add("operon-cutoff", "D", "single-linkage cutoff for operon types (default 0.5)",
      [](RunConfig& c, const std::string& v) { c.operon_distance_cutoff = unit_interval("operon-cutoff", v); });
  add("workers", "N", "number of workers (default 1)",
      [](RunConfig& c, const std::string& v) { c.workers = positive("workers", v); });
  add("cores-per-worker", "N", "thread budget handed to each worker (default 1)",
      [](RunConfig& c, const std::string& v) { c.cores_per_worker = positive("cores-per-worker", v); });
  add("transport", "KIND", "inprocess | multiprocess | socket (default inprocess)",
      [](RunConfig& c, const std::string& v) { c.transport = enum_value("transport", v, parse_transport); });
  add("listen", "HOST:PORT", "coordinator address for the socket transport (default 127.0.0.1:0)",
      [](RunConfig& c, const std::string& v) {
        if (v.find(':') == std::string::npos) bad_value("listen", v, "expected HOST:PORT");
        c.listen = v;
      });
  add("handshake-timeout", "SECONDS", "worker handshake timeout (default 30)", [](RunConfig& c, const std::string& v) {
    auto s = to_real("handshake-timeout", v);
    if (!(s > 0)) bad_value("handshake-timeout", v, "expected a positive number of seconds");
    c.handshake_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(s * 1000));
  });
  add("chunking", "MODE", "static | dynamic (default static)",
      [](RunConfig& c, const std::string& v) { c.chunking = enum_value("chunking", v, parse_chunking_mode); });
  add("chunk-size", "N", "chunk size for dynamic chunking (default 1)",
      [](RunConfig& c, const std::string& v) { c.dynamic_chunk_size = static_cast<std::size_t>(positive("chunk-size", v)); });
  add("similarity-backend", "KIND", "builtin | external (default builtin)", [](RunConfig& c, const std::string& v) {
    if (v == "builtin")
      c.similarity_backend = SimilarityBackend::builtin;
    else if (v == "external")
      c.similarity_backend = SimilarityBackend::external;
    else
      bad_value("similarity-backend", v, "expected builtin or external");
  });
  add("kmer", "K", "k-mer length of the builtin backend (default 5)", [](RunConfig& c, const std::string& v) {
    auto k = positive("kmer", v);
    if (k < 2) bad_value("kmer", v, "k must be at least 2");
    c.kmer_size = static_cast<std::size_t>(k);
  });
  add("external-tool-path", "FILE", "similarity tool for the external backend",
      [](RunConfig& c, const std::string& v) { c.external_tool_path = fs::path(v); });
  add("external-columns", "Q,S,SCORE", "zero-based query, subject, score columns of the tool output (default 0,1,2)",
      [](RunConfig& c, const std::string& v) {
        auto parts = split(v, ',');
        if (parts.size() != 3) bad_value("external-columns", v, "expected three comma-separated indices");
        std::size_t cols[3];
        for (int i = 0; i < 3; ++i)
          cols[i] = static_cast<std::size_t>(non_negative("external-columns", std::string(trim(parts[i]))));
        c.external_query_column = cols[0];
        c.external_subject_column = cols[1];
        c.external_score_column = cols[2];
      });
  for (auto kind : {AnnotationKind::pdb_structure, AnnotationKind::tm_segments, AnnotationKind::signal_peptide,
                    AnnotationKind::function}) {
    std::string key(to_string(kind));
    std::replace(key.begin(), key.end(), '_', '-');
    key += "-file";
    add(key, "FILE", "code<TAB>payload annotations of kind " + std::string(to_string(kind)),
        [kind](RunConfig& c, const std::string& v) { c.annotation_files[kind] = v; });
  }
  add("log-level", "LEVEL", "error | warn | info | debug (default warn)", [](RunConfig& c, const std::string& v) {
    c.log_level = enum_value("log-level", v, parse_log_level);
  });
  return t;
}

const Option* find_option(const std::vector<Option>& table, std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  for (const auto& o : table)
    if (o.key == key) return &o;
  return nullptr;
}

using Assignment = std::pair<const Option*, std::string>;

std::vector<Assignment> read_config_file(const std::vector<Option>& table, const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw UsageError("cannot read config file " + path.string() + ": " + e.what());
  }
  std::vector<Assignment> out;
  std::size_t line_no = 0;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    const std::string where = "config file " + path.string() + " line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw UsageError(where + ": expected key = value");
    std::string key(trim(t.substr(0, eq)));
    std::string value(trim(t.substr(eq + 1)));
    const Option* o = find_option(table, key);
    if (!o) throw UsageError(where + ": unknown key '" + key + "'");
    out.emplace_back(o, value);
  }
  return out;
}

void apply_all(RunConfig& cfg, const std::vector<Assignment>& assignments) {
  // Repeatable keys given in a layer replace, not extend, lower layers.
  std::map<const Option*, bool> cleared;
  for (const auto& [o, v] : assignments) {
    if (o->repeatable && !cleared[o]) {
      if (o->key == "targets") cfg.targets_paths.clear();
      cleared[o] = true;
    }
    o->apply(cfg, v);
  }
}

}  // namespace

void validate_config(const RunConfig& c) {
  if (c.targets_paths.empty()) throw UsageError("missing required key 'targets'");
  if (c.out_dir.empty()) throw UsageError("missing required key 'out'");
  if (c.data_dir.empty()) throw UsageError("missing required key 'data' (or set GCONTEXT_DATA_DIR)");
  if (c.n_flanking_up < 0) throw UsageError("key 'flank-up' must be non-negative");
  if (c.n_flanking_down < 0) throw UsageError("key 'flank-down' must be non-negative");
  if (c.workers < 1) throw UsageError("key 'workers' must be at least 1");
  if (c.cores_per_worker < 1) throw UsageError("key 'cores-per-worker' must be at least 1");
  if (c.dynamic_chunk_size < 1) throw UsageError("key 'chunk-size' must be at least 1");
  if (!(c.family_distance_cutoff >= 0 && c.family_distance_cutoff <= 1))
    throw UsageError("key 'family-cutoff' must lie in [0, 1]");
  if (!(c.operon_distance_cutoff >= 0 && c.operon_distance_cutoff <= 1))
    throw UsageError("key 'operon-cutoff' must lie in [0, 1]");
  if (c.similarity_backend == SimilarityBackend::external && !c.external_tool_path)
    throw UsageError("external backend requires tool path (key 'external-tool-path')");

  for (const auto& p : c.targets_paths)
    if (!fs::is_regular_file(p) || ::access(p.c_str(), R_OK) != 0)
      throw UsageError("key 'targets': cannot read " + p.string());
  if (fs::exists(c.out_dir) && !fs::is_directory(c.out_dir))
    throw UsageError("key 'out': " + c.out_dir.string() + " exists and is not a directory");
  if (!fs::is_directory(c.data_dir)) throw UsageError("key 'data': no directory " + c.data_dir.string());
  for (auto kind : {StoreKind::mappings, StoreKind::assemblies, StoreKind::sequences, StoreKind::taxonomy}) {
    auto p = store_path(c.data_dir, kind);
    if (!fs::is_regular_file(p))
      throw UsageError("key 'data': store " + p.filename().string() + " missing; run `gcontext ingest --kind " +
                       std::string(to_string(kind)) + "` first");
  }
  if (c.external_tool_path) {
    const auto& p = *c.external_tool_path;
    if (!fs::is_regular_file(p) || ::access(p.c_str(), X_OK) != 0)
      throw UsageError("key 'external-tool-path': " + p.string() + " is not an executable file");
  }
  for (const auto& [kind, p] : c.annotation_files)
    if (!fs::is_regular_file(p) || ::access(p.c_str(), R_OK) != 0) {
      std::string key(to_string(kind));
      std::replace(key.begin(), key.end(), '_', '-');
      throw UsageError("key '" + key + "-file': cannot read " + p.string());
    }
}

RunConfig parse_config(const std::vector<std::string>& argv, const std::optional<fs::path>& config_file) {
  if (argv.empty()) throw UsageError("empty argument list");
  const auto table = option_table();
  std::vector<Assignment> cli;
  std::optional<fs::path> file = config_file;
  std::size_t i = argv.front() == "run" ? 1 : 0;
  for (; i < argv.size(); ++i) {
    const auto& arg = argv[i];
    if (!starts_with(arg, "--") || arg.size() == 2) throw UsageError("unexpected argument '" + arg + "'");
    std::string key = arg.substr(2), value;
    bool inline_value = false;
    if (auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
      inline_value = true;
    }
    if (!inline_value) {
      if (i + 1 >= argv.size()) throw UsageError("missing value for key '" + key + "'");
      value = argv[++i];
    }
    if (key == "config") {
      file = fs::path(value);
      continue;
    }
    const Option* o = find_option(table, key);
    if (!o) throw UsageError("unknown flag '--" + key + "'");
    cli.emplace_back(o, value);
  }

  RunConfig cfg;
  if (file) apply_all(cfg, read_config_file(table, *file));
  apply_all(cfg, cli);
  if (cfg.data_dir.empty())
    if (const char* env = std::getenv("GCONTEXT_DATA_DIR"); env && *env) cfg.data_dir = env;
  validate_config(cfg);
  return cfg;
}

std::string config_help() {
  std::ostringstream os;
  os << "Options (also accepted as `key = value` lines in --config FILE):\n";
  for (const auto& o : option_table()) {
    std::string flag = "--" + o.key + " " + o.value_name;
    os << "  " << flag << std::string(flag.size() < 34 ? 34 - flag.size() : 1, ' ') << o.help << '\n';
  }
  os << "  --config FILE" << std::string(21, ' ') << "read options from FILE; command-line values win\n";
  return os.str();
}

}  // namespace gcontext
