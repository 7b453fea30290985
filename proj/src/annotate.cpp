#include "gcontext/annotate.hpp"

#include <algorithm>
#include <iterator>

#include "gcontext/error.hpp"
#include "gcontext/io.hpp"
#include "gcontext/log.hpp"

namespace gcontext {

using nlohmann::json;

std::vector<int> fingerprint_of(const std::map<std::string, int>& family_ids) {
  std::vector<int> fp;
  for (const auto& [code, id] : family_ids)
    if (id >= 0) fp.push_back(id);
  std::sort(fp.begin(), fp.end());
  fp.erase(std::unique(fp.begin(), fp.end()), fp.end());
  return fp;
}

std::vector<int> context_fingerprint(const GenomicContext& context) { return fingerprint_of(context.family_ids); }

double jaccard_distance(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  const auto all = a.size() + b.size() - common;
  return 1.0 - static_cast<double>(common) / static_cast<double>(all);
}

std::vector<OperonType> cluster_operons(const std::vector<std::pair<std::string, std::vector<int>>>& fingerprints,
                                        double cutoff) {
  std::map<std::string, const std::vector<int>*> by_label;
  for (const auto& [id, fp] : fingerprints) by_label[id] = &fp;
  // Identical non-empty fingerprints sit at distance 0 and are equidistant
  // to everything else, so with cutoff > 0 each such group clusters as one
  // point, labelled by its smallest member.
  std::map<std::vector<int>, std::string> group_label;
  std::map<std::string, std::vector<std::string>> group_members;
  for (const auto& [id, fp] : by_label) {
    std::string label = id;
    if (cutoff > 0 && !fp->empty()) label = group_label.emplace(*fp, id).first->second;
    group_members[label].push_back(id);
  }
  std::vector<std::string> labels;
  for (const auto& [label, members] : group_members) labels.push_back(label);
  DistanceMatrix d(labels);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j)
      d.set(i, j, jaccard_distance(*by_label.at(d.labels()[i]), *by_label.at(d.labels()[j])));
  std::vector<OperonType> types;
  for (auto& family : single_linkage(d, cutoff)) {
    OperonType t;
    t.operon_id = family.family_id;
    for (const auto& label : family.members) {
      const auto& members = group_members.at(label);
      t.member_targets.insert(t.member_targets.end(), members.begin(), members.end());
    }
    std::sort(t.member_targets.begin(), t.member_targets.end());
    std::map<int, std::size_t> counts;
    for (const auto& m : t.member_targets)
      for (int f : *by_label.at(m)) ++counts[f];
    for (const auto& [f, c] : counts)
      if (2 * c >= t.member_targets.size()) t.fingerprint.push_back(f);
    types.push_back(std::move(t));
  }
  return types;
}

std::vector<OperonType> cluster_operons(std::vector<GenomicContext>& contexts, double cutoff) {
  std::vector<std::pair<std::string, std::vector<int>>> fps;
  for (const auto& c : contexts)
    if (c.usable()) fps.emplace_back(c.target.raw_id, context_fingerprint(c));
  auto types = cluster_operons(fps, cutoff);
  std::map<std::string, int> type_of;
  for (const auto& t : types)
    for (const auto& m : t.member_targets) type_of[m] = t.operon_id;
  for (auto& c : contexts) {
    auto it = type_of.find(c.target.raw_id);
    c.operon_type = it == type_of.end() ? std::nullopt : std::optional<int>(it->second);
  }
  return types;
}

Lineage lineage_from_row(const TaxonomyRow& row) {
  Lineage l;
  l.taxid = row.taxid;
  l.found = true;
  l.superkingdom = row.superkingdom;
  l.phylum = row.phylum;
  l.class_name = row.class_name;
  l.order = row.order;
  l.genus = row.genus;
  l.species = row.species.empty() ? row.tax_name : row.species;
  return l;
}

LineageStats attach_lineages(std::vector<GenomicContext>& contexts, const TaxonomyTable& taxonomy,
                             const AssembliesStore& assemblies) {
  std::vector<std::string> accessions;
  for (const auto& c : contexts)
    if (c.usable()) accessions.push_back(c.assembly_accession);
  std::sort(accessions.begin(), accessions.end());
  accessions.erase(std::unique(accessions.begin(), accessions.end()), accessions.end());
  const auto records = assemblies.records(accessions);
  std::map<std::int64_t, std::optional<Lineage>> by_taxid;
  for (const auto& [acc, rec] : records)
    if (rec) by_taxid.emplace(rec->taxid, std::nullopt);
  for (auto& [taxid, lineage] : by_taxid)
    if (auto row = taxonomy.find(taxid)) lineage = lineage_from_row(*row);

  LineageStats stats;
  for (auto& c : contexts) {
    c.lineage.reset();
    if (!c.usable()) continue;
    const auto& rec = records.at(c.assembly_accession);
    if (!rec) throw DataError("assembly " + c.assembly_accession + " vanished from the assemblies store");
    const auto& lineage = by_taxid.at(rec->taxid);
    if (lineage) {
      c.lineage = *lineage;
      ++stats.attached;
    } else {
      Lineage missing;
      missing.taxid = rec->taxid;
      c.lineage = missing;
      ++stats.unknown_taxid;
    }
  }
  if (stats.unknown_taxid) log_warn(stats.unknown_taxid, " context(s) have a taxid absent from the taxonomy table");
  return stats;
}

json build_taxonomy_tree(const std::vector<GenomicContext>& contexts) {
  json tree = json::object();
  auto rank = [](const std::string& v) { return v.empty() ? std::string("unknown") : v; };
  for (const auto& c : contexts) {
    if (!c.lineage || !c.lineage->found) continue;
    const auto& l = *c.lineage;
    auto& leaf = tree[rank(l.superkingdom)][rank(l.phylum)][rank(l.class_name)][rank(l.order)][rank(l.genus)]
                     [rank(l.species)];
    if (leaf.is_null()) leaf = json::array();
    leaf.push_back(c.target.raw_id);
  }
  // Sort every leaf list.
  auto sort_leaves = [](auto& self, json& node) -> void {
    if (node.is_array()) {
      auto v = node.get<std::vector<std::string>>();
      std::sort(v.begin(), v.end());
      node = v;
      return;
    }
    for (auto& [k, child] : node.items()) self(self, child);
  };
  sort_leaves(sort_leaves, tree);
  return tree;
}

std::string_view to_string(AnnotationKind kind) {
  switch (kind) {
    case AnnotationKind::pdb_structure: return "pdb_structure";
    case AnnotationKind::tm_segments: return "tm_segments";
    case AnnotationKind::signal_peptide: return "signal_peptide";
    case AnnotationKind::function: return "function";
  }
  return "function";
}

AnnotationKind parse_annotation_kind(std::string_view text) {
  for (auto k : {AnnotationKind::pdb_structure, AnnotationKind::tm_segments, AnnotationKind::signal_peptide,
                 AnnotationKind::function})
    if (to_string(k) == text) return k;
  throw UsageError("unknown annotation kind '" + std::string(text) + "'");
}

bool is_family_level(AnnotationKind kind) {
  return kind == AnnotationKind::pdb_structure || kind == AnnotationKind::function;
}

std::vector<UserAnnotation> read_annotation_file(AnnotationKind kind, const std::filesystem::path& path,
                                                 std::size_t* malformed) {
  std::vector<UserAnnotation> rows;
  std::size_t bad = 0;
  LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2 || trim(cols[0]).empty() || trim(cols[1]).empty()) {
      ++bad;
      continue;
    }
    rows.push_back({kind, std::string(trim(cols[0])), std::string(trim(cols[1])), path.string()});
  }
  if (bad) log_warn("skipped ", bad, " malformed row(s) in ", path.string());
  if (malformed) *malformed = bad;
  return rows;
}

AnnotationTables apply_user_annotations(std::vector<GenomicContext>& contexts, const std::vector<Family>& families,
                                        const std::map<AnnotationKind, std::filesystem::path>& files) {
  AnnotationTables tables;
  const auto index = family_index(families);
  std::set<std::string> context_codes;
  for (const auto& c : contexts)
    if (c.usable())
      for (const auto& g : c.genes) context_codes.insert(g.protein_code);

  for (const auto& [kind, path] : files) {
    std::size_t malformed = 0;
    auto rows = read_annotation_file(kind, path, &malformed);
    tables.malformed += malformed;
    tables.rows += rows.size();
    for (const auto& row : rows) {
      if (is_family_level(kind)) {
        auto it = index.find(row.code);
        if (it == index.end()) {
          ++tables.unmatched;
          continue;
        }
        tables.families[it->second][kind].insert(row.payload);
      } else {
        if (!context_codes.count(row.code)) {
          ++tables.unmatched;
          continue;
        }
        tables.members[row.code][kind].insert(row.payload);
      }
    }
  }
  for (auto& c : contexts) {
    c.annotations.clear();
    if (!c.usable()) continue;
    for (const auto& g : c.genes) {
      auto it = tables.members.find(g.protein_code);
      if (it == tables.members.end()) continue;
      for (const auto& [kind, payloads] : it->second) {
        std::string joined;
        for (const auto& p : payloads) joined += (joined.empty() ? "" : ";") + p;
        c.annotations[g.protein_code][std::string(to_string(kind))] = joined;
      }
    }
  }
  if (tables.unmatched) log_info(tables.unmatched, " annotation row(s) matched no collected protein");
  return tables;
}

}  // namespace gcontext
