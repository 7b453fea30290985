#include "gcontext/serialize.hpp"

#include "gcontext/error.hpp"

namespace gcontext {

using nlohmann::json;

std::string_view to_string(ContextStatus status) {
  switch (status) {
    case ContextStatus::ok: return "ok";
    case ContextStatus::no_assembly: return "no_assembly";
    case ContextStatus::file_missing: return "file_missing";
    case ContextStatus::not_annotated: return "not_annotated";
  }
  return "ok";
}

ContextStatus parse_context_status(std::string_view text) {
  for (auto s : {ContextStatus::ok, ContextStatus::no_assembly, ContextStatus::file_missing,
                 ContextStatus::not_annotated})
    if (to_string(s) == text) return s;
  throw DataError("unknown context status '" + std::string(text) + "'");
}

namespace {

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> get_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

}  // namespace

void to_json(json& j, const Target& t) {
  j = json::object();
  j["raw_id"] = t.raw_id;
  j["id_standard"] = std::string(to_string(t.id_standard));
  put_optional(j, "canonical_code", t.canonical_code);
  put_optional(j, "source_label", t.source_label);
}

void from_json(const json& j, Target& t) {
  t.raw_id = j.at("raw_id").get<std::string>();
  t.id_standard = parse_id_standard(j.at("id_standard").get<std::string>());
  t.canonical_code = get_optional<std::string>(j, "canonical_code");
  t.source_label = get_optional<std::string>(j, "source_label");
}

void to_json(json& j, const Gene& g) {
  j = json{{"protein_code", g.protein_code},
           {"contig", g.contig},
           {"start", g.start},
           {"end", g.end},
           {"strand", std::string(1, strand_char(g.strand))},
           {"product", g.product},
           {"relative_position", g.relative_position}};
}

void from_json(const json& j, Gene& g) {
  g.protein_code = j.at("protein_code").get<std::string>();
  g.contig = j.at("contig").get<std::string>();
  g.start = j.at("start").get<std::int64_t>();
  g.end = j.at("end").get<std::int64_t>();
  auto s = j.at("strand").get<std::string>();
  if (s != "+" && s != "-") throw DataError("bad strand '" + s + "'");
  g.strand = s == "+" ? Strand::plus : Strand::minus;
  g.product = j.at("product").get<std::string>();
  g.relative_position = j.at("relative_position").get<int>();
}

void to_json(json& j, const Lineage& l) {
  j = json{{"taxid", l.taxid},         {"found", l.found}, {"superkingdom", l.superkingdom},
           {"phylum", l.phylum},       {"class", l.class_name}, {"order", l.order},
           {"genus", l.genus},         {"species", l.species}};
}

void from_json(const json& j, Lineage& l) {
  l.taxid = j.at("taxid").get<std::int64_t>();
  l.found = j.at("found").get<bool>();
  l.superkingdom = j.at("superkingdom").get<std::string>();
  l.phylum = j.at("phylum").get<std::string>();
  l.class_name = j.at("class").get<std::string>();
  l.order = j.at("order").get<std::string>();
  l.genus = j.at("genus").get<std::string>();
  l.species = j.at("species").get<std::string>();
}

void to_json(json& j, const GenomicContext& c) {
  j = json::object();
  j["target"] = c.target;
  j["status"] = std::string(to_string(c.status));
  j["assembly_accession"] = c.assembly_accession;
  j["genes"] = c.genes;
  j["sequences"] = c.sequences;
  j["complete"] = c.complete;
  j["family_ids"] = c.family_ids;
  put_optional(j, "operon_type", c.operon_type);
  put_optional(j, "lineage", c.lineage);
  j["annotations"] = c.annotations;
}

void from_json(const json& j, GenomicContext& c) {
  c.target = j.at("target").get<Target>();
  c.status = parse_context_status(j.at("status").get<std::string>());
  c.assembly_accession = j.at("assembly_accession").get<std::string>();
  c.genes = j.at("genes").get<std::vector<Gene>>();
  c.sequences = j.at("sequences").get<std::map<std::string, std::string>>();
  c.complete = j.at("complete").get<bool>();
  c.family_ids = j.at("family_ids").get<std::map<std::string, int>>();
  c.operon_type = get_optional<int>(j, "operon_type");
  c.lineage = get_optional<Lineage>(j, "lineage");
  c.annotations = j.value("annotations", json::object()).get<std::map<std::string, std::map<std::string, std::string>>>();
}

void to_json(json& j, const AssemblyRecord& r) {
  j = json{{"assembly_accession", r.assembly_accession},
           {"taxid", r.taxid},
           {"organism_name", r.organism_name},
           {"annotation_file", r.annotation_file},
           {"source_db", std::string(to_string(r.source_db))},
           {"file_missing", r.file_missing}};
}

void from_json(const json& j, AssemblyRecord& r) {
  r.assembly_accession = j.at("assembly_accession").get<std::string>();
  r.taxid = j.at("taxid").get<std::int64_t>();
  r.organism_name = j.at("organism_name").get<std::string>();
  r.annotation_file = j.at("annotation_file").get<std::string>();
  auto db = j.at("source_db").get<std::string>();
  r.source_db = db == to_string(SourceDb::genbank) ? SourceDb::genbank : SourceDb::refseq;
  r.file_missing = j.at("file_missing").get<bool>();
}

}  // namespace gcontext
