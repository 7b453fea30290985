#pragma once

#include <nlohmann/json.hpp>

#include "gcontext/model.hpp"
#include "gcontext/stores.hpp"

namespace gcontext {

// JSON forms shared by task payloads and contexts.json.

void to_json(nlohmann::json& j, const Target& t);
void from_json(const nlohmann::json& j, Target& t);

void to_json(nlohmann::json& j, const Gene& g);
void from_json(const nlohmann::json& j, Gene& g);

void to_json(nlohmann::json& j, const Lineage& l);
void from_json(const nlohmann::json& j, Lineage& l);

void to_json(nlohmann::json& j, const GenomicContext& c);
void from_json(const nlohmann::json& j, GenomicContext& c);

void to_json(nlohmann::json& j, const AssemblyRecord& r);
void from_json(const nlohmann::json& j, AssemblyRecord& r);

}  // namespace gcontext
