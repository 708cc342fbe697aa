#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "openindex/entities.hpp"

namespace openindex {

// Insertion-ordered JSON: key order is part of the dump format.
using Json = nlohmann::ordered_json;

// Record -> JSON with keys in field-declaration order. Ids render as
// https://openalex.org/<short>, dates as YYYY-MM-DD, absent optionals as null.
Json to_json(const Work& work);
Json to_json(const Author& author);
Json to_json(const Venue& venue);
Json to_json(const Institution& institution);
Json to_json(const Concept& concept_record);
Json to_json(const Entity& entity);

// Inverse of to_json. Throws ValidationError naming the bad field.
template <EntityRecord T>
T record_from_json(const Json& json);

Entity entity_from_json(EntityKind kind, const Json& json);

// Compact single-line serialization used for dump lines and API bodies.
std::string to_line(const Entity& entity);

}  // namespace openindex
