#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "openindex/entities.hpp"
#include "openindex/errors.hpp"

namespace openindex {

enum class FilterOp { kEquals, kOneOf };

struct FilterClause {
  std::string attribute;
  FilterOp op = FilterOp::kEquals;
  std::vector<std::string> values;  // canonical forms, see canonical_filter_value
};

// Attribute paths accepted per kind.
std::span<const std::string_view> filter_attributes(EntityKind kind) noexcept;

// Normalizes a raw filter value into the form attribute_values() produces
// (ids -> short form, external ids -> normalized, booleans -> true/false).
// Throws QueryError naming the attribute or value.
std::string canonical_filter_value(EntityKind kind, std::string_view attribute, std::string_view raw);

// Conjunction of clauses; each clause matches when any of its values does.
class FilterExpr {
 public:
  FilterExpr() = default;

  // Grammar: comma-separated `attribute:value` conjuncts, `|` separating
  // one-of alternatives inside a value.
  static FilterExpr parse(EntityKind kind, std::string_view text);

  // Adds a validated clause (one value -> equals, several -> one-of).
  FilterExpr& add(EntityKind kind, std::string_view attribute, const std::vector<std::string>& raw_values);

  const std::vector<FilterClause>& clauses() const noexcept { return clauses_; }
  bool empty() const noexcept { return clauses_.empty(); }

 private:
  std::vector<FilterClause> clauses_;
};

// Canonical values a record exposes under `attribute` (empty when absent).
std::vector<std::string> attribute_values(const Work& record, std::string_view attribute);
std::vector<std::string> attribute_values(const Author& record, std::string_view attribute);
std::vector<std::string> attribute_values(const Venue& record, std::string_view attribute);
std::vector<std::string> attribute_values(const Institution& record, std::string_view attribute);
std::vector<std::string> attribute_values(const Concept& record, std::string_view attribute);
std::vector<std::string> attribute_values(const Entity& entity, std::string_view attribute);

template <EntityRecord T>
bool matches(const T& record, const FilterExpr& filter) {
  for (const auto& clause : filter.clauses()) {
    bool any = false;
    for (const auto& v : attribute_values(record, clause.attribute)) {
      for (const auto& wanted : clause.values) {
        if (v == wanted) {
          any = true;
          break;
        }
      }
      if (any) break;
    }
    if (!any) return false;
  }
  return true;
}

bool matches(const Entity& entity, const FilterExpr& filter);

using SortKey = std::variant<std::monostate, std::int64_t, std::string>;

struct SortSpec {
  std::string field = "id";
  bool descending = false;

  // "field" or "field:asc|desc" over the kind's sortable fields.
  static SortSpec parse(EntityKind kind, std::string_view text);
};

std::span<const std::string_view> sort_fields(EntityKind kind) noexcept;

SortKey sort_key(const Work& record, std::string_view field);
SortKey sort_key(const Author& record, std::string_view field);
SortKey sort_key(const Venue& record, std::string_view field);
SortKey sort_key(const Institution& record, std::string_view field);
SortKey sort_key(const Concept& record, std::string_view field);
SortKey sort_key(const Entity& entity, std::string_view field);

struct Paging {
  std::optional<std::string> cursor;  // "*" starts a cursor walk
  std::size_t page = 1;
  std::size_t per_page = 25;
};

struct ListResult {
  std::vector<Entity> records;
  std::size_t total = 0;
  std::optional<std::string> next_cursor;
  std::size_t page = 1;
  std::size_t per_page = 25;
};

}  // namespace openindex
