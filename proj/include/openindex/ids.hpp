#pragma once

#include <array>
#include <atomic>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace openindex {

// The closed world of entity kinds. Nothing accepts or emits a sixth.
enum class EntityKind : std::uint8_t { kWork = 0, kAuthor, kVenue, kInstitution, kConcept };

inline constexpr std::array<EntityKind, 5> kAllKinds = {
    EntityKind::kWork, EntityKind::kAuthor, EntityKind::kVenue, EntityKind::kInstitution,
    EntityKind::kConcept};

inline constexpr std::size_t kind_index(EntityKind kind) noexcept {
  return static_cast<std::size_t>(kind);
}

char kind_letter(EntityKind kind) noexcept;
// Plural collection name used for API paths and dump directories ("works", ...).
std::string_view kind_path(EntityKind kind) noexcept;
std::optional<EntityKind> kind_from_letter(char letter) noexcept;
std::optional<EntityKind> kind_from_path(std::string_view path) noexcept;

inline constexpr std::string_view kIdHost = "https://openalex.org/";

// Typed primary key: entity kind plus a serial >= 1.
class OpenAlexId {
 public:
  // Throws IdParseError("serial") when serial is 0.
  OpenAlexId(EntityKind kind, std::uint64_t serial);

  EntityKind kind() const noexcept { return kind_; }
  std::uint64_t serial() const noexcept { return serial_; }

  std::string short_form() const;
  std::string url() const;

  friend auto operator<=>(const OpenAlexId&, const OpenAlexId&) = default;
  friend bool operator==(const OpenAlexId&, const OpenAlexId&) = default;

 private:
  EntityKind kind_;
  std::uint64_t serial_;
};

struct CanonicalForms {
  std::string short_form;
  std::string url;
};

// Accepts "W123", "w123", "https://openalex.org/W123" and the same URL with a
// trailing slash. Errors name the offending component.
OpenAlexId parse_id(std::string_view text);

CanonicalForms canonical_forms(const OpenAlexId& id);

// Per-kind monotonic serial counters. mint() is safe to call concurrently.
class IdAllocator {
 public:
  IdAllocator() = default;
  IdAllocator(const IdAllocator&) = delete;
  IdAllocator& operator=(const IdAllocator&) = delete;

  // Throws StoreError when the kind's counter would overflow.
  OpenAlexId mint(EntityKind kind);
  std::uint64_t last(EntityKind kind) const noexcept;
  // Raises the counter to at least `serial`; never lowers it.
  void advance_to(EntityKind kind, std::uint64_t serial) noexcept;

 private:
  std::array<std::atomic<std::uint64_t>, 5> last_{};
};

}  // namespace openindex

template <>
struct std::hash<openindex::OpenAlexId> {
  std::size_t operator()(const openindex::OpenAlexId& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.serial() * 8 + openindex::kind_index(id.kind()));
  }
};
