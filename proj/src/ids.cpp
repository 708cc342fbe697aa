#include "openindex/ids.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>

#include "openindex/errors.hpp"

namespace openindex {

namespace {

constexpr std::array<char, 5> kLetters = {'W', 'A', 'V', 'I', 'C'};
constexpr std::array<std::string_view, 5> kPaths = {"works", "authors", "venues", "institutions",
                                                    "concepts"};

bool iequals_prefix(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  return std::equal(prefix.begin(), prefix.end(), text.begin(), [](char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
  });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

OpenAlexId parse_short(std::string_view text, std::string_view whole) {
  if (text.empty()) {
    throw IdParseError("kind", "empty OpenAlex id '" + std::string(whole) + "'");
  }
  auto kind = kind_from_letter(text.front());
  if (!kind) {
    throw IdParseError("kind", "unknown entity kind letter '" + std::string(1, text.front()) +
                                   "' in '" + std::string(whole) + "'");
  }
  std::string_view digits = text.substr(1);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                     [](char c) { return c >= '0' && c <= '9'; })) {
    throw IdParseError("serial", "serial must be decimal digits in '" + std::string(whole) + "'");
  }
  if (digits.front() == '0') {
    throw IdParseError("serial", "serial must be >= 1 without leading zeros in '" +
                                     std::string(whole) + "'");
  }
  std::uint64_t serial = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), serial);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw IdParseError("serial", "serial out of range in '" + std::string(whole) + "'");
  }
  return OpenAlexId(*kind, serial);
}

}  // namespace

char kind_letter(EntityKind kind) noexcept { return kLetters[kind_index(kind)]; }

std::string_view kind_path(EntityKind kind) noexcept { return kPaths[kind_index(kind)]; }

std::optional<EntityKind> kind_from_letter(char letter) noexcept {
  char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
  for (std::size_t i = 0; i < kLetters.size(); ++i) {
    if (kLetters[i] == upper) return kAllKinds[i];
  }
  return std::nullopt;
}

std::optional<EntityKind> kind_from_path(std::string_view path) noexcept {
  for (std::size_t i = 0; i < kPaths.size(); ++i) {
    if (kPaths[i] == path) return kAllKinds[i];
  }
  return std::nullopt;
}

OpenAlexId::OpenAlexId(EntityKind kind, std::uint64_t serial) : kind_(kind), serial_(serial) {
  if (serial == 0) throw IdParseError("serial", "serial must be >= 1");
}

std::string OpenAlexId::short_form() const {
  return std::string(1, kind_letter(kind_)) + std::to_string(serial_);
}

std::string OpenAlexId::url() const { return std::string(kIdHost) + short_form(); }

OpenAlexId parse_id(std::string_view text) {
  std::string_view whole = trim(text);
  std::string_view rest = whole;
  if (rest.find("://") != std::string_view::npos) {
    if (iequals_prefix(rest, "https://")) {
      rest.remove_prefix(8);
    } else if (iequals_prefix(rest, "http://")) {
      rest.remove_prefix(7);
    } else {
      throw IdParseError("host", "unsupported URL scheme in '" + std::string(whole) + "'");
    }
    constexpr std::string_view host = "openalex.org/";
    if (!iequals_prefix(rest, host)) {
      throw IdParseError("host", "URL host must be openalex.org in '" + std::string(whole) + "'");
    }
    rest.remove_prefix(host.size());
    if (!rest.empty() && rest.back() == '/') rest.remove_suffix(1);
    if (rest.find('/') != std::string_view::npos) {
      throw IdParseError("host", "unexpected path segments in '" + std::string(whole) + "'");
    }
  }
  return parse_short(rest, whole);
}

CanonicalForms canonical_forms(const OpenAlexId& id) { return {id.short_form(), id.url()}; }

OpenAlexId IdAllocator::mint(EntityKind kind) {
  auto& counter = last_[kind_index(kind)];
  std::uint64_t current = counter.load();
  do {
    if (current == std::numeric_limits<std::uint64_t>::max()) {
      throw StoreError(std::string("id allocator exhausted for kind ") + kind_letter(kind));
    }
  } while (!counter.compare_exchange_weak(current, current + 1));
  return OpenAlexId(kind, current + 1);
}

std::uint64_t IdAllocator::last(EntityKind kind) const noexcept {
  return last_[kind_index(kind)].load();
}

void IdAllocator::advance_to(EntityKind kind, std::uint64_t serial) noexcept {
  auto& counter = last_[kind_index(kind)];
  std::uint64_t current = counter.load();
  while (current < serial && !counter.compare_exchange_weak(current, serial)) {
  }
}

}  // namespace openindex
