#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <utility>

namespace openindex {

// Bidirectional enum <-> wire-name table. Specialize `EnumNames<E>::table`.
template <typename E>
struct EnumNames;

template <typename E>
constexpr std::string_view to_string(E value) noexcept {
  for (const auto& [e, name] : EnumNames<E>::table) {
    if (e == value) return name;
  }
  return {};
}

template <typename E>
constexpr std::optional<E> enum_from_string(std::string_view name) noexcept {
  for (const auto& [e, n] : EnumNames<E>::table) {
    if (n == name) return e;
  }
  return std::nullopt;
}

}  // namespace openindex
