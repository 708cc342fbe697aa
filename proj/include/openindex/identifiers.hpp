#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "openindex/errors.hpp"

namespace openindex {

enum class IdScheme { kDoi, kOrcid, kIssn, kRor, kWikidata };

std::string_view scheme_name(IdScheme scheme) noexcept;

// Raised by every normalizer. Shape and checksum failures are distinct so
// callers can tell a typo from garbage.
class InvalidIdentifier : public Error {
 public:
  enum class Reason { kMalformed, kChecksum };

  InvalidIdentifier(IdScheme scheme, Reason reason, std::string raw, const std::string& detail);

  IdScheme scheme() const noexcept { return scheme_; }
  Reason reason() const noexcept { return reason_; }
  const std::string& raw() const noexcept { return raw_; }

 private:
  IdScheme scheme_;
  Reason reason_;
  std::string raw_;
};

// Strips doi.org URL and `doi:` prefixes, trims, lowercases; the result must
// be `10.` + 4-9 digits + `/` + a non-empty suffix.
std::string normalize_doi(std::string_view raw);

// Bare, hyphenated or orcid.org URL forms -> XXXX-XXXX-XXXX-XXXX, MOD 11-2 checked.
std::string validate_orcid(std::string_view raw);

// NNNN-NNNC or NNNNNNNC -> hyphenated uppercase, mod-11 weighted check.
std::string validate_issn(std::string_view raw);

// Bare or ror.org URL -> 9-char lowercase id, MOD 97-10 checked.
std::string validate_ror(std::string_view raw);

// Q<digits> or wikidata.org URL -> Q<digits> without leading zeros, value >= 1.
std::string validate_wikidata(std::string_view raw);

// Dispatches to the scheme's normalizer.
std::string normalize_identifier(IdScheme scheme, std::string_view raw);

namespace checksum {

// Check character for the first 15 ORCID digits ('0'-'9' or 'X').
char orcid_check(std::string_view fifteen_digits);
// Check character for the first 7 ISSN digits ('0'-'9' or 'X').
char issn_check(std::string_view seven_digits);
// Integer value of a Crockford base-32 string; throws InvalidIdentifier on bad chars.
std::uint64_t crockford_decode(std::string_view text);
// Two-digit MOD 97-10 checksum of a decoded ROR body.
unsigned ror_check(std::uint64_t body_value);

inline constexpr std::string_view kCrockfordAlphabet = "0123456789abcdefghjkmnpqrstvwxyz";

}  // namespace checksum

// ISSN -> ISSN-L grouping. Immutable after load; every ISSN-L maps to itself.
class IssnLinkingTable {
 public:
  struct Resolution {
    std::string issn_l;
    bool fallback = false;  // issn was absent; it forms a singleton group
  };

  IssnLinkingTable() = default;

  // Two-column CSV `ISSN,ISSN-L` with a header row. Throws ValidationError
  // naming the offending line.
  static IssnLinkingTable from_csv(std::istream& in);
  static IssnLinkingTable from_csv_file(const std::filesystem::path& path);
  // Builds from pairs, applying the same validation as the CSV loader.
  static IssnLinkingTable from_pairs(const std::map<std::string, std::string>& pairs);

  Resolution resolve(std::string_view issn) const;
  std::optional<std::string> lookup(std::string_view issn) const;
  const std::map<std::string, std::string, std::less<>>& entries() const noexcept {
    return entries_;
  }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

// Table entry when present, otherwise the ISSN itself.
std::string issn_l_of(std::string_view issn, const IssnLinkingTable& table);

}  // namespace openindex
