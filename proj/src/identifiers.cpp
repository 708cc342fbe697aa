#include "openindex/identifiers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <vector>

namespace openindex {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

char ascii_lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool strip_prefix_ci(std::string_view& s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (ascii_lower(s[i]) != ascii_lower(prefix[i])) return false;
  }
  s.remove_prefix(prefix.size());
  return true;
}

bool strip_any_prefix_ci(std::string_view& s, std::initializer_list<std::string_view> prefixes) {
  for (auto prefix : prefixes) {
    if (strip_prefix_ci(s, prefix)) return true;
  }
  return false;
}

[[noreturn]] void malformed(IdScheme scheme, std::string_view raw, const std::string& detail) {
  throw InvalidIdentifier(scheme, InvalidIdentifier::Reason::kMalformed, std::string(raw), detail);
}

[[noreturn]] void bad_checksum(IdScheme scheme, std::string_view raw, const std::string& detail) {
  throw InvalidIdentifier(scheme, InvalidIdentifier::Reason::kChecksum, std::string(raw), detail);
}

}  // namespace

std::string_view scheme_name(IdScheme scheme) noexcept {
  switch (scheme) {
    case IdScheme::kDoi:
      return "doi";
    case IdScheme::kOrcid:
      return "orcid";
    case IdScheme::kIssn:
      return "issn";
    case IdScheme::kRor:
      return "ror";
    case IdScheme::kWikidata:
      return "wikidata";
  }
  return "unknown";
}

InvalidIdentifier::InvalidIdentifier(IdScheme scheme, Reason reason, std::string raw,
                                     const std::string& detail)
    : Error("invalid " + std::string(scheme_name(scheme)) + " '" + raw + "': " + detail),
      scheme_(scheme),
      reason_(reason),
      raw_(std::move(raw)) {}

namespace checksum {

char orcid_check(std::string_view fifteen_digits) {
  unsigned total = 0;
  for (char c : fifteen_digits) {
    total = (total + static_cast<unsigned>(c - '0')) * 2;
  }
  unsigned result = (12 - total % 11) % 11;
  return result == 10 ? 'X' : static_cast<char>('0' + result);
}

char issn_check(std::string_view seven_digits) {
  unsigned sum = 0;
  unsigned weight = 8;
  for (char c : seven_digits) {
    sum += weight-- * static_cast<unsigned>(c - '0');
  }
  unsigned check = (11 - sum % 11) % 11;
  return check == 10 ? 'X' : static_cast<char>('0' + check);
}

std::uint64_t crockford_decode(std::string_view text) {
  std::uint64_t value = 0;
  for (char c : text) {
    auto pos = kCrockfordAlphabet.find(ascii_lower(c));
    if (pos == std::string_view::npos) {
      malformed(IdScheme::kRor, text, std::string("character '") + c + "' outside Crockford base-32");
    }
    value = value * 32 + pos;
  }
  return value;
}

unsigned ror_check(std::uint64_t body_value) {
  return static_cast<unsigned>(98 - (body_value * 100) % 97);
}

}  // namespace checksum

std::string normalize_doi(std::string_view raw) {
  std::string_view s = trim(raw);
  strip_any_prefix_ci(s, {"https://doi.org/", "http://doi.org/", "https://dx.doi.org/",
                          "http://dx.doi.org/", "doi:"});
  s = trim(s);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);

  if (out.size() < 3 || out.compare(0, 3, "10.") != 0) {
    malformed(IdScheme::kDoi, raw, "must start with '10.'");
  }
  std::size_t slash = out.find('/', 3);
  if (slash == std::string::npos) malformed(IdScheme::kDoi, raw, "missing '/' after registrant");
  std::size_t registrant_len = slash - 3;
  if (registrant_len < 4 || registrant_len > 9 ||
      !std::all_of(out.begin() + 3, out.begin() + static_cast<std::ptrdiff_t>(slash), is_digit)) {
    malformed(IdScheme::kDoi, raw, "registrant must be 4-9 digits");
  }
  if (slash + 1 >= out.size()) malformed(IdScheme::kDoi, raw, "empty suffix");
  return out;
}

std::string validate_orcid(std::string_view raw) {
  std::string_view s = trim(raw);
  strip_any_prefix_ci(s, {"https://orcid.org/", "http://orcid.org/"});
  std::string digits;
  if (s.size() == 19) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i == 4 || i == 9 || i == 14) {
        if (s[i] != '-') malformed(IdScheme::kOrcid, raw, "hyphens expected after each 4 characters");
      } else {
        digits.push_back(s[i]);
      }
    }
  } else if (s.size() == 16) {
    digits.assign(s);
  } else {
    malformed(IdScheme::kOrcid, raw, "expected 16 characters");
  }
  if (!std::all_of(digits.begin(), digits.end() - 1, is_digit)) {
    malformed(IdScheme::kOrcid, raw, "first 15 characters must be digits");
  }
  char& last = digits.back();
  if (last == 'x') last = 'X';
  if (!is_digit(last) && last != 'X') malformed(IdScheme::kOrcid, raw, "bad check character");

  if (checksum::orcid_check(std::string_view(digits).substr(0, 15)) != last) {
    bad_checksum(IdScheme::kOrcid, raw, "MOD 11-2 check digit mismatch");
  }
  return digits.substr(0, 4) + '-' + digits.substr(4, 4) + '-' + digits.substr(8, 4) + '-' +
         digits.substr(12, 4);
}

std::string validate_issn(std::string_view raw) {
  std::string_view s = trim(raw);
  std::string digits;
  if (s.size() == 9 && s[4] == '-') {
    digits = std::string(s.substr(0, 4)) + std::string(s.substr(5));
  } else if (s.size() == 8) {
    digits.assign(s);
  } else {
    malformed(IdScheme::kIssn, raw, "expected NNNN-NNNC or NNNNNNNC");
  }
  if (!std::all_of(digits.begin(), digits.end() - 1, is_digit)) {
    malformed(IdScheme::kIssn, raw, "first 7 characters must be digits");
  }
  char& last = digits.back();
  if (last == 'x') last = 'X';
  if (!is_digit(last) && last != 'X') malformed(IdScheme::kIssn, raw, "bad check character");
  if (checksum::issn_check(std::string_view(digits).substr(0, 7)) != last) {
    bad_checksum(IdScheme::kIssn, raw, "check character mismatch");
  }
  return digits.substr(0, 4) + '-' + digits.substr(4);
}

std::string validate_ror(std::string_view raw) {
  std::string_view s = trim(raw);
  strip_any_prefix_ci(s, {"https://ror.org/", "http://ror.org/"});
  if (!s.empty() && s.back() == '/') s.remove_suffix(1);
  std::string id(s);
  std::transform(id.begin(), id.end(), id.begin(), ascii_lower);
  if (id.size() != 9) malformed(IdScheme::kRor, raw, "expected 9 characters");
  if (id[0] != '0') malformed(IdScheme::kRor, raw, "must start with '0'");
  for (std::size_t i = 1; i < 7; ++i) {
    if (checksum::kCrockfordAlphabet.find(id[i]) == std::string_view::npos) {
      malformed(IdScheme::kRor, raw, "body must use Crockford base-32 (no i, l, o, u)");
    }
  }
  if (!is_digit(id[7]) || !is_digit(id[8])) {
    malformed(IdScheme::kRor, raw, "checksum must be two decimal digits");
  }
  unsigned expected = checksum::ror_check(checksum::crockford_decode(std::string_view(id).substr(0, 7)));
  unsigned actual = static_cast<unsigned>((id[7] - '0') * 10 + (id[8] - '0'));
  if (expected != actual) bad_checksum(IdScheme::kRor, raw, "MOD 97-10 checksum mismatch");
  return id;
}

std::string validate_wikidata(std::string_view raw) {
  std::string_view s = trim(raw);
  strip_any_prefix_ci(s, {"https://www.wikidata.org/wiki/", "http://www.wikidata.org/wiki/"});
  if (s.size() < 2 || (s[0] != 'Q' && s[0] != 'q')) {
    malformed(IdScheme::kWikidata, raw, "expected Q followed by digits");
  }
  std::string_view digits = s.substr(1);
  if (!std::all_of(digits.begin(), digits.end(), is_digit)) {
    malformed(IdScheme::kWikidata, raw, "expected Q followed by digits");
  }
  while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
  if (digits == "0") malformed(IdScheme::kWikidata, raw, "value must be >= 1");
  if (digits.size() > 18) malformed(IdScheme::kWikidata, raw, "value too large");
  return "Q" + std::string(digits);
}

std::string normalize_identifier(IdScheme scheme, std::string_view raw) {
  switch (scheme) {
    case IdScheme::kDoi:
      return normalize_doi(raw);
    case IdScheme::kOrcid:
      return validate_orcid(raw);
    case IdScheme::kIssn:
      return validate_issn(raw);
    case IdScheme::kRor:
      return validate_ror(raw);
    case IdScheme::kWikidata:
      return validate_wikidata(raw);
  }
  malformed(scheme, raw, "unknown scheme");
}

IssnLinkingTable IssnLinkingTable::from_pairs(const std::map<std::string, std::string>& pairs) {
  IssnLinkingTable table;
  for (const auto& [issn, linking] : pairs) {
    table.entries_.insert_or_assign(validate_issn(issn), validate_issn(linking));
  }
  std::vector<std::string> heads;
  for (const auto& [issn, linking] : table.entries_) heads.push_back(linking);
  for (const auto& head : heads) {
    auto [it, inserted] = table.entries_.try_emplace(head, head);
    if (!inserted && it->second != head) {
      throw ValidationError("ISSN-L " + head + " itself maps to " + it->second +
                            " (linking table must be idempotent)");
    }
  }
  return table;
}

IssnLinkingTable IssnLinkingTable::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("ISSN linking table: missing header row");
  std::string_view header = trim(line);
  if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF) header.remove_prefix(3);
  std::string lowered(header);
  lowered.erase(std::remove(lowered.begin(), lowered.end(), ' '), lowered.end());
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), ascii_lower);
  if (lowered != "issn,issn-l") {
    throw ValidationError("ISSN linking table: header must be 'ISSN,ISSN-L'");
  }
  std::map<std::string, std::string> pairs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = trim(line);
    if (row.empty()) continue;
    auto comma = row.find(',');
    if (comma == std::string_view::npos) {
      throw ValidationError("ISSN linking table line " + std::to_string(line_no) +
                            ": expected two columns");
    }
    try {
      pairs.insert_or_assign(validate_issn(row.substr(0, comma)), validate_issn(row.substr(comma + 1)));
    } catch (const InvalidIdentifier& e) {
      throw ValidationError("ISSN linking table line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return from_pairs(pairs);
}

IssnLinkingTable IssnLinkingTable::from_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open ISSN linking table " + path.string());
  return from_csv(in);
}

std::optional<std::string> IssnLinkingTable::lookup(std::string_view issn) const {
  auto it = entries_.find(issn);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

IssnLinkingTable::Resolution IssnLinkingTable::resolve(std::string_view issn) const {
  if (auto hit = lookup(issn)) return {*hit, false};
  return {std::string(issn), true};
}

std::string issn_l_of(std::string_view issn, const IssnLinkingTable& table) {
  return table.resolve(issn).issn_l;
}

}  // namespace openindex
