#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "openindex/date.hpp"
#include "openindex/errors.hpp"
#include "openindex/stub.hpp"

namespace openindex {

// Crossref `type` -> work type.
WorkType crossref_work_type(std::string_view type);

// License URL -> short token ("cc-by", "cc0", ...); nullopt when unknown.
std::optional<std::string> license_token(std::string_view url);

// One Crossref-style message item (a {"message": {...}} envelope is unwrapped).
// `source` is kCrossref or kRepository; `retrieved` is used when the record
// carries no `indexed` date. Throws RecordRejected when the record is not an
// object or has neither DOI nor title.
WorkStub parse_crossref(const nlohmann::json& record, SourceClass source, Date retrieved);

// Same, from one JSON Lines line. Unparseable JSON is rejected.
WorkStub parse_crossref_line(std::string_view line, SourceClass source, Date retrieved);

// One <PubmedArticle> element. Throws RecordRejected on malformed XML or a
// missing PMID.
WorkStub parse_pubmed(std::string_view article_xml, Date retrieved);

// Cuts a PubmedArticleSet document into its <PubmedArticle> elements.
// An unterminated trailing element is returned as-is so parsing rejects it.
std::vector<std::string> split_pubmed_articles(std::string_view document);

}  // namespace openindex
