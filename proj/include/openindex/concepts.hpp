#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "openindex/entities.hpp"
#include "openindex/errors.hpp"

namespace openindex {

class ConceptTreeError : public ValidationError {
 public:
  enum class Rule { kCycle, kLevel, kDuplicateWikidata, kDanglingParent, kDuplicateId, kInvalidRecord };

  ConceptTreeError(Rule rule, std::string concept_ref, const std::string& message)
      : ValidationError(message), rule_(rule), concept_(std::move(concept_ref)) {}

  Rule rule() const noexcept { return rule_; }
  // The offending concept (short id or line reference).
  const std::string& concept_ref() const noexcept { return concept_; }

 private:
  Rule rule_;
  std::string concept_;
};

struct LexiconEntry {
  OpenAlexId concept_id;
  double weight = 1.0;
};

// Validated, immutable concept hierarchy plus the keyword lexicon.
class ConceptTree {
 public:
  ConceptTree() = default;

  // JSON Lines, one concept per line:
  //   {id, wikidata, display_name, level, parents[], keywords[]}
  // where a keyword is a token string or {"token": ..., "weight": ...}.
  static ConceptTree load(std::istream& in);
  static ConceptTree load_file(const std::filesystem::path& path);
  // Validates a concept set; throws ConceptTreeError naming the concept and rule.
  static ConceptTree from_concepts(std::vector<Concept> concepts);

  const std::map<OpenAlexId, Concept>& concepts() const noexcept { return concepts_; }
  const std::vector<OpenAlexId>& roots() const noexcept { return roots_; }
  const std::unordered_map<std::string, std::vector<LexiconEntry>>& lexicon() const noexcept {
    return lexicon_;
  }
  const Concept* find(const OpenAlexId& id) const;
  // Every transitive parent, ascending serial.
  const std::vector<OpenAlexId>& ancestors(const OpenAlexId& id) const;
  int max_level() const noexcept { return max_level_; }
  bool empty() const noexcept { return concepts_.empty(); }

 private:
  std::map<OpenAlexId, Concept> concepts_;
  std::vector<OpenAlexId> roots_;
  std::unordered_map<std::string, std::vector<LexiconEntry>> lexicon_;
  std::map<OpenAlexId, std::vector<OpenAlexId>> ancestors_;
  int max_level_ = 0;
};

struct TaggerOptions {
  double sigma = 0.3;         // minimum normalized score for a direct tag
  double decay = 0.5;         // ancestor score = decay * best descendant score
  double title_weight = 2.0;  // title token occurrences count this many times
};

// Lexicon scorer with ancestor closure. Sorted by score descending, then
// concept serial ascending.
std::vector<ConceptAssignment> tag_work(std::optional<std::string_view> title,
                                        std::optional<std::string_view> abstract,
                                        const ConceptTree& tree, const TaggerOptions& options = {});

struct CoverageReport {
  std::size_t works = 0;
  std::size_t tagged = 0;
  double fraction = 0.0;  // 0.0 when there are no works
  std::map<WorkType, std::pair<std::size_t, std::size_t>> per_type;  // (tagged, works)

  bool no_works() const noexcept { return works == 0; }
};

// Fraction of works with at least one concept, overall and per work type.
template <typename WorkRange>
CoverageReport coverage_report(const WorkRange& works) {
  CoverageReport report;
  for (const Work& w : works) {
    ++report.works;
    auto& [tagged, total] = report.per_type[w.work_type];
    ++total;
    if (!w.concepts.empty()) {
      ++report.tagged;
      ++tagged;
    }
  }
  if (report.works > 0) {
    report.fraction = static_cast<double>(report.tagged) / static_cast<double>(report.works);
  }
  return report;
}

}  // namespace openindex
