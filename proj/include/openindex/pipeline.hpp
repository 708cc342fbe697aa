#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "openindex/codec.hpp"
#include "openindex/concepts.hpp"
#include "openindex/disambiguation.hpp"
#include "openindex/identifiers.hpp"
#include "openindex/store.hpp"
#include "openindex/stub.hpp"

namespace openindex {

struct PipelineConfig {
  double theta = 0.5;  // author match threshold
  double tau = 0.7;    // institution stage-2 threshold
  AuthorWeights author_weights;
  TaggerOptions tagger;
  IssnLinkingTable issn_table;
};

enum class IngestOutcome { kCreated, kUpdated, kMerged, kRejected };

template <>
struct EnumNames<IngestOutcome> {
  static constexpr std::array<std::pair<IngestOutcome, std::string_view>, 4> table{{
      {IngestOutcome::kCreated, "created"},
      {IngestOutcome::kUpdated, "updated"},
      {IngestOutcome::kMerged, "merged"},
      {IngestOutcome::kRejected, "rejected"},
  }};
};

struct IngestReport {
  std::string source_record_id;
  IngestOutcome outcome = IngestOutcome::kRejected;
  std::optional<OpenAlexId> work_id;
  std::vector<std::string> warnings;
};

// {source_record_id, outcome, work_id, warnings}
Json report_json(const IngestReport& report);

// Runs the per-record resolution pipeline against one store: venue, authors,
// institutions, work upsert / merge, VoR selection, concept tagging and
// reference resolution, committed atomically per record.
class Ingestor {
 public:
  Ingestor(GraphStore& store, PipelineConfig config = {});

  // Serialized through the store's writer gate. Validation and CEID
  // conflicts yield a rejected report; store I/O errors propagate.
  IngestReport ingest(const WorkStub& stub);

  // Rebuilds the concept tree and institution registry from the store.
  void refresh();

  const ConceptTree& tree() const noexcept { return tree_; }
  const InstitutionRegistry& registry() const noexcept { return registry_; }

 private:
  IngestReport ingest_locked(const WorkStub& stub);
  const std::optional<std::string>& name_key(const std::string& raw);
  std::vector<AuthorSignature> candidates(const std::string& key, const std::optional<std::string>& orcid,
                                          const std::set<OpenAlexId>& exclude);

  GraphStore& store_;
  PipelineConfig config_;
  ConceptTree tree_;
  InstitutionRegistry registry_;
  std::unordered_map<std::string, std::optional<std::string>> name_keys_;
};

// Loads a concept tree into the store (existing records are updated).
std::size_t seed_concepts(GraphStore& store, const ConceptTree& tree);

// Institution registry, JSON Lines: {id?, ror?, display_name, aliases?, country_code?}.
// Records whose ROR is already stored are skipped; missing ids are minted.
std::size_t seed_institutions(GraphStore& store, const std::filesystem::path& jsonl);

}  // namespace openindex
