#include "openindex/concepts.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>

#include <nlohmann/json.hpp>

#include "openindex/identifiers.hpp"
#include "openindex/text.hpp"

namespace openindex {

namespace {

using Rule = ConceptTreeError::Rule;

Concept concept_from_line(const nlohmann::json& j, std::size_t line_no) {
  std::string where = "line " + std::to_string(line_no);
  try {
    Concept c{.id = parse_id(j.at("id").get<std::string>())};
    if (c.id.kind() != EntityKind::kConcept) {
      throw ConceptTreeError(Rule::kInvalidRecord, where, where + ": id is not a concept id");
    }
    c.wikidata = j.at("wikidata").get<std::string>();
    c.display_name = j.at("display_name").get<std::string>();
    c.level = j.at("level").get<int>();
    for (const auto& p : j.value("parents", nlohmann::json::array())) {
      c.parents.push_back(parse_id(p.get<std::string>()));
    }
    for (const auto& k : j.value("keywords", nlohmann::json::array())) {
      if (k.is_string()) {
        c.keywords.push_back(k.get<std::string>());
        c.keyword_weights.push_back(1.0);
      } else {
        c.keywords.push_back(k.at("token").get<std::string>());
        c.keyword_weights.push_back(k.value("weight", 1.0));
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConceptTreeError(Rule::kInvalidRecord, where, where + ": " + e.what());
  } catch (const IdParseError& e) {
    throw ConceptTreeError(Rule::kInvalidRecord, where, where + ": " + e.what());
  }
}

}  // namespace

ConceptTree ConceptTree::load(std::istream& in) {
  std::vector<Concept> concepts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConceptTreeError(Rule::kInvalidRecord, "line " + std::to_string(line_no),
                             "line " + std::to_string(line_no) + ": " + e.what());
    }
    concepts.push_back(concept_from_line(j, line_no));
  }
  return from_concepts(std::move(concepts));
}

ConceptTree ConceptTree::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open concept tree " + path.string());
  return load(in);
}

ConceptTree ConceptTree::from_concepts(std::vector<Concept> concepts) {
  ConceptTree tree;
  std::map<std::string, OpenAlexId> by_wikidata;
  for (auto& c : concepts) {
    std::string ref = c.id.short_form();
    try {
      c.wikidata = validate_wikidata(c.wikidata);
    } catch (const InvalidIdentifier& e) {
      throw ConceptTreeError(Rule::kInvalidRecord, ref, ref + ": " + e.what());
    }
    if (auto [it, inserted] = by_wikidata.emplace(c.wikidata, c.id); !inserted) {
      throw ConceptTreeError(Rule::kDuplicateWikidata, ref,
                             ref + ": wikidata " + c.wikidata + " already used by " +
                                 it->second.short_form());
    }
    for (std::size_t i = 0; i < c.keywords.size(); ++i) {
      std::string token = text::alnum_normalize(c.keywords[i]);
      if (token.empty() || token.find(' ') != std::string::npos) {
        throw ConceptTreeError(Rule::kInvalidRecord, ref,
                               ref + ": keyword '" + c.keywords[i] + "' is not a single token");
      }
      c.keywords[i] = token;
    }
    std::string id_text = c.id.short_form();
    if (!tree.concepts_.emplace(c.id, std::move(c)).second) {
      throw ConceptTreeError(Rule::kDuplicateId, id_text, id_text + ": duplicate concept id");
    }
  }

  for (const auto& [id, c] : tree.concepts_) {
    for (const auto& p : c.parents) {
      if (!tree.concepts_.contains(p)) {
        throw ConceptTreeError(Rule::kDanglingParent, id.short_form(),
                               id.short_form() + ": parent " + p.short_form() + " does not exist");
      }
    }
  }

  // Cycle detection: iterative three-colour DFS over parent edges.
  std::map<OpenAlexId, int> colour;  // 0 white, 1 grey, 2 black
  for (const auto& [start, unused] : tree.concepts_) {
    if (colour[start] != 0) continue;
    std::vector<std::pair<OpenAlexId, std::size_t>> stack{{start, 0}};
    colour[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& parents = tree.concepts_.at(node).parents;
      if (next < parents.size()) {
        OpenAlexId parent = parents[next++];
        if (colour[parent] == 1) {
          throw ConceptTreeError(Rule::kCycle, parent.short_form(),
                                 parent.short_form() + ": parent cycle through " + node.short_form());
        }
        if (colour[parent] == 0) {
          colour[parent] = 1;
          stack.emplace_back(parent, 0);
        }
      } else {
        colour[node] = 2;
        stack.pop_back();
      }
    }
  }

  for (const auto& [id, c] : tree.concepts_) {
    std::string ref = id.short_form();
    if (c.level < 0 || c.level > 5) {
      throw ConceptTreeError(Rule::kLevel, ref, ref + ": level " + std::to_string(c.level) + " outside [0,5]");
    }
    if ((c.level == 0) != c.parents.empty()) {
      throw ConceptTreeError(Rule::kLevel, ref, ref + ": level 0 iff no parents");
    }
    bool has_direct_parent = c.level == 0;
    for (const auto& p : c.parents) {
      int parent_level = tree.concepts_.at(p).level;
      if (parent_level >= c.level) {
        throw ConceptTreeError(Rule::kLevel, ref, ref + ": parent " + p.short_form() + " is not shallower");
      }
      if (parent_level == c.level - 1) has_direct_parent = true;
    }
    if (!has_direct_parent) {
      throw ConceptTreeError(Rule::kLevel, ref,
                             ref + ": no parent at level " + std::to_string(c.level - 1));
    }
    if (auto problems = validate(c); !problems.empty()) {
      throw ConceptTreeError(Rule::kInvalidRecord, ref, ref + ": " + problems.front());
    }
    if (c.level == 0) tree.roots_.push_back(id);
    tree.max_level_ = std::max(tree.max_level_, c.level);
    for (std::size_t i = 0; i < c.keywords.size(); ++i) {
      tree.lexicon_[c.keywords[i]].push_back({id, c.keyword_weights[i]});
    }
  }

  for (const auto& [id, c] : tree.concepts_) {
    std::set<OpenAlexId> seen;
    std::vector<OpenAlexId> frontier = c.parents;
    while (!frontier.empty()) {
      OpenAlexId next = frontier.back();
      frontier.pop_back();
      if (!seen.insert(next).second) continue;
      const auto& grand = tree.concepts_.at(next).parents;
      frontier.insert(frontier.end(), grand.begin(), grand.end());
    }
    tree.ancestors_[id] = std::vector<OpenAlexId>(seen.begin(), seen.end());
  }
  return tree;
}

const Concept* ConceptTree::find(const OpenAlexId& id) const {
  auto it = concepts_.find(id);
  return it == concepts_.end() ? nullptr : &it->second;
}

const std::vector<OpenAlexId>& ConceptTree::ancestors(const OpenAlexId& id) const {
  static const std::vector<OpenAlexId> kNone;
  auto it = ancestors_.find(id);
  return it == ancestors_.end() ? kNone : it->second;
}

std::vector<ConceptAssignment> tag_work(std::optional<std::string_view> title,
                                        std::optional<std::string_view> abstract,
                                        const ConceptTree& tree, const TaggerOptions& options) {
  std::map<std::string, double> occurrences;
  if (title) {
    for (auto& t : text::alnum_tokens(*title)) occurrences[t] += options.title_weight;
  }
  if (abstract) {
    for (auto& t : text::alnum_tokens(*abstract)) occurrences[t] += 1.0;
  }

  std::map<OpenAlexId, double> raw;
  for (const auto& [token, count] : occurrences) {
    auto it = tree.lexicon().find(token);
    if (it == tree.lexicon().end()) continue;
    for (const auto& entry : it->second) raw[entry.concept_id] += entry.weight * count;
  }
  double max_raw = 0.0;
  for (const auto& [id, score] : raw) max_raw = std::max(max_raw, score);
  if (max_raw <= 0.0) return {};

  std::map<OpenAlexId, double> direct;
  for (const auto& [id, score] : raw) {
    double normalized = score / max_raw;
    if (normalized >= options.sigma) direct[id] = normalized;
  }
  std::map<OpenAlexId, double> inherited;
  for (const auto& [id, score] : direct) {
    for (const auto& ancestor : tree.ancestors(id)) {
      double& slot = inherited[ancestor];
      slot = std::max(slot, options.decay * score);
    }
  }

  std::vector<ConceptAssignment> out;
  for (const auto& [id, score] : direct) {
    auto it = inherited.find(id);
    if (it != inherited.end() && it->second > score) continue;
    out.push_back({id, score, false});
  }
  for (const auto& [id, score] : inherited) {
    auto it = direct.find(id);
    if (it != direct.end() && it->second >= score) continue;
    out.push_back({id, score, true});
  }
  std::sort(out.begin(), out.end(), [](const ConceptAssignment& a, const ConceptAssignment& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return out;
}

}  // namespace openindex
