#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "otjl/concepts.hpp"
#include "otjl/corpus.hpp"
#include "otjl/error.hpp"
#include "otjl/surface_match.hpp"

namespace otjl {

// Newly learned mentions applied on top of model output until the next
// adaptation.
class ShortTermMemory {
 public:
  struct Entry {
    BaseType type;
    std::size_t added_at = 0;  // dialogue index
  };

  void add(const std::string& surface, ConceptType type, std::size_t dialogue_index) {
    if (type.is_negative()) throw ContractViolation("STM entries must carry a positive type");
    if (surface.empty()) throw ContractViolation("STM entries must have a surface");
    entries_[surface] = Entry{type.base, dialogue_index};
    max_len_ = std::max(max_len_, split(surface, ' ').size());
    ++revision_;
  }
  void add(const Tokens& surface, ConceptType type, std::size_t dialogue_index) {
    add(join(surface), type, dialogue_index);
  }

  std::vector<Concept> lookup(const Tokens& tokens) const {
    std::vector<Concept> out;
    if (entries_.empty()) return out;
    auto matches = longest_matches<BaseType>(tokens, max_len_, [this](const std::string& key) {
      auto it = entries_.find(key);
      return it == entries_.end() ? std::nullopt : std::optional<BaseType>(it->second.type);
    });
    for (const auto& m : matches) out.push_back(make_concept(positive(m.value), tokens, m.span));
    return out;
  }

  void clear() {
    if (entries_.empty()) return;
    entries_.clear();
    max_len_ = 0;
    ++revision_;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::uint64_t revision() const { return revision_; }

 private:
  std::map<std::string, Entry> entries_;
  std::size_t max_len_ = 0;
  std::uint64_t revision_ = 0;
};

// Combines model concepts with STM matches over the same tokens.
//
// Mentions are compared as token spans: "equal" means the same span and
// "a in b" means b's span contains a's. For each model concept, every STM
// concept is tried in order:
//   same span, same type       -> model concept
//   same span, model negative  -> STM mention with the negated STM type
//   model span inside STM span -> STM concept
//   STM span inside model span -> model concept if its mention is in the KB,
//                                 otherwise the STM concept
// and a model concept that produced nothing is kept. STM concepts that touch
// no model concept are appended, and the result keeps the first concept for
// each span.
inline std::vector<Concept> merge(const std::vector<Concept>& model, const std::vector<Concept>& stm,
                                  const KnowledgeBase& kb) {
  if (stm.empty()) return model;
  std::vector<Concept> out;
  for (const auto& cm : model) {
    const std::size_t before = out.size();
    for (const auto& cs : stm) {
      if (cm.span == cs.span && cm.type == cs.type) {
        out.push_back(cm);
      } else if (cm.span == cs.span && cm.type.is_negative()) {
        out.push_back({negated(cs.type), cs.mention, cs.span});
      } else if (cs.span.contains(cm.span)) {
        out.push_back(cs);
      } else if (cm.span.contains(cs.span)) {
        out.push_back(kb.contains(cm.mention) ? cm : cs);
      }
    }
    if (out.size() == before) out.push_back(cm);
  }
  for (const auto& cs : stm) {
    const bool touches = std::any_of(model.begin(), model.end(), [&](const Concept& cm) {
      return cm.span.overlaps(cs.span);
    });
    if (!touches) out.push_back(cs);
  }
  std::vector<Concept> unique;
  for (auto& c : out) {
    const bool seen = std::any_of(unique.begin(), unique.end(), [&](const Concept& u) { return u.span == c.span; });
    if (!seen) unique.push_back(std::move(c));
  }
  std::stable_sort(unique.begin(), unique.end(),
                   [](const Concept& a, const Concept& b) { return a.span.begin < b.span.begin; });
  return unique;
}

}  // namespace otjl
