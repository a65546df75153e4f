#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "otjl/concepts.hpp"
#include "otjl/corpus.hpp"
#include "otjl/error.hpp"
#include "otjl/stm.hpp"
#include "otjl/text.hpp"

namespace otjl {

// ---------------------------------------------------------------------------
// Misunderstanding detection

class MisunderstandingDetector {
 public:
  MisunderstandingDetector() : MisunderstandingDetector(default_patterns()) {}
  explicit MisunderstandingDetector(std::vector<std::string> patterns) : sources_(std::move(patterns)) {
    for (const auto& p : sources_) {
      try {
        regexes_.emplace_back(p, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
      } catch (const std::regex_error& e) {
        throw ConfigError("bad misunderstanding pattern '" + p + "': " + e.what());
      }
    }
  }

  static std::vector<std::string> default_patterns() { return {".*wrong.*", ".*not what i.*", ".*misunderstood.*"}; }

  bool operator()(std::string_view utterance) const {
    const std::string text = join(tokenize(utterance));
    return std::any_of(regexes_.begin(), regexes_.end(),
                       [&](const std::regex& r) { return std::regex_match(text, r); });
  }
  bool operator()(const Tokens& tokens) const { return (*this)(join(tokens)); }

  const std::vector<std::string>& patterns() const { return sources_; }

 private:
  std::vector<std::string> sources_;
  std::vector<std::regex> regexes_;
};

// ---------------------------------------------------------------------------
// Rephrase comparison

using Stopwords = std::set<std::string, std::less<>>;

inline const Stopwords& default_stopwords() {
  static const Stopwords words = {
      "a", "about", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be", "because", "been", "but",
      "by", "can", "can't", "could", "did", "didn't", "do", "does", "doesn't", "don't", "each", "every", "for",
      "from", "had", "has", "have", "he", "hello", "her", "hers", "hey", "hi", "him", "his", "how", "i", "i'd",
      "i'll", "i'm", "i've", "if", "in", "into", "is", "isn't", "it", "it's", "its", "just", "let's", "like",
      "may", "me", "might", "mine", "must", "my", "myself", "need", "no", "not", "of", "off", "ok", "okay", "on",
      "onto", "or", "our", "ours", "out", "over", "please", "really", "shall", "she", "should", "so", "some",
      "than", "thank", "thanks", "that", "that's", "the", "their", "them", "then", "there's", "these", "they",
      "this", "those", "to", "too", "under", "up", "us", "very", "want", "was", "we", "we're", "well", "were",
      "what", "what's", "when", "where", "which", "while", "who", "whom", "whose", "why", "will", "with",
      "without", "won't", "would", "yeah", "yes", "you", "you're", "your", "yours",
  };
  return words;
}

struct Chunk {
  Span span;  // position in the initial query
  Tokens tokens;
  friend bool operator==(const Chunk&, const Chunk&) = default;
};

namespace detail {

// Maximal runs of content tokens; stopwords and punctuation split runs.
inline std::vector<Span> content_segments(const Tokens& tokens, const Stopwords& stopwords) {
  std::vector<Span> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    auto skip = [&](std::size_t k) { return is_punctuation(tokens[k]) || stopwords.contains(tokens[k]); };
    while (i < tokens.size() && skip(i)) ++i;
    std::size_t j = i;
    while (j < tokens.size() && !skip(j)) ++j;
    if (j > i) out.push_back({i, j});
    i = j;
  }
  return out;
}

inline bool occurs_in(const Tokens& hay, Span seg, const Tokens& needle, Span n) {
  if (n.size() > seg.size()) return false;
  for (std::size_t s = seg.begin; s + n.size() <= seg.end; ++s) {
    bool ok = true;
    for (std::size_t k = 0; k < n.size() && ok; ++k) ok = hay[s + k] == needle[n.begin + k];
    if (ok) return true;
  }
  return false;
}

}  // namespace detail

// Token runs of the initial query that also occur in the paraphrase, once
// stopwords are taken out of both. Runs never cross a stopword on either
// side. Scanning left to right, each chunk is the longest run starting at
// the current position; results are ordered by position in `initial`.
inline std::vector<Chunk> common_chunks(const Tokens& initial, const Tokens& paraphrase,
                                        const Stopwords& stopwords = default_stopwords()) {
  const auto mine = detail::content_segments(initial, stopwords);
  const auto theirs = detail::content_segments(paraphrase, stopwords);
  std::vector<Chunk> out;
  for (const Span& seg : mine) {
    std::size_t i = seg.begin;
    while (i < seg.end) {
      std::size_t best = 0;
      for (std::size_t len = seg.end - i; len > 0 && best == 0; --len) {
        const Span cand{i, i + len};
        for (const Span& t : theirs)
          if (detail::occurs_in(paraphrase, t, initial, cand)) {
            best = len;
            break;
          }
      }
      if (best == 0) {
        ++i;
        continue;
      }
      out.push_back({{i, i + best}, slice(initial, {i, i + best})});
      i += best;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labeling the initial query

enum class CorrectionOutcome { labeled, kb_miss, no_chunks, user_abandoned };

inline std::string_view name_of(CorrectionOutcome o) {
  switch (o) {
    case CorrectionOutcome::labeled: return "labeled";
    case CorrectionOutcome::kb_miss: return "kb_miss";
    case CorrectionOutcome::no_chunks: return "no_chunks";
    case CorrectionOutcome::user_abandoned: return "user_abandoned";
  }
  return "?";
}

struct KbCompletion {
  enum class Status { completed, unknown, already_visible };
  Status status = Status::unknown;
  std::optional<BaseType> type;
};

// Brings an entry the user referred to back into the KB, if the oracle
// lexicon knows it.
inline KbCompletion kb_complete(KnowledgeBase& kb, const std::string& surface, const LexiconOracle& oracle) {
  if (auto visible = kb.lookup(surface)) return {KbCompletion::Status::already_visible, visible};
  auto type = oracle.lookup(surface);
  if (!type) return {KbCompletion::Status::unknown, std::nullopt};
  kb.complete(surface, *type);
  return {KbCompletion::Status::completed, type};
}

struct NegationRule {
  std::vector<Tokens> cues = {{"without"}, {"no"}, {"don't"}, {"not"}, {"allergic", "to"}};
  std::size_t window = 3;

  // True when some cue lies entirely within the `window` tokens before `at`.
  bool negates(const Tokens& tokens, std::size_t at) const {
    const std::size_t lo = at > window ? at - window : 0;
    for (const auto& cue : cues) {
      for (std::size_t s = lo; s + cue.size() <= at; ++s)
        if (std::equal(cue.begin(), cue.end(), tokens.begin() + static_cast<std::ptrdiff_t>(s))) return true;
    }
    return false;
  }
};

struct CorrectionAttempt {
  Tokens initial;
  Tokens paraphrase;
  std::vector<Chunk> chunks;
  std::optional<TaggedUtterance> labeled;
  CorrectionOutcome outcome = CorrectionOutcome::no_chunks;
  std::vector<std::string> completed;   // surfaces brought back into the KB
  std::vector<std::string> unresolved;  // chunks neither KB nor oracle could type
};

inline CorrectionAttempt label_query(const Tokens& initial, const Tokens& paraphrase, std::vector<Chunk> chunks,
                                     KnowledgeBase& kb, const LexiconOracle& oracle,
                                     const NegationRule& negation = {}) {
  CorrectionAttempt a;
  a.initial = initial;
  a.paraphrase = paraphrase;
  a.chunks = std::move(chunks);
  if (a.chunks.empty()) {
    a.outcome = CorrectionOutcome::no_chunks;
    return a;
  }
  std::vector<Concept> concepts;
  for (const auto& c : a.chunks) {
    const std::string surface = join(c.tokens);
    auto type = kb.lookup(surface);
    if (!type) {
      const auto done = kb_complete(kb, surface, oracle);
      if (done.status == KbCompletion::Status::completed) a.completed.push_back(surface);
      type = kb.lookup(surface);
    }
    if (!type) {
      a.unresolved.push_back(surface);
      continue;
    }
    ConceptType t = positive(*type);
    if (negation.negates(initial, c.span.begin)) t = negated(t);
    concepts.push_back(make_concept(t, initial, c.span));
  }
  if (!a.unresolved.empty()) {
    a.outcome = CorrectionOutcome::kb_miss;
    return a;
  }
  a.labeled = TaggedUtterance::from_concepts(initial, concepts, Provenance::acquired);
  a.outcome = CorrectionOutcome::labeled;
  return a;
}

inline CorrectionAttempt label_query(const Tokens& initial, const Tokens& paraphrase, KnowledgeBase& kb,
                                     const LexiconOracle& oracle, const Stopwords& stopwords = default_stopwords(),
                                     const NegationRule& negation = {}) {
  return label_query(initial, paraphrase, common_chunks(initial, paraphrase, stopwords), kb, oracle, negation);
}

// ---------------------------------------------------------------------------
// Knowledge extraction

// Replaces every concept with its placeholder. Token-level normalization
// already happened at tokenization time.
inline Pattern extract_pattern(const TaggedUtterance& labeled) {
  const auto concepts = labeled.concepts();
  if (concepts.empty()) throw DataError("cannot extract a pattern from an utterance without concepts");
  Pattern p;
  p.split = Split::acquired;
  p.source_split = labeled.origin.pattern_split;
  std::size_t i = 0;
  for (const auto& c : concepts) {
    for (; i < c.span.begin; ++i) p.elements.emplace_back(labeled.tokens[i]);
    p.elements.emplace_back(Slot{c.type.base, c.type.polarity});
    i = c.span.end;
  }
  for (; i < labeled.tokens.size(); ++i) p.elements.emplace_back(labeled.tokens[i]);
  return p;
}

struct Counters {
  std::size_t mentions = 0;
  std::size_t patterns = 0;
  std::size_t examples = 0;
  friend bool operator==(const Counters&, const Counters&) = default;
};

struct AcquiredExample {
  TaggedUtterance utterance;
  std::size_t dialogue = 0;
};

// What the system has learned from interactions. `new_*` hold the elements
// gathered since the last adaptation; `history_*` hold everything usable for
// replay (the initial resources plus earlier acquisitions).
class KnowledgeStore {
 public:
  KnowledgeStore() = default;
  KnowledgeStore(std::vector<Pattern> initial_patterns, std::vector<Mention> initial_mentions)
      : history_patterns_(std::move(initial_patterns)), history_mentions_(std::move(initial_mentions)) {
    for (const auto& p : history_patterns_) known_patterns_.insert(p.text());
    for (const auto& m : history_mentions_) known_mentions_.insert(m.text());
  }

  bool knows_pattern(const std::string& text) const { return known_patterns_.contains(text); }
  bool knows_mention(const std::string& surface) const { return known_mentions_.contains(surface); }

  // Returns false when the element was already known.
  bool add_pattern(Pattern p, std::size_t dialogue) {
    if (!known_patterns_.insert(p.text()).second) return false;
    p.id = "a" + std::to_string(++acquired_patterns_);
    p.split = Split::acquired;
    new_patterns_.push_back(std::move(p));
    pattern_dialogue_.push_back(dialogue);
    return true;
  }
  bool add_mention(Mention m, std::size_t dialogue) {
    if (!known_mentions_.insert(m.text()).second) return false;
    m.id = "am" + std::to_string(++acquired_mentions_);
    m.split = Split::acquired;
    new_mentions_.push_back(std::move(m));
    mention_dialogue_.push_back(dialogue);
    return true;
  }
  void add_example(TaggedUtterance u, std::size_t dialogue) { new_examples_.push_back({std::move(u), dialogue}); }

  Counters counters() const { return {new_mentions_.size(), new_patterns_.size(), new_examples_.size()}; }

  // Moves everything new into the history and resets the counters.
  void commit() {
    history_patterns_.insert(history_patterns_.end(), std::make_move_iterator(new_patterns_.begin()),
                             std::make_move_iterator(new_patterns_.end()));
    history_mentions_.insert(history_mentions_.end(), std::make_move_iterator(new_mentions_.begin()),
                             std::make_move_iterator(new_mentions_.end()));
    new_patterns_.clear();
    new_mentions_.clear();
    new_examples_.clear();
    pattern_dialogue_.clear();
    mention_dialogue_.clear();
  }

  const std::vector<Pattern>& history_patterns() const { return history_patterns_; }
  const std::vector<Mention>& history_mentions() const { return history_mentions_; }
  const std::vector<Pattern>& new_patterns() const { return new_patterns_; }
  const std::vector<Mention>& new_mentions() const { return new_mentions_; }
  const std::vector<AcquiredExample>& new_examples() const { return new_examples_; }
  std::size_t acquired_pattern_total() const { return acquired_patterns_; }
  std::size_t acquired_mention_total() const { return acquired_mentions_; }

 private:
  std::vector<Pattern> history_patterns_;
  std::vector<Mention> history_mentions_;
  std::vector<Pattern> new_patterns_;
  std::vector<Mention> new_mentions_;
  std::vector<AcquiredExample> new_examples_;
  std::vector<std::size_t> pattern_dialogue_;
  std::vector<std::size_t> mention_dialogue_;
  std::set<std::string, std::less<>> known_patterns_;
  std::set<std::string, std::less<>> known_mentions_;
  std::size_t acquired_patterns_ = 0;
  std::size_t acquired_mentions_ = 0;
};

struct KnowledgeDelta {
  Counters counts;
  std::vector<std::string> mentions;  // surfaces newly learned
  std::optional<std::string> pattern; // text of a newly learned pattern
};

// Files a labeled query into the store: unseen mentions (also pushed into the
// STM), its pattern if unseen, otherwise the utterance itself as an example.
// `lexicon` only resolves where an acquired mention came from, for audits.
inline KnowledgeDelta record_knowledge(KnowledgeStore& store, ShortTermMemory& stm, const TaggedUtterance& labeled,
                                       std::size_t dialogue, const LexiconOracle* lexicon = nullptr) {
  KnowledgeDelta d;
  const auto concepts = labeled.concepts();
  for (const auto& c : concepts) {
    Mention m;
    m.surface = c.mention;
    m.type = c.type.base;
    m.source_split = Split::acquired;
    if (lexicon)
      if (const Mention* src = lexicon->find(c.text())) m.source_split = src->effective_split();
    const std::string surface = c.text();
    if (store.add_mention(std::move(m), dialogue)) {
      stm.add(surface, positive(c.type.base), dialogue);
      d.mentions.push_back(surface);
      ++d.counts.mentions;
    }
  }
  if (concepts.empty()) return d;
  Pattern p = extract_pattern(labeled);
  const std::string text = p.text();
  if (store.add_pattern(std::move(p), dialogue)) {
    d.pattern = text;
    ++d.counts.patterns;
  } else {
    store.add_example(labeled, dialogue);
    ++d.counts.examples;
  }
  return d;
}

}  // namespace otjl
