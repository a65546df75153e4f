#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "otjl/concepts.hpp"
#include "otjl/error.hpp"
#include "otjl/rng.hpp"
#include "otjl/text.hpp"

namespace otjl {

// ---------------------------------------------------------------------------
// Patterns

struct Slot {
  BaseType base;
  Polarity polarity = Polarity::positive;

  ConceptType type() const { return {base, polarity}; }
  friend bool operator==(const Slot&, const Slot&) = default;
};

// A fixed mention baked into a template, e.g. `{event:birthday}`.
struct Literal {
  Tokens surface;
  ConceptType type;
  friend bool operator==(const Literal&, const Literal&) = default;
};

using PatternElement = std::variant<Token, Slot, Literal>;

struct Pattern {
  std::string id;
  std::vector<PatternElement> elements;
  Split split = Split::initial;
  // For acquired patterns: the split of the utterance they were extracted from.
  Split source_split = Split::initial;

  std::vector<Slot> slots() const {
    std::vector<Slot> out;
    for (const auto& e : elements)
      if (const auto* s = std::get_if<Slot>(&e)) out.push_back(*s);
    return out;
  }

  bool has_slot(BaseType b) const {
    return std::any_of(elements.begin(), elements.end(), [b](const auto& e) {
      const auto* s = std::get_if<Slot>(&e);
      return s && s->base == b;
    });
  }

  // Normalized template. Literals print as placeholders so a pattern and the
  // pattern extracted back from one of its renderings compare equal.
  std::string text() const {
    std::vector<std::string> parts;
    for (const auto& e : elements) {
      if (const auto* w = std::get_if<Token>(&e)) {
        parts.push_back(*w);
      } else if (const auto* s = std::get_if<Slot>(&e)) {
        parts.push_back("$" + s->type().name());
      } else {
        parts.push_back("$" + std::get<Literal>(e).type.name());
      }
    }
    return join(parts);
  }

  Split effective_split() const { return split == Split::acquired ? source_split : split; }
};

namespace detail {

inline constexpr char kLiteralMarker = '\x01';

}  // namespace detail

// Parses a template such as "i don't like $negative_ingredient , any ideas ?".
// `$<type>` is a slot (a `negative_` prefix marks negated context) and
// `{<type>:<words>}` is a fixed literal mention.
inline Pattern parse_pattern(std::string id, std::string_view text, Split split = Split::initial) {
  std::vector<Literal> literals;
  std::string flat;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') {
      flat += text[i];
      continue;
    }
    const std::size_t close = text.find('}', i);
    if (close == std::string_view::npos)
      throw ConfigError("pattern " + id + ": unterminated literal");
    std::string_view body = text.substr(i + 1, close - i - 1);
    const std::size_t colon = body.find(':');
    if (colon == std::string_view::npos)
      throw ConfigError("pattern " + id + ": literal without type");
    auto type = ConceptType::parse(trim(body.substr(0, colon)));
    if (!type) throw ConfigError("pattern " + id + ": unknown literal type");
    Tokens surface = tokenize(body.substr(colon + 1));
    if (surface.empty()) throw ConfigError("pattern " + id + ": empty literal");
    flat += ' ';
    flat += detail::kLiteralMarker;
    flat += std::to_string(literals.size());
    flat += ' ';
    literals.push_back({std::move(surface), *type});
    i = close;
  }

  Pattern p;
  p.id = std::move(id);
  p.split = split;
  p.source_split = split;
  for (auto& tok : tokenize(flat)) {
    if (tok.size() > 1 && tok[0] == '$') {
      auto type = ConceptType::parse(std::string_view(tok).substr(1));
      if (!type) throw ConfigError("pattern " + p.id + ": unknown placeholder " + tok);
      p.elements.emplace_back(Slot{type->base, type->polarity});
    } else if (!tok.empty() && tok[0] == detail::kLiteralMarker) {
      p.elements.emplace_back(literals.at(std::stoul(tok.substr(1))));
    } else {
      p.elements.emplace_back(std::move(tok));
    }
  }
  if (p.slots().empty()) throw ConfigError("pattern " + p.id + " has no slot placeholder");
  return p;
}

// ---------------------------------------------------------------------------
// Mentions and the lexicon

struct Mention {
  std::string id;
  Tokens surface;
  BaseType type = BaseType::ingredient;
  Split split = Split::initial;
  std::uint64_t frequency = 1;
  Split source_split = Split::initial;

  std::string text() const { return join(surface); }
  Split effective_split() const { return split == Split::acquired ? source_split : split; }
};

inline std::vector<Pattern> load_patterns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read pattern file " + path);
  std::vector<Pattern> out;
  std::set<std::string> ids;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) throw ConfigError(located(path, lineno, "expected id<TAB>template"));
    if (!ids.insert(cols[0]).second)
      throw ConfigError(located(path, lineno, "duplicate pattern id " + cols[0]));
    try {
      out.push_back(parse_pattern(cols[0], cols[1]));
    } catch (const ConfigError& e) {
      throw ConfigError(located(path, lineno, e.what()));
    }
  }
  if (out.empty()) throw ConfigError("no patterns in " + path);
  return out;
}

// Throws if a surface is listed twice or under two types: KB lookups must be
// unambiguous.
inline void check_unique_surfaces(std::span<const Mention> mentions) {
  std::unordered_map<std::string, BaseType> seen;
  for (const auto& m : mentions) {
    auto [it, inserted] = seen.emplace(m.text(), m.type);
    if (inserted) continue;
    if (it->second != m.type)
      throw ConfigError("ambiguous mention '" + m.text() + "' typed both " +
                        std::string(name_of(it->second)) + " and " + std::string(name_of(m.type)));
    throw ConfigError("duplicate mention '" + m.text() + "'");
  }
}

inline std::vector<Mention> load_mentions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read mention file " + path);
  std::vector<Mention> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3)
      throw ConfigError(located(path, lineno, "expected surface<TAB>type<TAB>frequency"));
    Mention m;
    m.surface = tokenize(cols[0]);
    if (m.surface.empty()) throw ConfigError(located(path, lineno, "empty surface"));
    auto type = parse_base_type(trim(cols[1]));
    if (!type) throw ConfigError(located(path, lineno, "unknown concept type " + cols[1]));
    m.type = *type;
    try {
      m.frequency = std::stoull(cols[2]);
    } catch (const std::exception&) {
      throw ConfigError(located(path, lineno, "bad frequency " + cols[2]));
    }
    m.id = "m" + std::to_string(out.size() + 1);
    auto [it, inserted] = seen.emplace(m.text(), out.size());
    if (!inserted) {
      const auto& prev = out[it->second];
      throw ConfigError(located(path, lineno,
                                prev.type == m.type ? "duplicate mention '" + m.text() + "'"
                                                    : "ambiguous mention '" + m.text() + "'"));
    }
    out.push_back(std::move(m));
  }
  if (out.empty()) throw ConfigError("no mentions in " + path);
  return out;
}

// Pronounceable pseudo-words for inventories larger than the bundled lexicon.
// Generated surfaces never collide with `existing`.
inline std::vector<Mention> synthesize_mentions(std::span<const std::size_t, kBaseTypeCount> counts,
                                                std::uint64_t seed,
                                                std::span<const Mention> existing = {}) {
  static constexpr std::array<std::string_view, 20> onsets = {
      "b", "k", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr", "gl", "sk", "ch", "sh"};
  static constexpr std::array<std::string_view, 8> vowels = {"a", "e", "i", "o", "u", "ai", "ou", "ee"};
  Rng rng(derive_seed(seed, "synthetic-mentions"));
  std::set<std::string> taken;
  for (const auto& m : existing) taken.insert(m.text());
  std::vector<Mention> out;
  for (BaseType t : all_base_types()) {
    for (std::size_t k = 0; k < counts[static_cast<std::size_t>(t)]; ++k) {
      std::string word;
      do {
        word.clear();
        const std::size_t syllables = 2 + rng.index(2);
        for (std::size_t s = 0; s < syllables; ++s) {
          word += rng.pick(onsets);
          word += rng.pick(vowels);
        }
        if (rng.bernoulli(0.3)) word += rng.pick(onsets);
      } while (!taken.insert(word).second);
      Mention m;
      m.id = "s" + std::to_string(out.size() + 1);
      m.surface = {word};
      m.type = t;
      m.frequency = 1 + rng.index(100);
      out.push_back(std::move(m));
    }
  }
  return out;
}

// Deterministic subsample: `max_patterns` patterns, and `max_mentions`
// mentions allocated across types proportionally to the full inventory.
inline void subsample_resources(std::vector<Pattern>& patterns, std::vector<Mention>& mentions,
                                std::size_t max_patterns, std::size_t max_mentions,
                                std::uint64_t seed) {
  if (max_patterns > 0 && patterns.size() > max_patterns) {
    Rng rng(derive_seed(seed, "subsample-patterns"));
    std::vector<std::size_t> order(patterns.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order.begin(), order.end());
    order.resize(max_patterns);
    std::sort(order.begin(), order.end());
    std::vector<Pattern> kept;
    for (auto i : order) kept.push_back(std::move(patterns[i]));
    patterns = std::move(kept);
  }
  if (max_mentions > 0 && mentions.size() > max_mentions) {
    Rng rng(derive_seed(seed, "subsample-mentions"));
    std::array<std::vector<std::size_t>, kBaseTypeCount> by_type;
    for (std::size_t i = 0; i < mentions.size(); ++i)
      by_type[static_cast<std::size_t>(mentions[i].type)].push_back(i);
    std::vector<std::size_t> kept_idx;
    std::size_t assigned = 0;
    for (std::size_t t = 0; t < kBaseTypeCount; ++t) {
      auto& pool = by_type[t];
      std::size_t quota = t + 1 == kBaseTypeCount
                              ? max_mentions - assigned
                              : static_cast<std::size_t>(std::llround(
                                    static_cast<double>(max_mentions) * static_cast<double>(pool.size()) /
                                    static_cast<double>(mentions.size())));
      quota = std::min(quota, pool.size());
      assigned += quota;
      rng.shuffle(pool.begin(), pool.end());
      kept_idx.insert(kept_idx.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(quota));
    }
    std::sort(kept_idx.begin(), kept_idx.end());
    std::vector<Mention> kept;
    for (auto i : kept_idx) kept.push_back(std::move(mentions[i]));
    mentions = std::move(kept);
  }
}

// ---------------------------------------------------------------------------
// Splits

struct SplitRatios {
  double initial = 0.6;
  double learn = 0.2;
  double unknown = 0.2;

  void validate(std::string_view what) const {
    if (initial < 0 || learn < 0 || unknown < 0 || std::abs(initial + learn + unknown - 1.0) > 1e-9)
      throw ConfigError(std::string(what) + " split ratios must be non-negative and sum to 1");
  }
};

struct ResourceRatios {
  SplitRatios patterns;
  SplitRatios mentions;
};

class SplitBundle {
 public:
  std::uint64_t seed = 0;

  std::vector<Pattern>& patterns(Split s) { return patterns_[slot(s)]; }
  const std::vector<Pattern>& patterns(Split s) const { return patterns_[slot(s)]; }
  std::vector<Mention>& mentions(Split s) { return mentions_[slot(s)]; }
  const std::vector<Mention>& mentions(Split s) const { return mentions_[slot(s)]; }

  std::vector<const Mention*> mentions_of(Split s, BaseType t) const {
    std::vector<const Mention*> out;
    for (const auto& m : mentions(s))
      if (m.type == t) out.push_back(&m);
    return out;
  }

  // Every mention of every split, for the full-lexicon view.
  std::vector<Mention> all_mentions() const {
    std::vector<Mention> out;
    for (const auto& v : mentions_) out.insert(out.end(), v.begin(), v.end());
    return out;
  }

 private:
  static std::size_t slot(Split s) {
    if (s == Split::acquired) throw ContractViolation("bundle holds no acquired resources");
    return static_cast<std::size_t>(s);
  }
  std::array<std::vector<Pattern>, 4> patterns_;
  std::array<std::vector<Mention>, 4> mentions_;
};

namespace detail {

inline std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& r) {
  auto a = static_cast<std::size_t>(std::llround(static_cast<double>(n) * r.initial));
  auto b = static_cast<std::size_t>(std::llround(static_cast<double>(n) * r.learn));
  a = std::min(a, n);
  b = std::min(b, n - a);
  return {a, b, n - a - b};
}

template <class T>
void deal(std::vector<T> items, const SplitRatios& r, Rng& rng, SplitBundle& bundle,
          std::vector<T>& (SplitBundle::*dest)(Split)) {
  rng.shuffle(items.begin(), items.end());
  const auto counts = split_counts(items.size(), r);
  std::size_t k = 0;
  const std::array<Split, 3> splits = {Split::initial, Split::learn, Split::unknown};
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < counts[s]; ++i, ++k) {
      items[k].split = splits[s];
      items[k].source_split = splits[s];
      (bundle.*dest)(splits[s]).push_back(std::move(items[k]));
    }
  }
}

}  // namespace detail

// Random disjoint INITIAL/LEARN/UNKNOWN partition. Mentions are split per type
// so every split covers every type that has enough entries.
inline SplitBundle split_resources(std::vector<Pattern> patterns, std::vector<Mention> mentions,
                                   const ResourceRatios& ratios, std::uint64_t seed) {
  if (patterns.empty()) throw ConfigError("split_resources: empty pattern set");
  if (mentions.empty()) throw ConfigError("split_resources: empty mention set");
  ratios.patterns.validate("pattern");
  ratios.mentions.validate("mention");
  SplitBundle bundle;
  bundle.seed = seed;
  Rng prng(derive_seed(seed, "split-patterns"));
  detail::deal(std::move(patterns), ratios.patterns, prng, bundle, &SplitBundle::patterns);
  Rng mrng(derive_seed(seed, "split-mentions"));
  std::array<std::vector<Mention>, kBaseTypeCount> by_type;
  for (auto& m : mentions) by_type[static_cast<std::size_t>(m.type)].push_back(std::move(m));
  for (auto& group : by_type) detail::deal(std::move(group), ratios.mentions, mrng, bundle, &SplitBundle::mentions);
  return bundle;
}

// Moves `fraction` of the INITIAL patterns and mentions (mentions per type)
// into the held-out half used only to build the development set.
inline void hold_out_initial(SplitBundle& bundle, double fraction, std::uint64_t seed) {
  if (fraction < 0 || fraction >= 1) throw ConfigError("dev held-out fraction must be in [0,1)");
  Rng rng(derive_seed(seed, "heldout"));
  auto move_part = [&](auto& from, auto& to, auto key) {
    using Item = typename std::remove_reference_t<decltype(from)>::value_type;
    std::map<int, std::vector<Item>> groups;
    for (auto& x : from) groups[key(x)].push_back(std::move(x));
    from.clear();
    for (auto& [k, g] : groups) {
      rng.shuffle(g.begin(), g.end());
      const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(g.size()) * fraction));
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (i < n_out) {
          g[i].split = Split::heldout;
          g[i].source_split = Split::heldout;
          to.push_back(std::move(g[i]));
        } else {
          from.push_back(std::move(g[i]));
        }
      }
    }
  };
  move_part(bundle.patterns(Split::initial), bundle.patterns(Split::heldout), [](const Pattern&) { return 0; });
  move_part(bundle.mentions(Split::initial), bundle.mentions(Split::heldout),
            [](const Mention& m) { return static_cast<int>(m.type); });
}

// ---------------------------------------------------------------------------
// Rendering

class RenderError : public Error {
 public:
  using Error::Error;
};

// Renders `pattern` with one mention per slot, in slot order.
inline TaggedUtterance render_pattern(const Pattern& pattern, std::span<const Mention* const> bindings) {
  const std::size_t n_slots = pattern.slots().size();
  if (bindings.size() != n_slots)
    throw RenderError("pattern " + pattern.id + " expects " + std::to_string(n_slots) + " bindings");
  TaggedUtterance u;
  u.origin.pattern_id = pattern.id;
  u.origin.pattern_split = pattern.effective_split();
  auto emit = [&u](const Tokens& surface, ConceptType type) {
    for (std::size_t k = 0; k < surface.size(); ++k) {
      u.tokens.push_back(surface[k]);
      u.tags.push_back(k == 0 ? Tag::begin(type) : Tag::inside(type));
    }
  };
  std::size_t slot_index = 0;
  for (const auto& e : pattern.elements) {
    if (const auto* w = std::get_if<Token>(&e)) {
      u.tokens.push_back(*w);
      u.tags.push_back(Tag::outside());
    } else if (const auto* s = std::get_if<Slot>(&e)) {
      const Mention* m = bindings[slot_index++];
      if (m == nullptr || m->type != s->base)
        throw RenderError("pattern " + pattern.id + ": slot $" + std::string(name_of(s->base)) +
                          " bound to " + (m ? std::string(name_of(m->type)) : "nothing"));
      emit(m->surface, s->type());
      u.origin.mention_ids.push_back(m->id);
      u.origin.mention_splits.push_back(m->effective_split());
    } else {
      const auto& lit = std::get<Literal>(e);
      emit(lit.surface, lit.type);
    }
  }
  return u;
}

// Mixing of a "base" pool with an optional "novel" pool. With probability
// p_novel_pattern the pattern comes from the novel pool; each slot
// independently takes a novel mention with probability p_novel_mention.
struct Composition {
  Split base = Split::initial;
  std::optional<Split> novel;
  double p_novel_pattern = 0.0;
  double p_novel_mention = 0.0;
};

namespace detail {

using MentionPools = std::array<std::vector<const Mention*>, kBaseTypeCount>;

inline MentionPools pools_of(const SplitBundle& b, Split s) {
  MentionPools out;
  for (const auto& m : b.mentions(s)) out[static_cast<std::size_t>(m.type)].push_back(&m);
  return out;
}

}  // namespace detail

inline std::vector<TaggedUtterance> generate_dataset(const SplitBundle& bundle, const Composition& comp,
                                                     std::size_t size, Rng& rng) {
  const auto& base_patterns = bundle.patterns(comp.base);
  if (base_patterns.empty())
    throw ConfigError("composition references an empty " + std::string(name_of(comp.base)) + " pattern pool");
  const auto base_mentions = detail::pools_of(bundle, comp.base);
  const std::vector<Pattern>* novel_patterns = nullptr;
  detail::MentionPools novel_mentions;
  if (comp.novel) {
    novel_patterns = &bundle.patterns(*comp.novel);
    novel_mentions = detail::pools_of(bundle, *comp.novel);
    if (novel_patterns->empty() && comp.p_novel_pattern > 0)
      throw ConfigError("composition references an empty " + std::string(name_of(*comp.novel)) +
                        " pattern pool");
  }

  std::vector<TaggedUtterance> out;
  out.reserve(size);
  std::vector<const Mention*> bindings;
  while (out.size() < size) {
    const bool novel_pattern = comp.novel && rng.bernoulli(comp.p_novel_pattern);
    const Pattern& p = novel_pattern ? rng.pick(*novel_patterns) : rng.pick(base_patterns);
    bindings.clear();
    for (const auto& slot : p.slots()) {
      const auto t = static_cast<std::size_t>(slot.base);
      const bool want_novel = comp.novel && rng.bernoulli(comp.p_novel_mention);
      const auto& first = want_novel ? novel_mentions[t] : base_mentions[t];
      const auto& second = want_novel ? base_mentions[t] : novel_mentions[t];
      if (!first.empty()) {
        bindings.push_back(rng.pick(first));
      } else if (!second.empty()) {
        bindings.push_back(rng.pick(second));
      } else {
        throw ConfigError("no " + std::string(name_of(slot.base)) + " mention available for pattern " + p.id);
      }
    }
    out.push_back(render_pattern(p, bindings));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Knowledge base

// Typed lexicon visible to the dialogue system. Entries can be ablated
// (hidden) by the harness and later completed back.
class KnowledgeBase {
 public:
  struct Entry {
    BaseType type;
    bool ablated = false;
  };

  KnowledgeBase() = default;

  static KnowledgeBase from_mentions(std::span<const Mention> mentions) {
    check_unique_surfaces(mentions);
    KnowledgeBase kb;
    for (const auto& m : mentions) kb.entries_.emplace(m.text(), Entry{m.type, false});
    return kb;
  }

  std::optional<BaseType> lookup(std::string_view surface) const {
    auto it = entries_.find(std::string(surface));
    if (it == entries_.end() || it->second.ablated) return std::nullopt;
    return it->second.type;
  }
  std::optional<BaseType> lookup(const Tokens& surface) const { return lookup(join(surface)); }
  bool contains(const Tokens& surface) const { return lookup(surface).has_value(); }

  // Un-ablates or inserts an entry.
  void complete(const std::string& surface, BaseType type) {
    entries_[surface] = Entry{type, false};
    ++revision_;
  }

  void set_ablated(const std::string& surface, bool ablated) {
    auto it = entries_.find(surface);
    if (it == entries_.end()) throw ContractViolation("no KB entry '" + surface + "'");
    it->second.ablated = ablated;
    ++revision_;
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t ablated_count() const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(),
                                                  [](const auto& kv) { return kv.second.ablated; }));
  }
  const std::map<std::string, Entry>& entries() const { return entries_; }
  // Bumped on every mutation; lets callers cache KB-dependent results.
  std::uint64_t revision() const { return revision_; }

 private:
  std::map<std::string, Entry> entries_;
  std::uint64_t revision_ = 0;
};

// Hides the `fraction` least frequent ingredient entries (ties broken by
// surface). Returns how many entries were ablated.
inline std::size_t ablate_kb(KnowledgeBase& kb, double fraction,
                             const std::map<std::string, std::uint64_t>& frequency) {
  if (fraction < 0 || fraction >= 1) throw ConfigError("ablation fraction must be in [0,1)");
  std::vector<std::pair<std::uint64_t, std::string>> ingredients;
  for (const auto& [surface, entry] : kb.entries()) {
    if (entry.type != BaseType::ingredient) continue;
    auto f = frequency.find(surface);
    if (f == frequency.end()) throw ConfigError("frequency table lacks ingredient '" + surface + "'");
    ingredients.emplace_back(f->second, surface);
  }
  std::sort(ingredients.begin(), ingredients.end());
  const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ingredients.size())));
  for (std::size_t i = 0; i < n; ++i) kb.set_ablated(ingredients[i].second, true);
  return n;
}

inline std::map<std::string, std::uint64_t> frequency_table(std::span<const Mention> mentions) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& m : mentions) out[m.text()] = m.frequency;
  return out;
}

// The harness-held, never-ablated lexicon that simulates KB completion.
class LexiconOracle {
 public:
  LexiconOracle() = default;
  explicit LexiconOracle(std::span<const Mention> mentions) {
    for (const auto& m : mentions) entries_.emplace(m.text(), &m);
  }
  std::optional<BaseType> lookup(const std::string& surface) const {
    auto it = entries_.find(surface);
    if (it == entries_.end()) return std::nullopt;
    return it->second->type;
  }
  const Mention* find(const std::string& surface) const {
    auto it = entries_.find(surface);
    return it == entries_.end() ? nullptr : it->second;
  }

 private:
  std::unordered_map<std::string, const Mention*> entries_;
};

}  // namespace otjl
