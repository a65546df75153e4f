#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "otjl/error.hpp"
#include "otjl/text.hpp"

namespace otjl {

enum class BaseType : std::uint8_t {
  recipe_type,
  ingredient,
  preparation_technique,
  origin,
  origin_adjective,
  meal,
  event,
  other_category,
};

inline constexpr std::size_t kBaseTypeCount = 8;
inline constexpr std::size_t kConceptTypeCount = 2 * kBaseTypeCount;

inline constexpr std::array<std::string_view, kBaseTypeCount> kBaseTypeNames = {
    "recipe_type", "ingredient", "preparation_technique", "origin",
    "origin_adjective", "meal", "event", "other_category",
};

inline constexpr std::string_view kNegativePrefix = "negative_";

inline std::string_view name_of(BaseType t) { return kBaseTypeNames[static_cast<std::size_t>(t)]; }

inline std::optional<BaseType> parse_base_type(std::string_view name) {
  for (std::size_t i = 0; i < kBaseTypeCount; ++i)
    if (kBaseTypeNames[i] == name) return static_cast<BaseType>(i);
  return std::nullopt;
}

inline constexpr std::array<BaseType, kBaseTypeCount> all_base_types() {
  std::array<BaseType, kBaseTypeCount> out{};
  for (std::size_t i = 0; i < kBaseTypeCount; ++i) out[i] = static_cast<BaseType>(i);
  return out;
}

enum class Polarity : std::uint8_t { positive, negative };

// One of the 16 labelled concept types: a base type plus polarity.
struct ConceptType {
  BaseType base = BaseType::recipe_type;
  Polarity polarity = Polarity::positive;

  constexpr bool is_negative() const { return polarity == Polarity::negative; }
  constexpr std::size_t index() const {
    return 2 * static_cast<std::size_t>(base) + (is_negative() ? 1 : 0);
  }
  static constexpr ConceptType from_index(std::size_t i) {
    return {static_cast<BaseType>(i / 2), (i % 2) ? Polarity::negative : Polarity::positive};
  }

  std::string name() const {
    std::string n(name_of(base));
    return is_negative() ? std::string(kNegativePrefix) + n : n;
  }

  static std::optional<ConceptType> parse(std::string_view name) {
    Polarity p = Polarity::positive;
    if (name.starts_with(kNegativePrefix)) {
      p = Polarity::negative;
      name.remove_prefix(kNegativePrefix.size());
    }
    auto b = parse_base_type(name);
    if (!b) return std::nullopt;
    return ConceptType{*b, p};
  }

  friend constexpr auto operator<=>(const ConceptType&, const ConceptType&) = default;
};

constexpr ConceptType positive(BaseType b) { return {b, Polarity::positive}; }

// Polarity flip; an involution.
constexpr ConceptType negated(ConceptType t) {
  return {t.base, t.is_negative() ? Polarity::positive : Polarity::negative};
}

// Half-open token interval [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  constexpr std::size_t size() const { return end - begin; }
  constexpr bool empty() const { return end <= begin; }
  constexpr bool contains(const Span& o) const { return begin <= o.begin && o.end <= end; }
  constexpr bool overlaps(const Span& o) const { return begin < o.end && o.begin < end; }

  friend constexpr auto operator<=>(const Span&, const Span&) = default;
};

struct Concept {
  ConceptType type;
  Tokens mention;
  Span span;

  std::string text() const { return join(mention); }
  friend bool operator==(const Concept&, const Concept&) = default;
};

inline Tokens slice(const Tokens& tokens, Span s) {
  return Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(s.begin),
                tokens.begin() + static_cast<std::ptrdiff_t>(s.end));
}

inline Concept make_concept(ConceptType type, const Tokens& tokens, Span span) {
  return {type, slice(tokens, span), span};
}

// ---------------------------------------------------------------------------
// BIO tags

struct Tag {
  enum class Kind : std::uint8_t { O, B, I };
  Kind kind = Kind::O;
  ConceptType type{};

  static constexpr Tag outside() { return {}; }
  static constexpr Tag begin(ConceptType t) { return {Kind::B, t}; }
  static constexpr Tag inside(ConceptType t) { return {Kind::I, t}; }

  constexpr bool is_outside() const { return kind == Kind::O; }

  // Dense label index used by the tagger: 0 = O, then B/I pairs per type.
  constexpr std::size_t label() const {
    if (kind == Kind::O) return 0;
    return 1 + 2 * type.index() + (kind == Kind::I ? 1 : 0);
  }
  static constexpr Tag from_label(std::size_t l) {
    if (l == 0) return outside();
    const std::size_t k = l - 1;
    return {(k % 2) ? Kind::I : Kind::B, ConceptType::from_index(k / 2)};
  }

  std::string str() const {
    switch (kind) {
      case Kind::O: return "O";
      case Kind::B: return "B-" + type.name();
      case Kind::I: return "I-" + type.name();
    }
    return "O";
  }

  static Tag parse(std::string_view s) {
    if (s == "O") return outside();
    if (s.size() > 2 && (s[0] == 'B' || s[0] == 'I') && s[1] == '-') {
      auto t = ConceptType::parse(s.substr(2));
      if (t) return s[0] == 'B' ? begin(*t) : inside(*t);
    }
    throw DataError("invalid BIO tag '" + std::string(s) + "'");
  }

  friend constexpr bool operator==(const Tag& a, const Tag& b) {
    return a.kind == b.kind && (a.kind == Kind::O || a.type == b.type);
  }
};

inline constexpr std::size_t kLabelCount = 1 + 2 * kConceptTypeCount;

// Strict legality: every I- continues a B-/I- of the same type.
inline bool is_legal_bio(std::span<const Tag> tags) {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].kind != Tag::Kind::I) continue;
    if (i == 0 || tags[i - 1].is_outside() || tags[i - 1].type != tags[i].type) return false;
  }
  return true;
}

// Lenient chunking: maximal B-/I- runs of one type become a concept, and an
// I- without a compatible predecessor opens a new chunk.
inline std::vector<Concept> bio_decode(std::span<const Tag> tags, const Tokens& tokens) {
  if (tags.size() != tokens.size())
    throw ContractViolation("bio_decode: tag and token counts differ");
  std::vector<Concept> out;
  std::size_t i = 0;
  while (i < tags.size()) {
    if (tags[i].is_outside()) {
      ++i;
      continue;
    }
    const ConceptType type = tags[i].type;
    std::size_t j = i + 1;
    while (j < tags.size() && tags[j].kind == Tag::Kind::I && tags[j].type == type) ++j;
    out.push_back(make_concept(type, tokens, {i, j}));
    i = j;
  }
  return out;
}

inline std::vector<Tag> bio_encode(std::span<const Concept> concepts, std::size_t length) {
  std::vector<Tag> tags(length);
  std::vector<bool> used(length, false);
  for (const auto& c : concepts) {
    if (c.span.empty() || c.span.end > length)
      throw ContractViolation("bio_encode: concept span out of range");
    for (std::size_t k = c.span.begin; k < c.span.end; ++k) {
      if (used[k]) throw ContractViolation("bio_encode: overlapping concepts");
      used[k] = true;
      tags[k] = k == c.span.begin ? Tag::begin(c.type) : Tag::inside(c.type);
    }
  }
  return tags;
}

// ---------------------------------------------------------------------------
// Resource splits and provenance

enum class Split : std::uint8_t { initial, heldout, learn, unknown, acquired };

inline std::string_view name_of(Split s) {
  switch (s) {
    case Split::initial: return "INITIAL";
    case Split::heldout: return "INITIAL_HELDOUT";
    case Split::learn: return "LEARN";
    case Split::unknown: return "UNKNOWN";
    case Split::acquired: return "ACQUIRED";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  for (Split v : {Split::initial, Split::heldout, Split::learn, Split::unknown, Split::acquired})
    if (name_of(v) == s) return v;
  throw DataError("unknown split label '" + std::string(s) + "'");
}

enum class Provenance : std::uint8_t { generated, acquired, external };

inline std::string_view name_of(Provenance p) {
  switch (p) {
    case Provenance::generated: return "generated";
    case Provenance::acquired: return "acquired";
    case Provenance::external: return "external";
  }
  return "?";
}

inline Provenance parse_provenance(std::string_view s) {
  for (Provenance v : {Provenance::generated, Provenance::acquired, Provenance::external})
    if (name_of(v) == s) return v;
  throw DataError("unknown provenance '" + std::string(s) + "'");
}

// Which resources an utterance was rendered from. For acquired resources the
// recorded split is the split of the lexicon element they were learned from.
struct Origin {
  std::string pattern_id;
  Split pattern_split = Split::initial;
  std::vector<std::string> mention_ids;
  std::vector<Split> mention_splits;

  friend bool operator==(const Origin&, const Origin&) = default;
};

struct TaggedUtterance {
  Tokens tokens;
  std::vector<Tag> tags;
  Provenance provenance = Provenance::generated;
  Origin origin;

  std::vector<Concept> concepts() const { return bio_decode(tags, tokens); }

  void validate() const {
    if (tokens.size() != tags.size()) throw DataError("token/tag count mismatch");
    if (tokens.empty()) throw DataError("empty utterance");
    if (!is_legal_bio(tags)) throw DataError("illegal BIO sequence: " + join(tokens));
  }

  static TaggedUtterance from_concepts(Tokens tokens, std::span<const Concept> concepts,
                                       Provenance p = Provenance::acquired) {
    TaggedUtterance u;
    u.tags = bio_encode(concepts, tokens.size());
    u.tokens = std::move(tokens);
    u.provenance = p;
    return u;
  }

  friend bool operator==(const TaggedUtterance&, const TaggedUtterance&) = default;
};

}  // namespace otjl
