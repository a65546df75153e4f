#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "otjl/otjl.hpp"

namespace fx {

using namespace otjl;

inline Tokens toks(std::string_view s) { return tokenize(s); }

inline ConceptType ct(std::string_view name) {
  auto t = ConceptType::parse(name);
  if (!t) throw std::invalid_argument("bad type " + std::string(name));
  return *t;
}

inline Concept cc(const Tokens& t, std::size_t b, std::size_t e, std::string_view type) {
  return make_concept(ct(type), t, {b, e});
}

inline Mention mention(std::string id, std::string_view surface, BaseType type, Split split = Split::initial,
                       std::uint64_t frequency = 1) {
  Mention m;
  m.id = std::move(id);
  m.surface = tokenize(surface);
  m.type = type;
  m.split = split;
  m.source_split = split;
  m.frequency = frequency;
  return m;
}

inline Pattern pattern(std::string id, std::string_view text, Split split = Split::initial) {
  return parse_pattern(std::move(id), text, split);
}

inline TaggedUtterance utterance(std::string_view text, std::vector<std::tuple<std::size_t, std::size_t, std::string>> spans) {
  Tokens t = tokenize(text);
  std::vector<Concept> cs;
  for (const auto& [b, e, type] : spans) cs.push_back(cc(t, b, e, type));
  auto u = TaggedUtterance::from_concepts(t, cs, Provenance::generated);
  return u;
}

inline std::string source_dir() { return OTJL_SOURCE_DIR; }

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("otjl-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Tags every surface it saw in training with the type it was labeled with,
// longest match first. Deterministic and instant; stands in for a real
// learner wherever the test is about the harness.
class DictLearner {
 public:
  static DictLearner train(std::span<const TaggedUtterance> data, std::span<const TaggedUtterance>,
                           const TrainConfig&) {
    if (data.empty()) throw DataError("train: empty training set");
    DictLearner m;
    m.learn(data);
    return m;
  }

  DictLearner fine_tune(std::span<const TaggedUtterance> data, std::span<const TaggedUtterance>,
                        const TrainConfig&) const {
    if (data.empty()) throw DataError("fine_tune: empty adaptation set");
    DictLearner m = *this;
    ++m.version_;
    m.learn(data);
    return m;
  }

  std::vector<Concept> predict(const Tokens& tokens) const {
    auto hits = longest_matches<ConceptType>(tokens, 8, [this](const std::string& key) {
      auto it = dict.find(key);
      return it == dict.end() ? std::nullopt : std::optional<ConceptType>(it->second);
    });
    std::vector<Concept> out;
    for (const auto& h : hits) out.push_back(make_concept(h.value, tokens, h.span));
    return out;
  }

  std::size_t version() const { return version_; }
  const TrainingReport& report() const { return report_; }

  std::map<std::string, ConceptType> dict;

 private:
  void learn(std::span<const TaggedUtterance> data) {
    for (const auto& u : data)
      for (const auto& c : u.concepts()) dict[c.text()] = c.type;
    report_.train_size = data.size();
  }

  std::size_t version_ = 0;
  TrainingReport report_;
};

static_assert(SequenceLearner<DictLearner>);
static_assert(SequenceLearner<FeatureTagger>);

// A compact closed world: a handful of patterns (some negated) and mentions
// of three types.
struct MiniWorld {
  std::vector<Pattern> patterns;
  std::vector<Mention> mentions;

  MiniWorld() {
    const char* ps[] = {
        "i want a $recipe_type with $ingredient",
        "can you give me a $recipe_type recipe ?",
        "what can i cook with $ingredient ?",
        "i need a $recipe_type without $negative_ingredient",
        "my son does not eat $negative_ingredient",
        "any $origin_adjective $recipe_type ideas ?",
        "i have $ingredient and $ingredient at home",
        "show me a $recipe_type for {event:christmas}",
    };
    for (std::size_t i = 0; i < std::size(ps); ++i) patterns.push_back(pattern("p" + std::to_string(i + 1), ps[i]));
    const std::pair<const char*, BaseType> ms[] = {
        {"cake", BaseType::recipe_type},      {"pie", BaseType::recipe_type},
        {"curry", BaseType::recipe_type},     {"soup", BaseType::recipe_type},
        {"eggs", BaseType::ingredient},       {"chocolate", BaseType::ingredient},
        {"soy sauce", BaseType::ingredient},  {"leeks", BaseType::ingredient},
        {"lamb", BaseType::ingredient},       {"red onions", BaseType::ingredient},
        {"italian", BaseType::origin_adjective}, {"thai", BaseType::origin_adjective},
        {"greek", BaseType::origin_adjective},
    };
    for (std::size_t i = 0; i < std::size(ms); ++i)
      mentions.push_back(mention("m" + std::to_string(i + 1), ms[i].first, ms[i].second, Split::initial,
                                 100 - 5 * i));
  }
};

}  // namespace fx
