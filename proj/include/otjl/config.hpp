#pragma once

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "otjl/acquisition.hpp"
#include "otjl/adaptation.hpp"
#include "otjl/corpus.hpp"
#include "otjl/error.hpp"
#include "otjl/tagger.hpp"

namespace otjl {

namespace fs = std::filesystem;

struct RunConfig {
  std::uint64_t seed = 1;

  struct Resources {
    std::string patterns = "data/resources/patterns.tsv";
    std::string mentions = "data/resources/mentions.tsv";
    std::size_t max_patterns = 0;  // 0 = keep all
    std::size_t max_mentions = 0;
    std::array<std::size_t, kBaseTypeCount> synthetic_mentions{};
  } resources;

  struct Splits {
    SplitRatios patterns;
    SplitRatios mentions;
    double dev_heldout_fraction = 0.5;
  } splits;

  struct Sizes {
    std::size_t train = 20000;
    std::size_t dev = 4000;
    std::size_t simulation = 20000;
    std::size_t test_initial = 1000;
    std::size_t test_learn = 1000;
    std::size_t test_unknown = 1000;
  } sizes;

  struct Mixing {
    double p_new_pattern = 0.7;
    double p_new_mention = 0.3;
  } mixing;

  double kb_ablation_fraction = 0.4;

  TrainConfig tagger;  // seed is overwritten by the run seed

  struct Adaptation {
    std::size_t min_new_mentions = 5;
    std::size_t min_new_patterns = 10;
    std::size_t min_new_examples = 50;
    std::size_t budget = 1000;
    double dev_guard = 2.0;
  } adaptation;

  struct Acquisition {
    std::vector<std::string> misunderstanding_patterns = MisunderstandingDetector::default_patterns();
    std::size_t negation_window = 3;
    std::string stopwords;  // optional file, one word per line
  } acquisition;

  struct Evaluation {
    std::size_t checkpoint_every = 1;
    std::string test_real;  // optional CoNLL file
    std::size_t model_checkpoint_every = 0;  // 0 = final model only
    bool dump_train_learn = false;
  } evaluation;

  std::string output_dir = "runs/default";

  // Directory relative paths are resolved against.
  fs::path root = ".";

  fs::path resolve(const std::string& p) const {
    fs::path path(p);
    return path.is_absolute() ? path : root / path;
  }

  fs::path output_path() const {
    if (const char* env = std::getenv("OTJL_OUTPUT_ROOT"); env && *env) {
      fs::path out(output_dir);
      return out.is_absolute() ? out : fs::path(env) / out;
    }
    return resolve(output_dir);
  }

  TrainConfig train_config() const {
    TrainConfig t = tagger;
    t.seed = seed;
    return t;
  }

  AdaptationPolicy policy() const {
    AdaptationPolicy p;
    p.min_mentions = adaptation.min_new_mentions;
    p.min_patterns = adaptation.min_new_patterns;
    p.min_examples = adaptation.min_new_examples;
    p.budget = adaptation.budget;
    p.dev_guard = adaptation.dev_guard;
    return p;
  }

  void validate() const {
    splits.patterns.validate("splits.patterns");
    splits.mentions.validate("splits.mentions");
    auto prob = [](double v, const char* what) {
      if (!(v >= 0 && v <= 1)) throw ConfigError(std::string(what) + " must be in [0,1]");
    };
    prob(mixing.p_new_pattern, "mixing.p_new_pattern");
    prob(mixing.p_new_mention, "mixing.p_new_mention");
    prob(tagger.gazetteer_dropout, "tagger.gazetteer_dropout");
    if (!(splits.dev_heldout_fraction > 0 && splits.dev_heldout_fraction < 1))
      throw ConfigError("splits.dev_heldout_fraction must be in (0,1)");
    if (!(kb_ablation_fraction >= 0 && kb_ablation_fraction < 1))
      throw ConfigError("kb.ablation_fraction must be in [0,1)");
    if (sizes.train == 0 || sizes.dev == 0 || sizes.test_initial == 0 || sizes.test_learn == 0 ||
        sizes.test_unknown == 0)
      throw ConfigError("dataset sizes must be positive (simulation may be 0)");
    if (tagger.epochs == 0) throw ConfigError("tagger.epochs must be positive");
    if (!(tagger.learning_rate > 0)) throw ConfigError("tagger.learning_rate must be positive");
    if (tagger.l2 < 0) throw ConfigError("tagger.l2 must be non-negative");
    if (evaluation.checkpoint_every == 0) throw ConfigError("evaluation.checkpoint_every must be positive");
    if (output_dir.empty()) throw ConfigError("output_dir must be set");
    policy().validate();
  }
};

namespace detail {

// Reads an object and rejects keys it was not asked about.
class StrictObject {
 public:
  StrictObject(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + " must be an object");
  }
  ~StrictObject() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.contains(k)) throw ConfigError("unknown config key " + where_ + "." + k);
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key " + where_ + "." + key + " has the wrong type");
    }
  }

  const nlohmann::json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline SplitRatios ratios_from(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + " must be [initial, learn, unknown]");
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + " must hold numbers");
  }
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j, const fs::path& root) {
  RunConfig c;
  c.root = root;
  detail::StrictObject top(j, "config");
  top.get("seed", c.seed);
  top.get("output_dir", c.output_dir);
  if (auto* r = top.child("resources")) {
    detail::StrictObject o(*r, "resources");
    o.get("patterns", c.resources.patterns);
    o.get("mentions", c.resources.mentions);
    o.get("max_patterns", c.resources.max_patterns);
    o.get("max_mentions", c.resources.max_mentions);
    if (auto* s = o.child("synthetic_mentions")) {
      detail::StrictObject so(*s, "resources.synthetic_mentions");
      for (BaseType t : all_base_types())
        so.get(std::string(name_of(t)).c_str(), c.resources.synthetic_mentions[static_cast<std::size_t>(t)]);
    }
  }
  if (auto* s = top.child("splits")) {
    detail::StrictObject o(*s, "splits");
    if (auto* p = o.child("patterns")) c.splits.patterns = detail::ratios_from(*p, "splits.patterns");
    if (auto* m = o.child("mentions")) c.splits.mentions = detail::ratios_from(*m, "splits.mentions");
    o.get("dev_heldout_fraction", c.splits.dev_heldout_fraction);
  }
  if (auto* s = top.child("sizes")) {
    detail::StrictObject o(*s, "sizes");
    o.get("train", c.sizes.train);
    o.get("dev", c.sizes.dev);
    o.get("simulation", c.sizes.simulation);
    o.get("test_initial", c.sizes.test_initial);
    o.get("test_learn", c.sizes.test_learn);
    o.get("test_unknown", c.sizes.test_unknown);
  }
  if (auto* s = top.child("mixing")) {
    detail::StrictObject o(*s, "mixing");
    o.get("p_new_pattern", c.mixing.p_new_pattern);
    o.get("p_new_mention", c.mixing.p_new_mention);
  }
  if (auto* s = top.child("kb")) {
    detail::StrictObject o(*s, "kb");
    o.get("ablation_fraction", c.kb_ablation_fraction);
  }
  if (auto* s = top.child("tagger")) {
    detail::StrictObject o(*s, "tagger");
    o.get("epochs", c.tagger.epochs);
    o.get("learning_rate", c.tagger.learning_rate);
    o.get("l2", c.tagger.l2);
    o.get("gazetteer_dropout", c.tagger.gazetteer_dropout);
  }
  if (auto* s = top.child("adaptation")) {
    detail::StrictObject o(*s, "adaptation");
    o.get("min_new_mentions", c.adaptation.min_new_mentions);
    o.get("min_new_patterns", c.adaptation.min_new_patterns);
    o.get("min_new_examples", c.adaptation.min_new_examples);
    o.get("budget", c.adaptation.budget);
    o.get("dev_guard", c.adaptation.dev_guard);
  }
  if (auto* s = top.child("acquisition")) {
    detail::StrictObject o(*s, "acquisition");
    o.get("misunderstanding_patterns", c.acquisition.misunderstanding_patterns);
    o.get("negation_window", c.acquisition.negation_window);
    o.get("stopwords", c.acquisition.stopwords);
  }
  if (auto* s = top.child("evaluation")) {
    detail::StrictObject o(*s, "evaluation");
    o.get("checkpoint_every", c.evaluation.checkpoint_every);
    o.get("test_real", c.evaluation.test_real);
    o.get("model_checkpoint_every", c.evaluation.model_checkpoint_every);
    o.get("dump_train_learn", c.evaluation.dump_train_learn);
  }
  c.validate();
  return c;
}

// With `base`, paths are rewritten relative to that directory so the written
// file loads from where it is saved.
inline nlohmann::ordered_json config_to_json(const RunConfig& c, std::optional<fs::path> base = std::nullopt) {
  auto path = [&](const std::string& p, const fs::path& resolved) -> std::string {
    if (!base || p.empty()) return p;
    return fs::weakly_canonical(fs::absolute(resolved)).lexically_relative(fs::weakly_canonical(fs::absolute(*base))).string();
  };
  nlohmann::ordered_json synth;
  for (BaseType t : all_base_types()) synth[std::string(name_of(t))] = c.resources.synthetic_mentions[static_cast<std::size_t>(t)];
  auto ratios = [](const SplitRatios& r) { return nlohmann::ordered_json::array({r.initial, r.learn, r.unknown}); };
  return nlohmann::ordered_json{
      {"seed", c.seed},
      {"resources", {{"patterns", path(c.resources.patterns, c.resolve(c.resources.patterns))},
                     {"mentions", path(c.resources.mentions, c.resolve(c.resources.mentions))},
                     {"max_patterns", c.resources.max_patterns},
                     {"max_mentions", c.resources.max_mentions},
                     {"synthetic_mentions", synth}}},
      {"splits", {{"patterns", ratios(c.splits.patterns)},
                  {"mentions", ratios(c.splits.mentions)},
                  {"dev_heldout_fraction", c.splits.dev_heldout_fraction}}},
      {"sizes", {{"train", c.sizes.train},
                 {"dev", c.sizes.dev},
                 {"simulation", c.sizes.simulation},
                 {"test_initial", c.sizes.test_initial},
                 {"test_learn", c.sizes.test_learn},
                 {"test_unknown", c.sizes.test_unknown}}},
      {"mixing", {{"p_new_pattern", c.mixing.p_new_pattern}, {"p_new_mention", c.mixing.p_new_mention}}},
      {"kb", {{"ablation_fraction", c.kb_ablation_fraction}}},
      {"tagger", {{"epochs", c.tagger.epochs},
                  {"learning_rate", c.tagger.learning_rate},
                  {"l2", c.tagger.l2},
                  {"gazetteer_dropout", c.tagger.gazetteer_dropout}}},
      {"adaptation", {{"min_new_mentions", c.adaptation.min_new_mentions},
                      {"min_new_patterns", c.adaptation.min_new_patterns},
                      {"min_new_examples", c.adaptation.min_new_examples},
                      {"budget", c.adaptation.budget},
                      {"dev_guard", c.adaptation.dev_guard}}},
      {"acquisition", {{"misunderstanding_patterns", c.acquisition.misunderstanding_patterns},
                       {"negation_window", c.acquisition.negation_window},
                       {"stopwords", c.acquisition.stopwords}}},
      {"evaluation", {{"checkpoint_every", c.evaluation.checkpoint_every},
                      {"test_real", path(c.evaluation.test_real, c.resolve(c.evaluation.test_real))},
                      {"model_checkpoint_every", c.evaluation.model_checkpoint_every},
                      {"dump_train_learn", c.evaluation.dump_train_learn}}},
      {"output_dir", path(c.output_dir, c.output_path())},
  };
}

// Paths in the file are relative to `root`, which defaults to the directory
// holding the config file.
inline RunConfig load_config(const fs::path& file, std::optional<fs::path> root = std::nullopt) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  fs::path r = root ? *root : file.parent_path();
  if (r.empty()) r = ".";
  return config_from_json(j, r);
}

}  // namespace otjl
