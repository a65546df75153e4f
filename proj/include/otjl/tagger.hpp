#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "otjl/concepts.hpp"
#include "otjl/error.hpp"
#include "otjl/metrics.hpp"
#include "otjl/rng.hpp"
#include "otjl/surface_match.hpp"
#include "otjl/text.hpp"

namespace otjl {

struct TrainConfig {
  // Passes over the training set; each pass is one epoch of |train| updates.
  std::size_t epochs = 5;
  double learning_rate = 0.1;
  double l2 = 1e-6;
  // Probability of hiding the gazetteer features of a training utterance, so
  // the model keeps learning from context and not only from memorized surfaces.
  double gazetteer_dropout = 0.5;
  std::uint64_t seed = 1;
};

struct TrainingReport {
  double start_dev_f1 = 0;
  std::vector<double> epoch_dev_f1;
  std::size_t selected_epoch = 0;  // 0 = starting parameters
  double selected_dev_f1 = 0;
  std::size_t train_size = 0;
};

// The contract every learner plugged into the simulator satisfies. `train`
// and `fine_tune` are deterministic given their inputs; `predict` is a pure
// function of the parameters and the tokens.
template <class M>
concept SequenceLearner = std::copyable<M> &&
    requires(const M& m, std::span<const TaggedUtterance> data, const TrainConfig& cfg, const Tokens& toks) {
      { M::train(data, data, cfg) } -> std::same_as<M>;
      { m.fine_tune(data, data, cfg) } -> std::same_as<M>;
      { m.predict(toks) } -> std::same_as<std::vector<Concept>>;
      { m.version() } -> std::convertible_to<std::size_t>;
      { m.report() } -> std::convertible_to<const TrainingReport&>;
    };

template <SequenceLearner M>
double dev_f1(const M& model, std::span<const TaggedUtterance> dev) {
  std::vector<std::vector<Concept>> pred;
  pred.reserve(dev.size());
  for (const auto& u : dev) pred.push_back(model.predict(u.tokens));
  return chunk_prf(dev, pred).f1;
}

// Regularized linear tagger over sparse hashed features, decoded greedily
// left to right with the previous label as a feature.
//
// Features per token: identity, a +-2 word window and its bigrams, bags of
// the three words on each side, prefixes and suffixes up to length 3, a few
// shape flags, and gazetteer hits (B/I position and type) from the typed
// mentions seen in training data.
class FeatureTagger {
 public:
  static constexpr std::string_view kMagic = "otjl-feature-tagger";
  static constexpr int kFormatVersion = 1;

  FeatureTagger() = default;

  static FeatureTagger train(std::span<const TaggedUtterance> train, std::span<const TaggedUtterance> dev,
                             const TrainConfig& config) {
    if (train.empty()) throw DataError("train: empty training set");
    if (dev.empty()) throw DataError("train: empty development set");
    FeatureTagger m;
    m.seed_ = config.seed;
    m.version_ = 0;
    m.fit(train, dev, config, derive_seed(config.seed, "train"), true);
    return m;
  }

  // Warm start from the current parameters; the result is version + 1.
  FeatureTagger fine_tune(std::span<const TaggedUtterance> train_n, std::span<const TaggedUtterance> dev,
                          const TrainConfig& config) const {
    if (train_n.empty()) throw DataError("fine_tune: empty adaptation set");
    if (dev.empty()) throw DataError("fine_tune: empty development set");
    FeatureTagger m = *this;
    m.version_ = version_ + 1;
    m.fit(train_n, dev, config, derive_seed(config.seed, "fine-tune-" + std::to_string(m.version_)), false);
    return m;
  }

  std::vector<Tag> predict_tags(const Tokens& tokens) const {
    std::vector<Tag> tags(tokens.size());
    if (tokens.empty()) return tags;
    const auto feats = extract(tokens, true);
    std::vector<std::uint32_t> rows;
    std::array<float, kLabelCount> scores{};
    std::size_t prev = kStartLabel;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      rows.clear();
      for (auto h : feats[i]) {
        auto it = rows_.find(h);
        if (it != rows_.end()) rows.push_back(it->second);
      }
      if (auto it = rows_.find(prev_label_hash(prev)); it != rows_.end()) rows.push_back(it->second);
      score(rows, scores);
      std::size_t best = 0;
      for (std::size_t k = 1; k < kLabelCount; ++k)
        if (scores[k] > scores[best]) best = k;
      tags[i] = Tag::from_label(best);
      prev = best;
    }
    return tags;
  }

  std::vector<Concept> predict(const Tokens& tokens) const { return bio_decode(predict_tags(tokens), tokens); }

  std::size_t version() const { return version_; }
  std::uint64_t seed() const { return seed_; }
  const TrainingReport& report() const { return report_; }
  std::size_t feature_count() const { return rows_.size(); }
  const std::map<std::string, BaseType>& gazetteer() const { return gazetteer_; }

  void save(std::ostream& out) const {
    out << kMagic << ' ' << kFormatVersion << '\n';
    out << "version " << version_ << '\n';
    out << "seed " << seed_ << '\n';
    out << "labels " << kLabelCount;
    for (std::size_t k = 0; k < kLabelCount; ++k) out << ' ' << Tag::from_label(k).str();
    out << '\n';
    out << "gazetteer " << gazetteer_.size() << '\n';
    for (const auto& [surface, type] : gazetteer_) out << surface << '\t' << name_of(type) << '\n';
    std::vector<std::pair<std::uint64_t, std::uint32_t>> sorted(rows_.begin(), rows_.end());
    std::sort(sorted.begin(), sorted.end());
    out << "features " << sorted.size() << '\n';
    char buf[32];
    for (const auto& [hash, row] : sorted) {
      out << to_hex(hash);
      for (std::size_t k = 0; k < kLabelCount; ++k) {
        std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(weights_[row * kLabelCount + k]));
        out << buf;
      }
      out << '\n';
    }
  }

  static FeatureTagger load(std::istream& in, const std::string& name = "checkpoint") {
    FeatureTagger m;
    std::string word;
    int format = 0;
    if (!(in >> word >> format) || word != kMagic || format != kFormatVersion)
      throw DataError(name + ": not a feature-tagger checkpoint");
    std::size_t labels = 0, gz = 0, n = 0;
    if (!(in >> word >> m.version_) || word != "version") throw DataError(name + ": missing version");
    if (!(in >> word >> m.seed_) || word != "seed") throw DataError(name + ": missing seed");
    if (!(in >> word >> labels) || word != "labels" || labels != kLabelCount)
      throw DataError(name + ": label set mismatch");
    for (std::size_t k = 0; k < labels; ++k) {
      in >> word;
      if (Tag::parse(word).label() != k) throw DataError(name + ": label order mismatch");
    }
    if (!(in >> word >> gz) || word != "gazetteer") throw DataError(name + ": missing gazetteer");
    std::string line;
    std::getline(in, line);
    for (std::size_t i = 0; i < gz; ++i) {
      if (!std::getline(in, line)) throw DataError(name + ": truncated gazetteer");
      auto cols = split(line, '\t');
      auto type = cols.size() == 2 ? parse_base_type(cols[1]) : std::nullopt;
      if (!type) throw DataError(name + ": bad gazetteer entry");
      m.add_gazetteer_entry(cols[0], *type);
    }
    if (!(in >> word >> n) || word != "features") throw DataError(name + ": missing features");
    m.weights_.resize(n * kLabelCount);
    for (std::size_t r = 0; r < n; ++r) {
      std::string hex;
      if (!(in >> hex)) throw DataError(name + ": truncated features");
      std::uint64_t h = std::stoull(hex, nullptr, 16);
      m.rows_.emplace(h, static_cast<std::uint32_t>(r));
      for (std::size_t k = 0; k < kLabelCount; ++k) {
        double w;
        if (!(in >> w)) throw DataError(name + ": truncated weights");
        m.weights_[r * kLabelCount + k] = static_cast<float>(w);
      }
    }
    return m;
  }

 private:
  static constexpr std::size_t kStartLabel = kLabelCount;  // sentinel "previous label" at position 0

  using FeatureList = std::vector<std::uint64_t>;

  static std::uint64_t h(std::string_view prefix) { return fnv1a(prefix); }
  static std::uint64_t h(std::string_view prefix, std::string_view a) { return fnv1a(a, fnv1a(prefix)); }
  static std::uint64_t h(std::string_view prefix, std::string_view a, std::string_view b) {
    return fnv1a(b, fnv1a("|", fnv1a(a, fnv1a(prefix))));
  }

  static std::uint64_t prev_label_hash(std::size_t label) {
    static const auto table = [] {
      std::array<std::uint64_t, kLabelCount + 1> t{};
      for (std::size_t k = 0; k < kLabelCount; ++k) t[k] = h("t-1=", Tag::from_label(k).str());
      t[kLabelCount] = h("t-1=", "<s>");
      return t;
    }();
    return table[label];
  }

  void add_gazetteer_entry(const std::string& surface, BaseType type) {
    gazetteer_[surface] = type;
    gazetteer_max_len_ = std::max(gazetteer_max_len_, split(surface, ' ').size());
  }

  // Gazetteer features per token.
  std::vector<FeatureList> gazetteer_features(const Tokens& tokens) const {
    std::vector<FeatureList> out(tokens.size());
    if (gazetteer_.empty()) return out;
    auto matches = longest_matches<BaseType>(tokens, gazetteer_max_len_, [this](const std::string& key) {
      auto it = gazetteer_.find(key);
      return it == gazetteer_.end() ? std::nullopt : std::optional<BaseType>(it->second);
    });
    for (const auto& m : matches) {
      for (std::size_t k = m.span.begin; k < m.span.end; ++k) {
        const auto name = name_of(m.value);
        out[k].push_back(h(k == m.span.begin ? "g=B-" : "g=I-", name));
        out[k].push_back(h(k == m.span.begin ? "g=B" : "g=I"));
      }
    }
    return out;
  }

  std::vector<FeatureList> extract(const Tokens& tokens, bool with_gazetteer) const {
    const std::size_t n = tokens.size();
    auto word = [&](std::ptrdiff_t i) -> std::string_view {
      if (i < 0) return "<s>";
      if (i >= static_cast<std::ptrdiff_t>(n)) return "</s>";
      return tokens[static_cast<std::size_t>(i)];
    };
    std::vector<FeatureList> out(n);
    for (std::size_t u = 0; u < n; ++u) {
      const auto i = static_cast<std::ptrdiff_t>(u);
      auto& f = out[u];
      const std::string_view w = tokens[u];
      f.push_back(h("bias"));
      f.push_back(h("w0=", w));
      f.push_back(h("w-1=", word(i - 1)));
      f.push_back(h("w+1=", word(i + 1)));
      f.push_back(h("w-2=", word(i - 2)));
      f.push_back(h("w+2=", word(i + 2)));
      f.push_back(h("w-1w0=", word(i - 1), w));
      f.push_back(h("w0w+1=", w, word(i + 1)));
      for (std::ptrdiff_t d = 1; d <= 3; ++d) {
        f.push_back(h("L=", word(i - d)));
        f.push_back(h("R=", word(i + d)));
      }
      for (std::size_t k = 1; k <= 3 && k <= w.size(); ++k) {
        f.push_back(h("p=", w.substr(0, k)));
        f.push_back(h("s=", w.substr(w.size() - k)));
      }
      if (w.find('-') != std::string_view::npos) f.push_back(h("hyphen"));
      if (w.find('\'') != std::string_view::npos) f.push_back(h("apostrophe"));
      if (std::any_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c); }))
        f.push_back(h("digit"));
    }
    if (with_gazetteer) {
      auto gz = gazetteer_features(tokens);
      for (std::size_t u = 0; u < n; ++u) out[u].insert(out[u].end(), gz[u].begin(), gz[u].end());
    }
    return out;
  }

  std::uint32_t row_for(std::uint64_t hash) {
    auto [it, inserted] = rows_.emplace(hash, static_cast<std::uint32_t>(rows_.size()));
    if (inserted) weights_.resize(weights_.size() + kLabelCount, 0.0f);
    return it->second;
  }

  void score(std::span<const std::uint32_t> rows, std::array<float, kLabelCount>& scores) const {
    scores.fill(0.0f);
    for (auto r : rows) {
      const float* w = &weights_[static_cast<std::size_t>(r) * kLabelCount];
      for (std::size_t k = 0; k < kLabelCount; ++k) scores[k] += w[k];
    }
  }

  struct Prepared {
    std::vector<std::vector<std::uint32_t>> base;  // per token
    std::vector<std::vector<std::uint32_t>> gaz;   // per token
    std::vector<std::size_t> gold;
  };

  void fit(std::span<const TaggedUtterance> train, std::span<const TaggedUtterance> dev, const TrainConfig& cfg,
           std::uint64_t stream_seed, bool include_start_candidate) {
    for (const auto& u : train) {
      if (u.tokens.size() != u.tags.size() || !is_legal_bio(u.tags))
        throw DataError("training utterance with illegal BIO: " + join(u.tokens));
    }
    for (const auto& u : train)
      for (const auto& c : u.concepts()) add_gazetteer_entry(c.text(), c.type.base);

    std::array<std::uint32_t, kLabelCount + 1> prev_rows{};
    for (std::size_t k = 0; k <= kLabelCount; ++k) prev_rows[k] = row_for(prev_label_hash(k));

    std::vector<Prepared> data;
    data.reserve(train.size());
    for (const auto& u : train) {
      Prepared p;
      const auto base = extract(u.tokens, false);
      const auto gaz = gazetteer_features(u.tokens);
      p.base.resize(u.tokens.size());
      p.gaz.resize(u.tokens.size());
      for (std::size_t i = 0; i < u.tokens.size(); ++i) {
        for (auto hh : base[i]) p.base[i].push_back(row_for(hh));
        for (auto hh : gaz[i]) p.gaz[i].push_back(row_for(hh));
        p.gold.push_back(u.tags[i].label());
      }
      data.push_back(std::move(p));
    }

    report_ = TrainingReport{};
    report_.train_size = train.size();
    report_.start_dev_f1 = dev_f1(*this, dev);
    std::vector<float> best_weights;
    double best_f1 = -1;
    if (include_start_candidate) {
      best_f1 = report_.start_dev_f1;
      best_weights = weights_;
    }

    Rng rng(stream_seed);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::uint32_t> active;
    std::array<float, kLabelCount> scores{};
    std::array<float, kLabelCount> grad{};
    const auto lr = static_cast<float>(cfg.learning_rate);
    const auto l2 = static_cast<float>(cfg.l2);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
      rng.shuffle(order.begin(), order.end());
      for (auto idx : order) {
        const auto& p = data[idx];
        const bool use_gaz = !rng.bernoulli(cfg.gazetteer_dropout);
        std::size_t prev = kStartLabel;
        for (std::size_t i = 0; i < p.gold.size(); ++i) {
          active.assign(p.base[i].begin(), p.base[i].end());
          if (use_gaz) active.insert(active.end(), p.gaz[i].begin(), p.gaz[i].end());
          active.push_back(prev_rows[prev]);
          score(active, scores);
          const float mx = *std::max_element(scores.begin(), scores.end());
          float z = 0;
          for (std::size_t k = 0; k < kLabelCount; ++k) z += (grad[k] = std::exp(scores[k] - mx));
          for (std::size_t k = 0; k < kLabelCount; ++k) grad[k] /= z;
          grad[p.gold[i]] -= 1.0f;
          for (auto r : active) {
            float* w = &weights_[static_cast<std::size_t>(r) * kLabelCount];
            for (std::size_t k = 0; k < kLabelCount; ++k) w[k] -= lr * (grad[k] + l2 * w[k]);
          }
          prev = p.gold[i];
        }
      }
      const double f1 = dev_f1(*this, dev);
      report_.epoch_dev_f1.push_back(f1);
      if (f1 > best_f1) {
        best_f1 = f1;
        best_weights = weights_;
        report_.selected_epoch = epoch;
      }
    }
    if (!best_weights.empty()) weights_ = std::move(best_weights);
    report_.selected_dev_f1 = best_f1;
  }

  std::unordered_map<std::uint64_t, std::uint32_t> rows_;
  std::vector<float> weights_;
  std::map<std::string, BaseType> gazetteer_;
  std::size_t gazetteer_max_len_ = 0;
  std::size_t version_ = 0;
  std::uint64_t seed_ = 0;
  TrainingReport report_;
};

static_assert(SequenceLearner<FeatureTagger>);

}  // namespace otjl
