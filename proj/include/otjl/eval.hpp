#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "otjl/corpus.hpp"
#include "otjl/error.hpp"
#include "otjl/metrics.hpp"
#include "otjl/stm.hpp"
#include "otjl/tagger.hpp"

namespace otjl {

inline double weighted_f1(double f1_initial, double f1_learn, double f1_unknown) {
  return 0.2 * f1_initial + 0.4 * f1_learn + 0.4 * f1_unknown;
}

struct TestSets {
  std::vector<TaggedUtterance> initial;
  std::vector<TaggedUtterance> learn;
  std::vector<TaggedUtterance> unknown;
  std::optional<std::vector<TaggedUtterance>> real;

  void validate() const {
    if (initial.empty()) throw ConfigError("test_INITIAL is missing or empty");
    if (learn.empty()) throw ConfigError("test_LEARN is missing or empty");
    if (unknown.empty()) throw ConfigError("test_UNKNOWN is missing or empty");
    if (real && real->empty()) throw ConfigError("test_REAL was given but is empty");
  }
};

struct EvalRecord {
  std::size_t dialogue = 0;
  bool with_stm = false;
  std::size_t model_version = 0;
  std::size_t adaptation_count = 0;
  std::size_t stm_size = 0;
  double f1_initial = 0;
  double f1_learn = 0;
  double f1_unknown = 0;
  double f1_weighted = 0;
  std::optional<double> f1_real;
};

namespace detail {

struct SetScores {
  double initial = 0, learn = 0, unknown = 0;
  std::optional<double> real;
};

inline std::vector<std::vector<Concept>> gold_of(const std::vector<TaggedUtterance>& data) {
  std::vector<std::vector<Concept>> out;
  out.reserve(data.size());
  for (const auto& u : data) out.push_back(u.concepts());
  return out;
}

}  // namespace detail

// Scores models against frozen test sets. Model predictions are cached per
// model version and STM-merged predictions per (version, STM revision, KB
// revision), so evaluating after every dialogue only pays for what changed.
// The cache assumes versions identify models within one run.
class CheckpointEvaluator {
 public:
  explicit CheckpointEvaluator(const TestSets& tests) : tests_(tests) {
    tests.validate();
    sets_.push_back(&tests.initial);
    sets_.push_back(&tests.learn);
    sets_.push_back(&tests.unknown);
    if (tests.real) sets_.push_back(&*tests.real);
    for (const auto* s : sets_) gold_.push_back(detail::gold_of(*s));
  }

  template <SequenceLearner M>
  EvalRecord evaluate(const M& model, const ShortTermMemory& stm, const KnowledgeBase& kb, bool with_stm,
                      std::size_t dialogue = 0, std::size_t adaptations = 0) {
    refresh_model(model);
    EvalRecord r;
    r.dialogue = dialogue;
    r.with_stm = with_stm;
    r.model_version = model.version();
    r.adaptation_count = adaptations;
    r.stm_size = stm.size();
    const detail::SetScores* s = &model_scores_;
    if (with_stm && !stm.empty()) {
      refresh_merged(stm, kb);
      s = &merged_scores_;
    }
    r.f1_initial = s->initial;
    r.f1_learn = s->learn;
    r.f1_unknown = s->unknown;
    r.f1_real = s->real;
    r.f1_weighted = weighted_f1(r.f1_initial, r.f1_learn, r.f1_unknown);
    return r;
  }

 private:
  template <SequenceLearner M>
  void refresh_model(const M& model) {
    if (model_version_ && *model_version_ == model.version()) return;
    model_version_ = model.version();
    merged_key_.reset();
    preds_.assign(sets_.size(), {});
    for (std::size_t k = 0; k < sets_.size(); ++k) {
      preds_[k].reserve(sets_[k]->size());
      for (const auto& u : *sets_[k]) preds_[k].push_back(model.predict(u.tokens));
    }
    model_scores_ = score(preds_);
  }

  void refresh_merged(const ShortTermMemory& stm, const KnowledgeBase& kb) {
    const std::array<std::uint64_t, 3> key{*model_version_, stm.revision(), kb.revision()};
    if (merged_key_ && *merged_key_ == key) return;
    merged_key_ = key;
    std::vector<std::vector<std::vector<Concept>>> merged(sets_.size());
    for (std::size_t k = 0; k < sets_.size(); ++k) {
      merged[k].reserve(sets_[k]->size());
      for (std::size_t i = 0; i < sets_[k]->size(); ++i)
        merged[k].push_back(merge(preds_[k][i], stm.lookup((*sets_[k])[i].tokens), kb));
    }
    merged_scores_ = score(merged);
  }

  detail::SetScores score(const std::vector<std::vector<std::vector<Concept>>>& pred) const {
    detail::SetScores s;
    s.initial = chunk_prf(gold_[0], pred[0]).f1;
    s.learn = chunk_prf(gold_[1], pred[1]).f1;
    s.unknown = chunk_prf(gold_[2], pred[2]).f1;
    if (sets_.size() > 3) s.real = chunk_prf(gold_[3], pred[3]).f1;
    return s;
  }

  const TestSets& tests_;
  std::vector<const std::vector<TaggedUtterance>*> sets_;
  std::vector<std::vector<std::vector<Concept>>> gold_;
  std::vector<std::vector<std::vector<Concept>>> preds_;
  std::optional<std::size_t> model_version_;
  std::optional<std::array<std::uint64_t, 3>> merged_key_;
  detail::SetScores model_scores_, merged_scores_;
};

// One-shot evaluation without caching.
template <SequenceLearner M>
EvalRecord evaluate_checkpoint(const M& model, const ShortTermMemory& stm, const KnowledgeBase& kb,
                               const TestSets& tests, bool with_stm, std::size_t dialogue = 0,
                               std::size_t adaptations = 0) {
  CheckpointEvaluator ev(tests);
  return ev.evaluate(model, stm, kb, with_stm, dialogue, adaptations);
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kEvalCsvHeader =
    "dialogue,with_stm,model_version,adaptations,stm_size,f1_initial,f1_learn,f1_unknown,f1_weighted,f1_real";

inline std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline std::string to_csv_row(const EvalRecord& r) {
  std::string out = std::to_string(r.dialogue) + ',' + (r.with_stm ? "1" : "0") + ',' +
                    std::to_string(r.model_version) + ',' + std::to_string(r.adaptation_count) + ',' +
                    std::to_string(r.stm_size) + ',' + format_score(r.f1_initial) + ',' + format_score(r.f1_learn) +
                    ',' + format_score(r.f1_unknown) + ',' + format_score(r.f1_weighted) + ',';
  if (r.f1_real) out += format_score(*r.f1_real);
  return out;
}

inline std::vector<EvalRecord> read_eval_csv(std::istream& in, const std::string& name) {
  std::vector<EvalRecord> out;
  std::string line;
  if (!std::getline(in, line) || line != kEvalCsvHeader) throw DataError(name + ": unexpected CSV header");
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != 10) throw DataError(located(name, lineno, "expected 10 columns"));
    try {
      EvalRecord r;
      r.dialogue = std::stoul(cols[0]);
      r.with_stm = cols[1] == "1";
      r.model_version = std::stoul(cols[2]);
      r.adaptation_count = std::stoul(cols[3]);
      r.stm_size = std::stoul(cols[4]);
      r.f1_initial = std::stod(cols[5]);
      r.f1_learn = std::stod(cols[6]);
      r.f1_unknown = std::stod(cols[7]);
      r.f1_weighted = std::stod(cols[8]);
      if (!cols[9].empty()) r.f1_real = std::stod(cols[9]);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw DataError(located(name, lineno, "malformed number"));
    }
  }
  return out;
}

inline std::vector<EvalRecord> read_eval_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  return read_eval_csv(in, path);
}

// ---------------------------------------------------------------------------
// STM delta analysis

struct DeltaStats {
  double max = 0, min = 0, mean = 0, median = 0;
};

inline DeltaStats summarize(std::vector<double> v) {
  DeltaStats s;
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  const std::size_t n = v.size();
  s.median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
  return s;
}

struct DeltaWindow {
  std::size_t adaptations = 0;  // window k lies between adaptation k and k+1
  std::size_t checkpoints = 0;
  std::size_t first_dialogue = 0;
  std::size_t last_dialogue = 0;
  DeltaStats initial, learn, unknown, weighted;
};

struct DeltaReport {
  std::vector<DeltaWindow> windows;
  DeltaStats initial, learn, unknown, weighted;  // over every checkpoint
  std::size_t checkpoints = 0;
};

// STM contribution (with-STM F1 minus model F1) per checkpoint, grouped by
// the number of adaptations performed so far. A run with k adaptations has
// k + 1 windows.
inline DeltaReport delta_analysis(const std::vector<EvalRecord>& records, std::size_t adaptation_count) {
  std::map<std::size_t, const EvalRecord*> model, stm;
  for (const auto& r : records) (r.with_stm ? stm : model)[r.dialogue] = &r;
  DeltaReport rep;
  rep.windows.resize(adaptation_count + 1);
  for (std::size_t k = 0; k < rep.windows.size(); ++k) rep.windows[k].adaptations = k;
  std::vector<std::vector<double>> wi(rep.windows.size()), wl(wi.size()), wu(wi.size()), ww(wi.size());
  std::vector<double> ai, al, au, aw;
  for (const auto& [d, m] : model) {
    auto it = stm.find(d);
    if (it == stm.end()) continue;
    const EvalRecord& s = *it->second;
    const std::size_t k = std::min(m->adaptation_count, adaptation_count);
    auto& w = rep.windows[k];
    if (w.checkpoints == 0) w.first_dialogue = d;
    w.last_dialogue = d;
    ++w.checkpoints;
    ++rep.checkpoints;
    wi[k].push_back(s.f1_initial - m->f1_initial);
    wl[k].push_back(s.f1_learn - m->f1_learn);
    wu[k].push_back(s.f1_unknown - m->f1_unknown);
    ww[k].push_back(s.f1_weighted - m->f1_weighted);
    ai.push_back(wi[k].back());
    al.push_back(wl[k].back());
    au.push_back(wu[k].back());
    aw.push_back(ww[k].back());
  }
  for (std::size_t k = 0; k < rep.windows.size(); ++k) {
    rep.windows[k].initial = summarize(wi[k]);
    rep.windows[k].learn = summarize(wl[k]);
    rep.windows[k].unknown = summarize(wu[k]);
    rep.windows[k].weighted = summarize(ww[k]);
  }
  rep.initial = summarize(ai);
  rep.learn = summarize(al);
  rep.unknown = summarize(au);
  rep.weighted = summarize(aw);
  return rep;
}

// ---------------------------------------------------------------------------
// Comparison table

struct TableRow {
  std::string label;
  double f1_initial = 0, f1_learn = 0, f1_unknown = 0, f1_weighted = 0;
  std::optional<double> f1_real;
};

inline TableRow row_from(std::string label, const EvalRecord& r) {
  return {std::move(label), r.f1_initial, r.f1_learn, r.f1_unknown, r.f1_weighted, r.f1_real};
}

// Absolute F1 per test set followed by the signed difference to the first
// row, which is expected to be the initial model.
inline std::string format_table(const std::vector<TableRow>& rows) {
  if (rows.empty()) return "";
  const bool has_real = std::any_of(rows.begin(), rows.end(), [](const TableRow& r) { return r.f1_real.has_value(); });
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.label.size());
  auto cell = [](double v, std::optional<double> base) {
    char buf[48];
    if (base)
      std::snprintf(buf, sizeof buf, "%7.2f (%+.2f)", v, v - *base);
    else
      std::snprintf(buf, sizeof buf, "%7.2f         ", v);
    return std::string(buf);
  };
  std::ostringstream out;
  auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
  out << pad("model") << "  " << "test_INITIAL     " << "  " << "test_LEARN       " << "  "
      << "test_UNKNOWN     " << "  " << "weighted         ";
  if (has_real) out << "  test_REAL";
  out << '\n';
  const TableRow& base = rows.front();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    auto b = [&](double v) { return i == 0 ? std::nullopt : std::optional<double>(v); };
    out << pad(r.label) << "  " << cell(r.f1_initial, b(base.f1_initial)) << "  "
        << cell(r.f1_learn, b(base.f1_learn)) << "  " << cell(r.f1_unknown, b(base.f1_unknown)) << "  "
        << cell(r.f1_weighted, b(base.f1_weighted));
    if (has_real) {
      if (r.f1_real)
        out << "  " << cell(*r.f1_real, base.f1_real && i > 0 ? base.f1_real : std::nullopt);
      else
        out << "  -";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace otjl
