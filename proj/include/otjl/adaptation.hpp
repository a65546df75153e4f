#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "otjl/acquisition.hpp"
#include "otjl/corpus.hpp"
#include "otjl/rng.hpp"
#include "otjl/stm.hpp"
#include "otjl/tagger.hpp"

namespace otjl {

enum class ReplayMode { rpm, rm };

inline std::string_view name_of(ReplayMode m) { return m == ReplayMode::rpm ? "RPM" : "RM"; }

struct AdaptationPolicy {
  std::size_t min_mentions = 5;
  std::size_t min_patterns = 10;
  std::size_t min_examples = 50;
  ReplayMode mode = ReplayMode::rpm;
  std::size_t budget = 1000;
  // Allowed dev F1 drop per fine-tune before the event is flagged.
  double dev_guard = 2.0;

  void validate() const {
    if (budget == 0) throw ConfigError("adaptation budget must be at least 1");
    if (min_mentions == 0 && min_patterns == 0 && min_examples == 0)
      throw ConfigError("adaptation thresholds must not all be zero");
  }
};

// Which condition fired, or nothing. Thresholds of 0 are disabled.
inline std::optional<std::string> adaptation_trigger(const Counters& c, const AdaptationPolicy& p) {
  std::vector<std::string> fired;
  if (p.min_mentions > 0 && c.mentions >= p.min_mentions) fired.emplace_back("mentions");
  if (p.min_patterns > 0 && c.patterns >= p.min_patterns) fired.emplace_back("patterns");
  if (p.min_examples > 0 && c.examples >= p.min_examples) fired.emplace_back("examples");
  if (fired.empty()) return std::nullopt;
  return join(fired, "+");
}

inline bool should_adapt(const Counters& c, const AdaptationPolicy& p) { return adaptation_trigger(c, p).has_value(); }

struct ReplayStats {
  std::size_t generated = 0;
  std::size_t examples = 0;
  std::size_t with_new_pattern = 0;
  std::size_t with_new_mention = 0;
  std::size_t with_initial_pattern = 0;
  std::size_t with_initial_mention = 0;
};

struct TrainLearnSet {
  std::vector<TaggedUtterance> utterances;
  ReplayStats stats;
};

namespace detail {

struct ReplayPools {
  std::vector<const Pattern*> history_patterns, new_patterns;
  MentionPools history_mentions, new_mentions;
};

inline const Mention* draw_mention(const MentionPools& preferred, const MentionPools& fallback, BaseType t,
                                   Rng& rng, const Pattern& p) {
  const auto i = static_cast<std::size_t>(t);
  if (!preferred[i].empty()) return rng.pick(preferred[i]);
  if (!fallback[i].empty()) return rng.pick(fallback[i]);
  throw ConfigError("no " + std::string(name_of(t)) + " mention available to fill pattern " + p.id);
}

}  // namespace detail

// The generated part of train_LEARN_n plus the stored new examples.
//
// Every new pattern and every new mention is first rendered once so that it
// is guaranteed to occur; the rest of the budget follows the replay mode:
//   RM:  pattern uniform over history and new patterns; each slot takes a new
//        mention of its type with probability 0.5.
//   RPM: with probability 0.5 a new pattern (if any) filled with history
//        mentions; otherwise a history pattern whose slots take a new mention
//        with probability 0.5.
// A new mention therefore shows up about half as often under RPM.
inline TrainLearnSet build_train_learn(const KnowledgeStore& store, const AdaptationPolicy& policy, Rng& rng) {
  detail::ReplayPools pools;
  for (const auto& p : store.history_patterns()) pools.history_patterns.push_back(&p);
  for (const auto& p : store.new_patterns()) pools.new_patterns.push_back(&p);
  for (const auto& m : store.history_mentions()) pools.history_mentions[static_cast<std::size_t>(m.type)].push_back(&m);
  for (const auto& m : store.new_mentions()) pools.new_mentions[static_cast<std::size_t>(m.type)].push_back(&m);
  if (pools.history_patterns.empty() && pools.new_patterns.empty())
    throw ConfigError("no pattern available to build an adaptation set");

  std::vector<const Pattern*> all_patterns = pools.history_patterns;
  all_patterns.insert(all_patterns.end(), pools.new_patterns.begin(), pools.new_patterns.end());

  std::set<const Mention*> new_mention_set;
  for (const auto& m : store.new_mentions()) new_mention_set.insert(&m);

  TrainLearnSet out;
  auto& stats = out.stats;
  std::vector<const Mention*> bindings;

  auto emit = [&](const Pattern& p, bool new_pattern) {
    auto u = render_pattern(p, bindings);
    ++stats.generated;
    if (new_pattern) ++stats.with_new_pattern;
    if (p.effective_split() == Split::initial) ++stats.with_initial_pattern;
    bool has_new = false, has_initial = false;
    for (const auto* m : bindings) {
      has_new |= new_mention_set.contains(m);
      has_initial |= m->effective_split() == Split::initial;
    }
    if (has_new) ++stats.with_new_mention;
    if (has_initial) ++stats.with_initial_mention;
    out.utterances.push_back(std::move(u));
  };

  auto fill = [&](const Pattern& p, double p_new) {
    bindings.clear();
    for (const auto& slot : p.slots()) {
      const bool want_new = p_new > 0 && rng.bernoulli(p_new);
      bindings.push_back(want_new ? detail::draw_mention(pools.new_mentions, pools.history_mentions, slot.base, rng, p)
                                  : detail::draw_mention(pools.history_mentions, pools.new_mentions, slot.base, rng, p));
    }
  };

  // Coverage: each new pattern once, each new mention once.
  for (const Pattern* p : pools.new_patterns) {
    if (stats.generated >= policy.budget) break;
    fill(*p, 0.0);
    emit(*p, true);
  }
  for (const auto& m : store.new_mentions()) {
    if (stats.generated >= policy.budget) break;
    std::vector<const Pattern*> hosts;
    for (const Pattern* p : all_patterns)
      if (p->has_slot(m.type)) hosts.push_back(p);
    if (hosts.empty()) continue;
    const Pattern& p = *rng.pick(hosts);
    fill(p, 0.0);
    for (std::size_t k = 0; k < bindings.size(); ++k)
      if (p.slots()[k].base == m.type) {
        bindings[k] = &m;
        break;
      }
    emit(p, std::find(pools.new_patterns.begin(), pools.new_patterns.end(), &p) != pools.new_patterns.end());
  }

  while (stats.generated < policy.budget) {
    if (policy.mode == ReplayMode::rm) {
      const Pattern& p = *rng.pick(all_patterns);
      fill(p, 0.5);
      emit(p, std::find(pools.new_patterns.begin(), pools.new_patterns.end(), &p) != pools.new_patterns.end());
    } else if (rng.bernoulli(0.5)) {
      const bool have_new = !pools.new_patterns.empty();
      const Pattern& p = have_new ? *rng.pick(pools.new_patterns) : *rng.pick(pools.history_patterns);
      fill(p, 0.0);
      emit(p, have_new);
    } else {
      const Pattern& p = pools.history_patterns.empty() ? *rng.pick(pools.new_patterns) : *rng.pick(pools.history_patterns);
      fill(p, 0.5);
      emit(p, pools.history_patterns.empty());
    }
  }

  for (const auto& e : store.new_examples()) {
    out.utterances.push_back(e.utterance);
    ++stats.examples;
  }
  return out;
}

struct AdaptationEvent {
  std::size_t index = 0;  // n, from 1
  std::size_t dialogue = 0;
  std::string trigger;
  Counters counters;
  std::size_t train_size = 0;
  ReplayStats replay;
  double dev_before = 0;
  double dev_after = 0;
  bool guard_ok = true;
  std::size_t model_version = 0;
};

template <SequenceLearner M>
struct Adapted {
  M model;
  AdaptationEvent event;
};

// Fine-tunes on a fresh train_LEARN_n, clears the STM and folds the new
// knowledge into the replay history.
template <SequenceLearner M>
Adapted<M> adapt(const M& model, ShortTermMemory& stm, KnowledgeStore& store, std::span<const TaggedUtterance> dev,
                 const AdaptationPolicy& policy, const TrainConfig& train, Rng& rng, std::size_t dialogue,
                 std::size_t index, const std::function<void(std::size_t, const TrainLearnSet&)>& observe = {}) {
  AdaptationEvent ev;
  ev.index = index;
  ev.dialogue = dialogue;
  ev.counters = store.counters();
  ev.trigger = adaptation_trigger(ev.counters, policy).value_or("forced");
  auto set = build_train_learn(store, policy, rng);
  ev.train_size = set.utterances.size();
  ev.replay = set.stats;
  if (observe) observe(index, set);
  M next = model.fine_tune(set.utterances, dev, train);
  ev.dev_before = next.report().start_dev_f1;
  ev.dev_after = next.report().selected_dev_f1;
  ev.guard_ok = ev.dev_after >= ev.dev_before - policy.dev_guard;
  ev.model_version = next.version();
  stm.clear();
  store.commit();
  return {std::move(next), std::move(ev)};
}

}  // namespace otjl
