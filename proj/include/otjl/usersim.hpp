#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "otjl/acquisition.hpp"
#include "otjl/adaptation.hpp"
#include "otjl/corpus.hpp"
#include "otjl/eval.hpp"
#include "otjl/stm.hpp"
#include "otjl/tagger.hpp"

namespace otjl {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kClosingTurn = "great, thanks";
inline constexpr std::string_view kGoodbyeTurn = "goodbye";

// "You misunderstood me. I want a recipe with A and B and without C."
inline std::string verbalize_criteria(std::span<const Concept> criteria) {
  if (criteria.empty()) throw ContractViolation("verbalize_criteria: no criteria");
  std::vector<std::string> pos, neg;
  for (const auto& c : criteria) (c.type.is_negative() ? neg : pos).push_back(c.text());
  std::vector<std::string> parts;
  if (!pos.empty()) parts.push_back("with " + join(pos, " and "));
  for (const auto& n : neg) parts.push_back("without " + n);
  return "You misunderstood me. I want a recipe " + join(parts, " and ") + ".";
}

// Order-insensitive equality of (type, mention) multisets.
inline bool same_concepts(std::span<const Concept> a, std::span<const Concept> b) {
  if (a.size() != b.size()) return false;
  auto keys = [](std::span<const Concept> cs) {
    std::vector<std::pair<std::size_t, std::string>> k;
    for (const auto& c : cs) k.emplace_back(c.type.index(), c.text());
    std::sort(k.begin(), k.end());
    return k;
  };
  return keys(a) == keys(b);
}

enum class Mode { rpm, rm, stm_only, simu_upper };

inline std::string_view name_of(Mode m) {
  switch (m) {
    case Mode::rpm: return "RPM";
    case Mode::rm: return "RM";
    case Mode::stm_only: return "STM_ONLY";
    case Mode::simu_upper: return "SIMU_UPPER";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  for (Mode m : {Mode::rpm, Mode::rm, Mode::stm_only, Mode::simu_upper})
    if (name_of(m) == s) return m;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected RPM, RM, STM_ONLY or SIMU_UPPER)");
}

struct SimulationSettings {
  Mode mode = Mode::rpm;
  AdaptationPolicy policy;
  TrainConfig train;
  std::size_t checkpoint_every = 1;
  std::uint64_t seed = 1;
  MisunderstandingDetector detector;
  Stopwords stopwords = default_stopwords();
  NegationRule negation;
};

// Everything the deployed system owns and mutates while talking to users.
template <SequenceLearner M>
struct SystemState {
  M model;
  ShortTermMemory stm;
  KnowledgeBase kb;
  KnowledgeStore store;
  const LexiconOracle* oracle = nullptr;
  std::size_t adaptations = 0;

  std::vector<Concept> understand(const Tokens& tokens) const {
    return merge(model.predict(tokens), stm.lookup(tokens), kb);
  }
};

enum class DialogueOutcome { understood_first_try, corrected, abandoned };

inline std::string_view name_of(DialogueOutcome o) {
  switch (o) {
    case DialogueOutcome::understood_first_try: return "understood_first_try";
    case DialogueOutcome::corrected: return "corrected";
    case DialogueOutcome::abandoned: return "abandoned";
  }
  return "?";
}

struct Turn {
  std::string speaker;  // "user" or "system"
  std::string text;
  std::vector<Concept> concepts;
};

struct DialogueTranscript {
  std::vector<Turn> turns;
  DialogueOutcome outcome = DialogueOutcome::abandoned;
  std::optional<CorrectionAttempt> correction;
  std::optional<KnowledgeDelta> delta;  // set when something was recorded
  std::vector<std::string> completed;    // confirmed mentions the KB was missing
};

inline std::string render_concepts(std::span<const Concept> cs) {
  std::vector<std::string> parts;
  for (const auto& c : cs) parts.push_back(c.type.name() + "=" + c.text());
  return "Here are recipes for: " + join(parts, ", ");
}

// The user asks with the goal's first utterance. If the reported concepts
// equal the goal the user closes politely and the query is stored as an
// imitation example. Otherwise the user rephrases with the criteria; a
// correction that matches is confirmed by a normal closing turn and learned
// from, anything else ends with a goodbye and nothing is learned.
template <SequenceLearner M>
DialogueTranscript run_dialogue(SystemState<M>& sys, const TaggedUtterance& goal, std::size_t dialogue,
                                const SimulationSettings& settings) {
  DialogueTranscript t;
  const auto criteria = goal.concepts();
  const Tokens& query = goal.tokens;

  t.turns.push_back({"user", join(query), {}});
  const auto first = sys.understand(query);
  t.turns.push_back({"system", render_concepts(first), first});

  std::optional<TaggedUtterance> to_record;
  if (same_concepts(first, criteria)) {
    t.turns.push_back({"user", std::string(kClosingTurn), {}});
    t.outcome = DialogueOutcome::understood_first_try;
    for (const auto& c : first) {
      const auto surface = c.text();
      if (!sys.kb.lookup(surface) && kb_complete(sys.kb, surface, *sys.oracle).status == KbCompletion::Status::completed)
        t.completed.push_back(surface);
    }
    try {
      to_record = TaggedUtterance::from_concepts(query, first, Provenance::acquired);
    } catch (const ContractViolation&) {
      // overlapping output cannot be written as BIO; nothing to store
    }
  } else if (criteria.empty()) {
    t.turns.push_back({"user", std::string(kGoodbyeTurn), {}});
    t.outcome = DialogueOutcome::abandoned;
  } else {
    const std::string rephrase = verbalize_criteria(criteria);
    t.turns.push_back({"user", rephrase, {}});
    if (settings.detector(rephrase)) {
      const Tokens para = tokenize(rephrase);
      auto attempt = label_query(query, para, common_chunks(query, para, settings.stopwords), sys.kb, *sys.oracle,
                                 settings.negation);
      std::vector<Concept> corrected;
      if (attempt.labeled) corrected = attempt.labeled->concepts();
      t.turns.push_back({"system", attempt.labeled ? render_concepts(corrected) : "Sorry, I did not get that.",
                         corrected});
      if (attempt.labeled && same_concepts(corrected, criteria)) {
        t.turns.push_back({"user", std::string(kClosingTurn), {}});
        t.outcome = DialogueOutcome::corrected;
        to_record = *attempt.labeled;
      } else {
        if (attempt.outcome == CorrectionOutcome::labeled) attempt.outcome = CorrectionOutcome::user_abandoned;
        t.turns.push_back({"user", std::string(kGoodbyeTurn), {}});
        t.outcome = DialogueOutcome::abandoned;
      }
      t.correction = std::move(attempt);
    } else {
      t.outcome = DialogueOutcome::abandoned;
    }
  }

  if (to_record && !settings.detector(t.turns.back().text)) {
    to_record->origin = goal.origin;
    to_record->provenance = Provenance::acquired;
    t.delta = record_knowledge(sys.store, sys.stm, *to_record, dialogue, sys.oracle);
  }
  return t;
}

struct RunStats {
  std::size_t dialogues = 0;
  std::size_t understood_first_try = 0;
  std::size_t corrected = 0;
  std::size_t abandoned = 0;
  std::size_t corrections_attempted = 0;
  std::size_t corrections_labeled = 0;
  std::size_t kb_miss = 0;
  std::size_t no_chunks = 0;
  std::size_t kb_completions = 0;
  std::size_t adaptations = 0;
  std::size_t guard_violations = 0;
  std::size_t acquired_mentions = 0;
  std::size_t acquired_patterns = 0;
  std::size_t acquired_examples = 0;

  // Share of misunderstanding dialogues whose initial query got labeled.
  double annotation_success_rate() const {
    return corrections_attempted ? static_cast<double>(corrections_labeled) / static_cast<double>(corrections_attempted)
                                 : 0.0;
  }
};

inline Json to_json(const RunStats& s) {
  return Json{{"dialogues", s.dialogues},
              {"understood_first_try", s.understood_first_try},
              {"corrected", s.corrected},
              {"abandoned", s.abandoned},
              {"corrections_attempted", s.corrections_attempted},
              {"corrections_labeled", s.corrections_labeled},
              {"kb_miss", s.kb_miss},
              {"no_chunks", s.no_chunks},
              {"kb_completions", s.kb_completions},
              {"adaptations", s.adaptations},
              {"guard_violations", s.guard_violations},
              {"acquired_mentions", s.acquired_mentions},
              {"acquired_patterns", s.acquired_patterns},
              {"acquired_examples", s.acquired_examples},
              {"annotation_success_rate", s.annotation_success_rate()}};
}

inline Json to_json(const AdaptationEvent& e) {
  return Json{{"event", "adaptation"},
              {"n", e.index},
              {"dialogue", e.dialogue},
              {"trigger", e.trigger},
              {"counters", {{"mentions", e.counters.mentions}, {"patterns", e.counters.patterns},
                            {"examples", e.counters.examples}}},
              {"train_size", e.train_size},
              {"replay", {{"generated", e.replay.generated},
                          {"examples", e.replay.examples},
                          {"with_new_pattern", e.replay.with_new_pattern},
                          {"with_new_mention", e.replay.with_new_mention},
                          {"with_initial_pattern", e.replay.with_initial_pattern},
                          {"with_initial_mention", e.replay.with_initial_mention}}},
              {"dev_before", format_score(e.dev_before)},
              {"dev_after", format_score(e.dev_after)},
              {"guard_ok", e.guard_ok},
              {"model_version", e.model_version}};
}

// Hooks for streaming results out while the run progresses.
template <class M>
struct SimulationObserver {
  std::function<void(const Json&)> on_event;
  std::function<void(const EvalRecord&)> on_record;
  std::function<void(std::size_t, const TrainLearnSet&)> on_train_learn;
  std::function<void(const AdaptationEvent&, const M&)> on_adapted;
};

template <SequenceLearner M>
struct SimulationResult {
  M model;
  std::vector<EvalRecord> records;
  std::vector<AdaptationEvent> adaptations;
  RunStats stats;
  std::size_t stm_final_size = 0;
};

namespace detail {

inline Json dialogue_event(std::size_t i, const DialogueTranscript& t) {
  Json e{{"event", "dialogue"}, {"dialogue", i}, {"outcome", name_of(t.outcome)}, {"turns", t.turns.size()}};
  if (t.correction) {
    const auto& c = *t.correction;
    Json chunks = Json::array();
    for (const auto& ch : c.chunks) chunks.push_back(join(ch.tokens));
    e["correction"] = {{"outcome", name_of(c.outcome)}, {"chunks", chunks}, {"completed", c.completed},
                       {"unresolved", c.unresolved}};
  }
  if (t.delta) {
    e["learned"] = {{"mentions", t.delta->counts.mentions},
                    {"patterns", t.delta->counts.patterns},
                    {"examples", t.delta->counts.examples},
                    {"stm_added", t.delta->mentions}};
    if (t.delta->pattern) e["learned"]["pattern"] = *t.delta->pattern;
  }
  return e;
}

}  // namespace detail

// The simulated production phase: one dialogue per goal, in order, with
// acquisition, adaptation and evaluation after each dialogue.
template <SequenceLearner M>
SimulationResult<M> run_simulation(SystemState<M> sys, std::span<const TaggedUtterance> goals,
                                   std::span<const TaggedUtterance> dev, CheckpointEvaluator& evaluator,
                                   const SimulationSettings& settings, const SimulationObserver<M>& obs = {}) {
  if (!sys.oracle) throw ContractViolation("run_simulation: no lexicon oracle");
  settings.policy.validate();
  SimulationResult<M> res{sys.model, {}, {}, {}, 0};
  auto emit = [&](const Json& e) {
    if (obs.on_event) obs.on_event(e);
  };
  auto checkpoint = [&](std::size_t dialogue) {
    for (bool with_stm : {false, true}) {
      auto r = evaluator.evaluate(sys.model, sys.stm, sys.kb, with_stm, dialogue, sys.adaptations);
      if (obs.on_record) obs.on_record(r);
      res.records.push_back(r);
    }
  };

  emit(Json{{"event", "start"},
            {"mode", name_of(settings.mode)},
            {"seed", settings.seed},
            {"dialogues", goals.size()},
            {"model_version", sys.model.version()},
            {"kb_size", sys.kb.size()},
            {"kb_ablated", sys.kb.ablated_count()}});
  checkpoint(0);

  if (settings.mode == Mode::simu_upper) {
    AdaptationEvent ev;
    ev.index = 1;
    ev.dialogue = goals.size();
    ev.trigger = "simulation";
    ev.train_size = goals.size();
    sys.model = sys.model.fine_tune(goals, dev, settings.train);
    ev.dev_before = sys.model.report().start_dev_f1;
    ev.dev_after = sys.model.report().selected_dev_f1;
    ev.guard_ok = ev.dev_after >= ev.dev_before - settings.policy.dev_guard;
    ev.model_version = sys.model.version();
    sys.adaptations = 1;
    res.stats.adaptations = 1;
    res.stats.guard_violations += ev.guard_ok ? 0 : 1;
    emit(to_json(ev));
    if (obs.on_adapted) obs.on_adapted(ev, sys.model);
    res.adaptations.push_back(ev);
    checkpoint(goals.size());
  } else {
    Rng rng(derive_seed(settings.seed, "adaptation"));
    AdaptationPolicy policy = settings.policy;
    policy.mode = settings.mode == Mode::rm ? ReplayMode::rm : ReplayMode::rpm;
    for (std::size_t k = 0; k < goals.size(); ++k) {
      const std::size_t dialogue = k + 1;
      auto t = run_dialogue(sys, goals[k], dialogue, settings);
      auto& st = res.stats;
      ++st.dialogues;
      switch (t.outcome) {
        case DialogueOutcome::understood_first_try: ++st.understood_first_try; break;
        case DialogueOutcome::corrected: ++st.corrected; break;
        case DialogueOutcome::abandoned: ++st.abandoned; break;
      }
      if (t.correction) {
        ++st.corrections_attempted;
        st.kb_completions += t.correction->completed.size();
        if (t.correction->labeled) ++st.corrections_labeled;
        if (t.correction->outcome == CorrectionOutcome::kb_miss) ++st.kb_miss;
        if (t.correction->outcome == CorrectionOutcome::no_chunks) ++st.no_chunks;
        for (const auto& s : t.correction->completed)
          emit(Json{{"event", "kb_completion"}, {"dialogue", dialogue}, {"surface", s},
                    {"type", name_of(*sys.kb.lookup(s))}});
      }
      st.kb_completions += t.completed.size();
      for (const auto& s : t.completed)
        emit(Json{{"event", "kb_completion"}, {"dialogue", dialogue}, {"surface", s},
                  {"type", name_of(*sys.kb.lookup(s))}});
      if (t.delta) {
        st.acquired_mentions += t.delta->counts.mentions;
        st.acquired_patterns += t.delta->counts.patterns;
        st.acquired_examples += t.delta->counts.examples;
      }
      emit(detail::dialogue_event(dialogue, t));

      if (settings.mode != Mode::stm_only && should_adapt(sys.store.counters(), policy)) {
        const std::size_t stm_before = sys.stm.size();
        auto adapted = adapt(sys.model, sys.stm, sys.store, dev, policy, settings.train, rng, dialogue,
                             sys.adaptations + 1, obs.on_train_learn);
        sys.model = std::move(adapted.model);
        ++sys.adaptations;
        ++st.adaptations;
        if (!adapted.event.guard_ok) ++st.guard_violations;
        emit(to_json(adapted.event));
        emit(Json{{"event", "stm_clear"}, {"dialogue", dialogue}, {"entries", stm_before}});
        if (obs.on_adapted) obs.on_adapted(adapted.event, sys.model);
        res.adaptations.push_back(std::move(adapted.event));
      }

      if (dialogue % settings.checkpoint_every == 0 || dialogue == goals.size()) checkpoint(dialogue);
    }
  }

  res.stm_final_size = sys.stm.size();
  Json stm_entries = Json::array();
  for (const auto& [surface, e] : sys.stm.entries())
    stm_entries.push_back({{"surface", surface}, {"type", name_of(e.type)}, {"added_at", e.added_at}});
  emit(Json{{"event", "end"}, {"stats", to_json(res.stats)}, {"stm", stm_entries}});
  res.model = std::move(sys.model);
  return res;
}

}  // namespace otjl
