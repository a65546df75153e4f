#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"

using namespace fx;

TEST(Detector, DefaultPatterns) {
  MisunderstandingDetector d;
  EXPECT_TRUE(d("You misunderstood me. I want a recipe with pasta."));
  EXPECT_TRUE(d("that's not what I asked"));
  EXPECT_TRUE(d("This is WRONG"));
  EXPECT_FALSE(d("thanks, that sounds great"));
  EXPECT_FALSE(d(std::string(kClosingTurn)));
}

TEST(Detector, CustomAndInvalidPatterns) {
  MisunderstandingDetector d({".*nope.*"});
  EXPECT_TRUE(d("nope, try again"));
  EXPECT_FALSE(d("you misunderstood me"));
  EXPECT_THROW(MisunderstandingDetector({"(unclosed"}), ConfigError);
}

namespace {

const Tokens kInitial = tokenize("Do you have cake recipes for people allergic to eggs?");
const Tokens kParaphrase = tokenize("You misunderstood me, I asked for a cake recipe without eggs");

std::vector<std::string> chunk_texts(const std::vector<Chunk>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(join(c.tokens));
  return out;
}

}  // namespace

TEST(CommonChunks, CakeAndEggs) {
  auto chunks = common_chunks(kInitial, kParaphrase);
  EXPECT_EQ(chunk_texts(chunks), (std::vector<std::string>{"cake", "eggs"}));
  EXPECT_EQ(chunks[0].span, (Span{3, 4}));
  EXPECT_EQ(chunks[1].span, (Span{9, 10}));
}

TEST(CommonChunks, IdenticalAndDisjoint) {
  Tokens q = tokenize("i want a chocolate cake with red onions , please");
  EXPECT_EQ(chunk_texts(common_chunks(q, q)), (std::vector<std::string>{"chocolate cake", "red onions"}));
  EXPECT_TRUE(common_chunks(q, tokenize("bonjour tout le monde")).empty());
  EXPECT_TRUE(common_chunks({}, q).empty());
}

namespace {

// Every content-only token run of the paraphrase, as a set.
std::set<Tokens> paraphrase_runs(const Tokens& para, const Stopwords& stop) {
  std::set<Tokens> out;
  for (std::size_t i = 0; i < para.size(); ++i)
    for (std::size_t j = i; j < para.size(); ++j) {
      if (is_punctuation(para[j]) || stop.contains(para[j])) break;
      out.insert(Tokens(para.begin() + static_cast<std::ptrdiff_t>(i), para.begin() + static_cast<std::ptrdiff_t>(j) + 1));
    }
  return out;
}

std::vector<Chunk> brute_force_chunks(const Tokens& init, const Tokens& para, const Stopwords& stop) {
  const auto runs = paraphrase_runs(para, stop);
  std::vector<Chunk> out;
  std::size_t i = 0;
  while (i < init.size()) {
    std::size_t best = 0;
    for (std::size_t j = i; j < init.size(); ++j) {
      if (is_punctuation(init[j]) || stop.contains(init[j])) break;
      Tokens cand(init.begin() + static_cast<std::ptrdiff_t>(i), init.begin() + static_cast<std::ptrdiff_t>(j) + 1);
      if (runs.count(cand)) best = j + 1 - i;
    }
    if (best == 0) {
      ++i;
      continue;
    }
    out.push_back({{i, i + best}, slice(init, {i, i + best})});
    i += best;
  }
  return out;
}

}  // namespace

TEST(CommonChunksProperty, AgreesWithBruteForceAndCoversSharedWords) {
  const Stopwords stop{"the", "with", "a"};
  const std::vector<std::string> vocab{"x", "y", "z", "w", "the", "with", ",", "a"};
  Rng rng(5150);
  for (int trial = 0; trial < 3000; ++trial) {
    Tokens init, para;
    for (std::size_t i = 0, n = rng.index(11); i < n; ++i) init.push_back(rng.pick(vocab));
    for (std::size_t i = 0, n = rng.index(11); i < n; ++i) para.push_back(rng.pick(vocab));
    const auto got = common_chunks(init, para, stop);
    ASSERT_EQ(got, brute_force_chunks(init, para, stop)) << join(init) << " | " << join(para);
    std::set<std::string> para_words(para.begin(), para.end());
    for (std::size_t i = 0; i < init.size(); ++i) {
      if (stop.contains(init[i]) || is_punctuation(init[i]) || !para_words.count(init[i])) continue;
      ASSERT_TRUE(std::any_of(got.begin(), got.end(), [&](const Chunk& c) { return c.span.begin <= i && i < c.span.end; }));
    }
  }
}

namespace {

struct Lexicon {
  std::vector<Mention> mentions{mention("m1", "cake", BaseType::recipe_type, Split::initial, 50),
                                mention("m2", "eggs", BaseType::ingredient, Split::initial, 40),
                                mention("m3", "seitan", BaseType::ingredient, Split::learn, 1)};
  KnowledgeBase kb = KnowledgeBase::from_mentions(mentions);
  LexiconOracle oracle{mentions};
};

}  // namespace

TEST(LabelQuery, CakeWithoutEggs) {
  Lexicon lex;
  auto a = label_query(kInitial, kParaphrase, lex.kb, lex.oracle);
  ASSERT_EQ(a.outcome, CorrectionOutcome::labeled);
  ASSERT_TRUE(a.labeled);
  EXPECT_EQ(a.labeled->concepts(),
            (std::vector<Concept>{cc(kInitial, 3, 4, "recipe_type"), cc(kInitial, 9, 10, "negative_ingredient")}));
  EXPECT_EQ(a.labeled->provenance, Provenance::acquired);
}

TEST(LabelQuery, MissAndNoChunks) {
  Lexicon lex;
  Tokens q = tokenize("any quinoa cake ?");
  auto miss = label_query(q, tokenize("I want a recipe with quinoa"), lex.kb, lex.oracle);
  EXPECT_EQ(miss.outcome, CorrectionOutcome::kb_miss);
  EXPECT_FALSE(miss.labeled);
  EXPECT_EQ(miss.unresolved, std::vector<std::string>{"quinoa"});
  auto none = label_query(q, tokenize("hello there"), lex.kb, lex.oracle);
  EXPECT_EQ(none.outcome, CorrectionOutcome::no_chunks);
  EXPECT_FALSE(none.labeled);
}

TEST(LabelQuery, CompletesAblatedEntryOnce) {
  Lexicon lex;
  lex.kb.set_ablated("seitan", true);
  Tokens q = tokenize("a seitan cake please");
  auto a = label_query(q, tokenize("You misunderstood me. I want a recipe with seitan and cake."), lex.kb, lex.oracle);
  ASSERT_EQ(a.outcome, CorrectionOutcome::labeled);
  EXPECT_EQ(a.completed, std::vector<std::string>{"seitan"});
  EXPECT_EQ(lex.kb.lookup("seitan"), BaseType::ingredient);
  for (const auto& c : a.labeled->concepts()) EXPECT_TRUE(lex.kb.contains(c.mention));
}

TEST(KbComplete, CompletedUnknownAlreadyVisible) {
  Lexicon lex;
  lex.kb.set_ablated("seitan", true);
  auto first = kb_complete(lex.kb, "seitan", lex.oracle);
  EXPECT_EQ(first.status, KbCompletion::Status::completed);
  EXPECT_EQ(first.type, BaseType::ingredient);
  EXPECT_EQ(lex.kb.lookup("seitan"), BaseType::ingredient);
  EXPECT_EQ(kb_complete(lex.kb, "seitan", lex.oracle).status, KbCompletion::Status::already_visible);
  EXPECT_EQ(kb_complete(lex.kb, "xyzzy", lex.oracle).status, KbCompletion::Status::unknown);
}

TEST(Negation, CueWindow) {
  NegationRule rule;
  Tokens t = tokenize("no thanks to the eggs");
  EXPECT_FALSE(rule.negates(t, 4));  // cue is four tokens back
  EXPECT_TRUE(rule.negates(t, 3));
  EXPECT_TRUE(rule.negates(tokenize("allergic to eggs"), 2));
  EXPECT_FALSE(rule.negates(tokenize("allergic to eggs"), 1));
  EXPECT_FALSE(rule.negates(tokenize("eggs"), 0));
}

TEST(ExtractPattern, Barbecue) {
  auto u = utterance("Tonight I have a barbecue, can you suggest me something to prepare?", {{4, 5, "event"}});
  EXPECT_EQ(extract_pattern(u).text(), "tonight i have a $event , can you suggest me something to prepare ?");
}

TEST(ExtractPattern, PlaceholdersAndDedup) {
  auto a = utterance("i want a cake with eggs", {{3, 4, "recipe_type"}, {5, 6, "ingredient"}});
  auto b = utterance("i want a pie with soy sauce", {{3, 4, "recipe_type"}, {5, 7, "ingredient"}});
  EXPECT_EQ(extract_pattern(a).text(), "i want a $recipe_type with $ingredient");
  EXPECT_EQ(extract_pattern(a).text(), extract_pattern(b).text());
  auto n = utterance("no eggs please", {{1, 2, "negative_ingredient"}});
  auto p = extract_pattern(n);
  ASSERT_EQ(p.slots().size(), 1u);
  EXPECT_EQ(p.slots()[0].polarity, Polarity::negative);
  EXPECT_EQ(p.split, Split::acquired);
  EXPECT_THROW(extract_pattern(utterance("hello there", {})), DataError);
}

TEST(RecordKnowledge, NewThenRepeated) {
  KnowledgeStore store({pattern("p1", "a $recipe_type please")}, {mention("m1", "cake", BaseType::recipe_type)});
  ShortTermMemory stm;
  auto u = utterance("some seitan cake", {{1, 2, "ingredient"}, {2, 3, "recipe_type"}});
  auto d1 = record_knowledge(store, stm, u, 4);
  EXPECT_EQ(d1.counts, (Counters{1, 1, 0}));
  EXPECT_EQ(d1.mentions, std::vector<std::string>{"seitan"});
  EXPECT_EQ(stm.entries().at("seitan").added_at, 4u);
  EXPECT_FALSE(stm.entries().contains("cake"));
  auto d2 = record_knowledge(store, stm, u, 5);
  EXPECT_EQ(d2.counts, (Counters{0, 0, 1}));
  EXPECT_EQ(store.counters(), (Counters{1, 1, 1}));

  auto known = utterance("a cake please", {{1, 2, "recipe_type"}});
  EXPECT_EQ(record_knowledge(store, stm, known, 6).counts, (Counters{0, 0, 1}));

  store.commit();
  EXPECT_EQ(store.counters(), (Counters{0, 0, 0}));
  EXPECT_EQ(store.history_patterns().size(), 2u);
  EXPECT_EQ(store.history_mentions().size(), 2u);
}

// Rephrases built from generated goals always let the chunk matcher find
// every goal mention in the initial query.
TEST(RephraseProperty, ChunksRecoverGoalMentions) {
  RunConfig c;
  c.root = source_dir();
  auto e = prepare_experiment(c);
  Rng rng(8);
  auto goals = generate_dataset(e.bundle, {Split::initial, Split::learn, 0.7, 0.3}, 2000, rng);
  for (const auto& g : goals) {
    const auto criteria = g.concepts();
    if (criteria.empty()) continue;
    const auto chunks = common_chunks(g.tokens, tokenize(verbalize_criteria(criteria)));
    for (const auto& c : criteria)
      ASSERT_TRUE(std::any_of(chunks.begin(), chunks.end(), [&](const Chunk& k) { return k.span.contains(c.span); }))
          << join(g.tokens) << " lost " << c.text();
  }
}
