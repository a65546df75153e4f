#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"

using namespace fx;

namespace {

RunConfig bundled_config(std::uint64_t seed = 1) {
  RunConfig c;
  c.root = source_dir();
  c.seed = seed;
  return c;
}

std::vector<std::string> tag_strings(const TaggedUtterance& u) {
  std::vector<std::string> out;
  for (const auto& t : u.tags) out.push_back(t.str());
  return out;
}

}  // namespace

TEST(Pattern, ParsesSlotsLiteralsAndWords) {
  auto p = pattern("p1", "tonight i have a $event , can you suggest me something to prepare ?");
  ASSERT_EQ(p.slots().size(), 1u);
  EXPECT_EQ(p.slots()[0].base, BaseType::event);
  EXPECT_TRUE(p.has_slot(BaseType::event));
  EXPECT_FALSE(p.has_slot(BaseType::ingredient));

  auto q = pattern("p2", "I'd like to prepare $ingredient $recipe_type for my son's {event:birthday}");
  EXPECT_EQ(q.slots().size(), 2u);
  EXPECT_EQ(q.text(), "i'd like to prepare $ingredient $recipe_type for my son's $event");

  auto n = pattern("p3", "no $negative_ingredient please");
  ASSERT_EQ(n.slots().size(), 1u);
  EXPECT_EQ(n.slots()[0].type(), ct("negative_ingredient"));
}

TEST(Pattern, RejectsMalformedTemplates) {
  EXPECT_THROW(pattern("x", "no placeholder here"), ConfigError);
  EXPECT_THROW(pattern("x", "a $vegetable please"), ConfigError);
  EXPECT_THROW(pattern("x", "a {event:birthday party"), ConfigError);
  EXPECT_THROW(pattern("x", "a {birthday} $meal"), ConfigError);
  EXPECT_THROW(pattern("x", "a {party:birthday} $meal"), ConfigError);
}

TEST(Render, SingleSlot) {
  auto p = pattern("p1", "tonight i have a $event , can you suggest me something to prepare ?");
  auto m = mention("m1", "barbecue", BaseType::event);
  const Mention* b[] = {&m};
  auto u = render_pattern(p, b);
  EXPECT_EQ(join(u.tokens), "tonight i have a barbecue , can you suggest me something to prepare ?");
  auto tags = tag_strings(u);
  for (std::size_t i = 0; i < tags.size(); ++i) EXPECT_EQ(tags[i], i == 4 ? "B-event" : "O");
  EXPECT_EQ(u.origin.pattern_id, "p1");
  EXPECT_EQ(u.origin.mention_ids, std::vector<std::string>{"m1"});
}

TEST(Render, LiteralAndTwoSlots) {
  auto p = pattern("p2", "I'd like to prepare $ingredient $recipe_type for my son's {event:birthday}");
  auto choc = mention("m1", "chocolate", BaseType::ingredient);
  auto cake = mention("m2", "cake", BaseType::recipe_type);
  const Mention* b[] = {&choc, &cake};
  auto u = render_pattern(p, b);
  EXPECT_EQ(join(u.tokens), "i'd like to prepare chocolate cake for my son's birthday");
  EXPECT_EQ(tag_strings(u), (std::vector<std::string>{"O", "O", "O", "O", "B-ingredient", "B-recipe_type", "O",
                                                      "O", "O", "B-event"}));
}

TEST(Render, NegatedSlot) {
  auto p = pattern("p3", "my daughter is allergic to $negative_ingredient");
  auto m = mention("m1", "bananas", BaseType::ingredient);
  const Mention* b[] = {&m};
  auto u = render_pattern(p, b);
  auto cs = u.concepts();
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].type, ct("negative_ingredient"));
  EXPECT_EQ(cs[0].text(), "bananas");
}

TEST(Render, TypeMismatchAndArity) {
  auto p = pattern("p1", "a $recipe_type please");
  auto m = mention("m1", "eggs", BaseType::ingredient);
  const Mention* b[] = {&m};
  EXPECT_THROW(render_pattern(p, b), RenderError);
  EXPECT_THROW(render_pattern(p, std::span<const Mention* const>{}), RenderError);
}

TEST(Resources, AmbiguousMentionIsConfigError) {
  TempDir dir("mentions");
  write_file(dir.path / "m.tsv", "cake\trecipe_type\t10\nrum\tingredient\t3\ncake\tingredient\t2\n");
  try {
    load_mentions((dir.path / "m.tsv").string());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("ambiguous"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
  }
  write_file(dir.path / "d.tsv", "cake\trecipe_type\t10\ncake\trecipe_type\t2\n");
  EXPECT_THROW(load_mentions((dir.path / "d.tsv").string()), ConfigError);
  EXPECT_THROW(load_mentions((dir.path / "missing.tsv").string()), ConfigError);
  auto a = mention("a", "cake", BaseType::recipe_type);
  auto b = mention("b", "cake", BaseType::meal);
  std::vector<Mention> both{a, b};
  EXPECT_THROW(KnowledgeBase::from_mentions(both), ConfigError);
}

TEST(Resources, BundledFilesLoadCleanly) {
  auto patterns = load_patterns(source_dir() + "/data/resources/patterns.tsv");
  auto mentions = load_mentions(source_dir() + "/data/resources/mentions.tsv");
  EXPECT_GE(patterns.size(), 100u);
  EXPECT_GE(mentions.size(), 1000u);
  std::set<BaseType> types;
  for (const auto& m : mentions) types.insert(m.type);
  EXPECT_EQ(types.size(), kBaseTypeCount);
}

TEST(Resources, SynthesizedMentionsAreFreshAndCounted) {
  std::array<std::size_t, kBaseTypeCount> counts{};
  counts[1] = 40;
  counts[0] = 10;
  std::vector<Mention> existing{mention("e", "cake", BaseType::recipe_type)};
  auto a = synthesize_mentions(std::span<const std::size_t, kBaseTypeCount>(counts), 9, existing);
  auto b = synthesize_mentions(std::span<const std::size_t, kBaseTypeCount>(counts), 9, existing);
  ASSERT_EQ(a.size(), 50u);
  std::set<std::string> surfaces{"cake"};
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].text(), b[i].text());
    EXPECT_TRUE(surfaces.insert(a[i].text()).second);
  }
  EXPECT_EQ(std::count_if(a.begin(), a.end(), [](const Mention& m) { return m.type == BaseType::ingredient; }), 40);
}

namespace {

std::vector<Pattern> numbered_patterns(std::size_t n) {
  std::vector<Pattern> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(pattern("p" + std::to_string(i), "w" + std::to_string(i) + " $ingredient"));
  return out;
}

std::vector<Mention> numbered_mentions(std::size_t n) {
  std::vector<Mention> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(mention("m" + std::to_string(i), "x" + std::to_string(i), all_base_types()[i % kBaseTypeCount]));
  return out;
}

std::vector<std::string> ids(const std::vector<Pattern>& ps) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.push_back(p.id);
  return out;
}

}  // namespace

TEST(Split, TenPatternsGiveSixTwoTwo) {
  auto b = split_resources(numbered_patterns(10), numbered_mentions(40), {}, 1);
  EXPECT_EQ(b.patterns(Split::initial).size(), 6u);
  EXPECT_EQ(b.patterns(Split::learn).size(), 2u);
  EXPECT_EQ(b.patterns(Split::unknown).size(), 2u);
}

TEST(Split, DeterministicAndSeedSensitive) {
  auto a = split_resources(numbered_patterns(50), numbered_mentions(80), {}, 3);
  auto b = split_resources(numbered_patterns(50), numbered_mentions(80), {}, 3);
  EXPECT_EQ(ids(a.patterns(Split::initial)), ids(b.patterns(Split::initial)));
  std::set<std::vector<std::string>> distinct;
  for (std::uint64_t seed = 1; seed <= 4; ++seed)
    distinct.insert(ids(split_resources(numbered_patterns(50), numbered_mentions(80), {}, seed).patterns(Split::initial)));
  EXPECT_EQ(distinct.size(), 4u);
}

TEST(Split, RejectsBadRatiosAndEmptyInputs) {
  ResourceRatios r;
  r.patterns = {0.5, 0.5, 0.5};
  EXPECT_THROW(split_resources(numbered_patterns(10), numbered_mentions(10), r, 1), ConfigError);
  r.patterns = {1.2, -0.1, -0.1};
  EXPECT_THROW(split_resources(numbered_patterns(10), numbered_mentions(10), r, 1), ConfigError);
  EXPECT_THROW(split_resources({}, numbered_mentions(10), {}, 1), ConfigError);
}

// Property: for random sizes, ratios and seeds the three splits plus the
// held-out half partition the inputs exactly.
TEST(SplitProperty, PartitionIsDisjointAndComplete) {
  Rng gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t np = 1 + gen.index(60), nm = 1 + gen.index(120);
    double a = gen.uniform(), b = gen.uniform() * (1 - a);
    ResourceRatios r;
    r.patterns = {a, b, 1 - a - b};
    r.mentions = {b, a, 1 - a - b};
    auto bundle = split_resources(numbered_patterns(np), numbered_mentions(nm), r, gen.next());
    hold_out_initial(bundle, 0.5, 7);
    std::multiset<std::string> pids, mids;
    for (Split s : {Split::initial, Split::heldout, Split::learn, Split::unknown}) {
      for (const auto& p : bundle.patterns(s)) {
        EXPECT_EQ(p.split, s);
        pids.insert(p.id);
      }
      for (const auto& m : bundle.mentions(s)) {
        EXPECT_EQ(m.split, s);
        mids.insert(m.id);
      }
    }
    ASSERT_EQ(pids.size(), np);
    ASSERT_EQ(std::set<std::string>(pids.begin(), pids.end()).size(), np);
    ASSERT_EQ(mids.size(), nm);
    ASSERT_EQ(std::set<std::string>(mids.begin(), mids.end()).size(), nm);
  }
}

TEST(HoldOut, HalvesInitialPerType) {
  auto b = split_resources(numbered_patterns(20), numbered_mentions(160), {}, 5);
  const auto initial_before = b.patterns(Split::initial).size();
  hold_out_initial(b, 0.5, 5);
  EXPECT_EQ(b.patterns(Split::initial).size() + b.patterns(Split::heldout).size(), initial_before);
  EXPECT_EQ(b.patterns(Split::heldout).size(), initial_before / 2);
  for (BaseType t : all_base_types())
    EXPECT_NEAR(static_cast<double>(b.mentions_of(Split::heldout, t).size()),
                static_cast<double>(b.mentions_of(Split::initial, t).size()), 1.0);
  EXPECT_THROW(hold_out_initial(b, 1.0, 5), ConfigError);
}

TEST(Generate, MixingRatesMatchComposition) {
  auto e = prepare_experiment(bundled_config());
  Rng rng(11);
  Composition comp{Split::initial, Split::learn, 0.7, 0.3};
  auto data = generate_dataset(e.bundle, comp, 4000, rng);
  std::size_t novel_patterns = 0, slots = 0, novel_mentions = 0;
  for (const auto& u : data) {
    ASSERT_TRUE(is_legal_bio(u.tags));
    novel_patterns += u.origin.pattern_split == Split::learn;
    for (Split s : u.origin.mention_splits) {
      ++slots;
      novel_mentions += s == Split::learn;
    }
    EXPECT_NE(u.origin.pattern_split, Split::unknown);
  }
  EXPECT_NEAR(100.0 * novel_patterns / data.size(), 70.0, 3.0);
  EXPECT_NEAR(100.0 * novel_mentions / slots, 30.0, 3.0);
}

TEST(Generate, PureCompositionUsesOnlyBaseSplit) {
  auto e = prepare_experiment(bundled_config(2));
  Rng rng(12);
  auto data = generate_dataset(e.bundle, {Split::initial, std::nullopt, 0, 0}, 1000, rng);
  for (const auto& u : data) {
    EXPECT_EQ(u.origin.pattern_split, Split::initial);
    for (Split s : u.origin.mention_splits) EXPECT_EQ(s, Split::initial);
  }
  Rng rng2(12);
  EXPECT_EQ(generate_dataset(e.bundle, {Split::initial, std::nullopt, 0, 0}, 1000, rng2), data);
}

TEST(Generate, EmptyPoolIsConfigError) {
  SplitBundle b;
  b.patterns(Split::initial).push_back(pattern("p", "a $meal"));
  Rng rng(1);
  EXPECT_THROW(generate_dataset(b, {Split::learn, std::nullopt, 0, 0}, 5, rng), ConfigError);
  EXPECT_THROW(generate_dataset(b, {Split::initial, std::nullopt, 0, 0}, 5, rng), ConfigError);
}

TEST(KnowledgeBaseTest, AblatesLeastFrequentIngredients) {
  std::vector<Mention> ms;
  std::vector<std::uint64_t> freqs(500);
  std::iota(freqs.begin(), freqs.end(), 1);
  Rng rng(3);
  rng.shuffle(freqs.begin(), freqs.end());
  for (std::size_t i = 0; i < 500; ++i)
    ms.push_back(mention("i" + std::to_string(i), "ing" + std::to_string(i), BaseType::ingredient, Split::initial, freqs[i]));
  ms.push_back(mention("r", "rare cake", BaseType::recipe_type, Split::initial, 0));
  auto kb = KnowledgeBase::from_mentions(ms);
  const auto table = frequency_table(ms);
  EXPECT_EQ(ablate_kb(kb, 0.4, table), 200u);
  EXPECT_EQ(kb.ablated_count(), 200u);
  for (const auto& m : ms) {
    const bool hidden = !kb.lookup(m.surface);
    if (m.type != BaseType::ingredient) EXPECT_FALSE(hidden);
    else EXPECT_EQ(hidden, m.frequency <= 200) << m.text();
  }
  auto untouched = KnowledgeBase::from_mentions(ms);
  EXPECT_EQ(ablate_kb(untouched, 0.0, table), 0u);
  EXPECT_EQ(untouched.ablated_count(), 0u);
  EXPECT_THROW(ablate_kb(untouched, 1.0, table), ConfigError);
}

TEST(KnowledgeBaseTest, CompleteRestoresAndBumpsRevision) {
  std::vector<Mention> ms{mention("a", "seitan", BaseType::ingredient, Split::initial, 1),
                          mention("b", "flour", BaseType::ingredient, Split::initial, 99)};
  auto kb = KnowledgeBase::from_mentions(ms);
  ablate_kb(kb, 0.5, frequency_table(ms));
  EXPECT_FALSE(kb.lookup("seitan"));
  EXPECT_EQ(kb.lookup("flour"), BaseType::ingredient);
  const auto rev = kb.revision();
  kb.complete("seitan", BaseType::ingredient);
  EXPECT_EQ(kb.lookup("seitan"), BaseType::ingredient);
  EXPECT_GT(kb.revision(), rev);
  EXPECT_THROW(kb.set_ablated("tofu", true), ContractViolation);
}

TEST(DatasetIo, ConllAndProvenanceRoundTrip) {
  auto e = prepare_experiment(bundled_config(3));
  Rng rng(5);
  auto data = generate_dataset(e.bundle, {Split::initial, Split::learn, 0.7, 0.3}, 200, rng);
  std::stringstream conll, prov;
  write_conll(conll, data);
  write_provenance(prov, data);
  auto back = read_conll(conll, "mem.conll");
  read_provenance(prov, "mem.prov", back);
  EXPECT_EQ(back, data);
}

TEST(DatasetIo, ErrorsNameFileAndLine) {
  std::istringstream bad_tag("a\tO\nb\tB-vegetable\n\n");
  try {
    read_conll(bad_tag, "x.conll");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("x.conll:2"), std::string::npos) << e.what();
  }
  std::istringstream illegal("a\tO\n\nb\tI-event\n\n");
  try {
    read_conll(illegal, "y.conll");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("y.conll:3"), std::string::npos) << e.what();
  }
  std::istringstream columns("a b\n");
  EXPECT_THROW(read_conll(columns, "z.conll"), DataError);
}
