#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>

#include "fixtures.hpp"

using namespace fx;
namespace fs = std::filesystem;

TEST(Config, DefaultsFromEmptyObject) {
  auto c = config_from_json(nlohmann::json::object(), ".");
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.sizes.train, 20000u);
  EXPECT_DOUBLE_EQ(c.mixing.p_new_pattern, 0.7);
  EXPECT_DOUBLE_EQ(c.mixing.p_new_mention, 0.3);
  EXPECT_DOUBLE_EQ(c.kb_ablation_fraction, 0.4);
  EXPECT_EQ(c.adaptation.min_new_mentions, 5u);
  EXPECT_EQ(c.adaptation.min_new_patterns, 10u);
  EXPECT_EQ(c.adaptation.min_new_examples, 50u);
  EXPECT_EQ(c.adaptation.budget, 1000u);
  EXPECT_EQ(c.acquisition.negation_window, 3u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  using nlohmann::json;
  EXPECT_THROW(config_from_json(json{{"sead", 3}}, "."), ConfigError);
  EXPECT_THROW(config_from_json(json{{"sizes", {{"trian", 3}}}}, "."), ConfigError);
  EXPECT_THROW(config_from_json(json{{"splits", {{"patterns", {0.5, 0.5, 0.5}}}}}, "."), ConfigError);
  EXPECT_THROW(config_from_json(json{{"splits", {{"patterns", {0.5, 0.5}}}}}, "."), ConfigError);
  EXPECT_THROW(config_from_json(json{{"mixing", {{"p_new_pattern", 1.5}}}}, "."), ConfigError);
  EXPECT_THROW(config_from_json(json{{"seed", "one"}}, "."), ConfigError);
  EXPECT_THROW(config_from_json(json{{"adaptation", {{"budget", 0}}}}, "."), ConfigError);
  EXPECT_THROW(config_from_json(json{{"sizes", {{"train", 0}}}}, "."), ConfigError);
  EXPECT_THROW(config_from_json(json::array(), "."), ConfigError);
}

TEST(Config, JsonRoundTripAndPathRebasing) {
  TempDir dir("config");
  auto c = load_config(source_dir() + "/configs/desk.json");
  EXPECT_EQ(c.sizes.train, 2000u);
  EXPECT_TRUE(fs::exists(c.resolve(c.resources.patterns)));
  const auto j = config_to_json(c, dir.path);
  write_file(dir.path / "config.json", j.dump(2));
  auto back = load_config(dir.path / "config.json");
  EXPECT_TRUE(fs::exists(back.resolve(back.resources.patterns)));
  EXPECT_EQ(fs::weakly_canonical(back.resolve(back.resources.mentions)),
            fs::weakly_canonical(c.resolve(c.resources.mentions)));
  EXPECT_EQ(config_to_json(back, dir.path), j);
  EXPECT_THROW(load_config(dir.path / "missing.json"), ConfigError);
  write_file(dir.path / "broken.json", "{ \"seed\": ");
  EXPECT_THROW(load_config(dir.path / "broken.json"), ConfigError);
}

namespace {

struct Cli {
  int code = -1;
  std::string out, err;
};

Cli run_cli(const std::string& args, const fs::path& scratch) {
  const auto out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = std::string("\"") + OTJL_CLI + "\" -q " + args + " > \"" + out.string() + "\" 2> \"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Cli r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::string tiny_config(const fs::path& dir, const std::string& output) {
  nlohmann::json j{
      {"seed", 3},
      {"resources", {{"patterns", source_dir() + "/data/resources/patterns.tsv"},
                     {"mentions", source_dir() + "/data/resources/mentions.tsv"},
                     {"max_patterns", 60},
                     {"max_mentions", 400}}},
      {"sizes", {{"train", 200}, {"dev", 60}, {"simulation", 60}, {"test_initial", 50}, {"test_learn", 50},
                 {"test_unknown", 50}}},
      {"tagger", {{"epochs", 2}}},
      {"adaptation", {{"budget", 100}}},
      {"evaluation", {{"checkpoint_every", 10}}},
      {"output_dir", output}};
  const auto p = dir / ("config-" + output + ".json");
  write_file(p, j.dump(2));
  return p.string();
}

}  // namespace

TEST(Cli, ExitCodesAndDeterminism) {
  TempDir dir("cli");
  const auto cfg = tiny_config(dir.path, "out");
  const auto cfg_fresh = tiny_config(dir.path, "fresh");

  write_file(dir.path / "bad.json", R"({"seed": 1, "unknown_key": true})");
  EXPECT_EQ(run_cli("gen-data -c \"" + (dir.path / "bad.json").string() + "\"", dir.path).code, 2);
  EXPECT_NE(run_cli("frobnicate", dir.path).code, 0);

  // Training before any data exists is a data error.
  auto early = run_cli("train -c \"" + cfg_fresh + "\"", dir.path);
  EXPECT_EQ(early.code, 3) << early.err;

  auto g1 = run_cli("gen-data -c \"" + cfg + "\"", dir.path);
  ASSERT_EQ(g1.code, 0) << g1.err;
  auto g2 = run_cli("gen-data -c \"" + cfg + "\"", dir.path);
  EXPECT_EQ(g1.out, g2.out);
  EXPECT_NE(g1.out.find("test_UNKNOWN"), std::string::npos);

  auto t1 = run_cli("train -c \"" + cfg + "\"", dir.path);
  ASSERT_EQ(t1.code, 0) << t1.err;
  auto t2 = run_cli("train -c \"" + cfg + "\"", dir.path);
  EXPECT_EQ(t1.out, t2.out);

  EXPECT_EQ(run_cli("simulate -c \"" + cfg + "\" -m BOGUS", dir.path).code, 2);
  auto s = run_cli("simulate -c \"" + cfg + "\" -m STM_ONLY", dir.path);
  ASSERT_EQ(s.code, 0) << s.err;
  const auto run = dir.path / "out" / "runs" / "STM_ONLY";
  EXPECT_TRUE(fs::exists(run / "eval.csv"));
  EXPECT_TRUE(fs::exists(run / "events.jsonl"));
  EXPECT_TRUE(fs::exists(run / "config.json"));

  auto rep = run_cli("report \"" + run.string() + "\" -o \"" + (dir.path / "report").string() + "\"", dir.path);
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_NE(rep.out.find("model_INITIAL"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir.path / "report" / "report.txt"));

  // A run against different test sets cannot be compared with this one.
  auto other_cfg = tiny_config(dir.path, "other");
  {
    auto j = nlohmann::json::parse(read_file(other_cfg));
    j["seed"] = 4;
    write_file(other_cfg, j.dump());
  }
  ASSERT_EQ(run_cli("gen-data -c \"" + other_cfg + "\"", dir.path).code, 0);
  ASSERT_EQ(run_cli("train -c \"" + other_cfg + "\"", dir.path).code, 0);
  ASSERT_EQ(run_cli("simulate -c \"" + other_cfg + "\" -m STM_ONLY", dir.path).code, 0);
  auto clash = run_cli("report \"" + run.string() + "\" \"" + (dir.path / "other" / "runs" / "STM_ONLY").string() +
                           "\" -o \"" + (dir.path / "report2").string() + "\"",
                       dir.path);
  EXPECT_EQ(clash.code, 3) << clash.err;

  // Corrupt a dataset: the error names the file and line.
  const auto train_file = dir.path / "out" / "data" / "train_INITIAL_TRN.conll";
  auto text = read_file(train_file);
  const auto second_line = text.find('\n') + 1;
  text.replace(second_line, text.find('\n', second_line) - second_line, "broken\tB-vegetable");
  write_file(train_file, text);
  auto corrupt = run_cli("train -c \"" + cfg + "\"", dir.path);
  EXPECT_EQ(corrupt.code, 3);
  EXPECT_NE(corrupt.err.find("train_INITIAL_TRN.conll:2"), std::string::npos) << corrupt.err;
}
