#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "otjl/acquisition.hpp"
#include "otjl/adaptation.hpp"
#include "otjl/config.hpp"
#include "otjl/corpus.hpp"
#include "otjl/dataset_io.hpp"
#include "otjl/eval.hpp"
#include "otjl/log.hpp"
#include "otjl/stm.hpp"
#include "otjl/tagger.hpp"
#include "otjl/usersim.hpp"

namespace otjl {

// ---------------------------------------------------------------------------
// Resources and datasets

struct Experiment {
  SplitBundle bundle;
  std::vector<Mention> lexicon;  // every mention of every split; backs the oracle
};

inline Experiment prepare_experiment(const RunConfig& c) {
  auto patterns = load_patterns(c.resolve(c.resources.patterns).string());
  auto mentions = load_mentions(c.resolve(c.resources.mentions).string());
  const auto& synth = c.resources.synthetic_mentions;
  if (std::any_of(synth.begin(), synth.end(), [](std::size_t n) { return n > 0; })) {
    auto extra = synthesize_mentions(std::span<const std::size_t, kBaseTypeCount>(synth), c.seed, mentions);
    mentions.insert(mentions.end(), extra.begin(), extra.end());
  }
  subsample_resources(patterns, mentions, c.resources.max_patterns, c.resources.max_mentions, c.seed);
  Experiment e;
  e.bundle = split_resources(std::move(patterns), std::move(mentions), {c.splits.patterns, c.splits.mentions}, c.seed);
  hold_out_initial(e.bundle, c.splits.dev_heldout_fraction, c.seed);
  e.lexicon = e.bundle.all_mentions();
  return e;
}

struct DatasetSpec {
  std::string name;
  Composition composition;
  std::size_t size = 0;
};

inline const std::vector<std::string>& dataset_names() {
  static const std::vector<std::string> names = {"train_INITIAL_TRN", "train_INITIAL_DEV", "simulation",
                                                 "test_INITIAL",      "test_LEARN",        "test_UNKNOWN"};
  return names;
}

inline std::vector<DatasetSpec> dataset_specs(const RunConfig& c) {
  const double pp = c.mixing.p_new_pattern, pm = c.mixing.p_new_mention;
  return {
      {"train_INITIAL_TRN", {Split::initial, std::nullopt, 0, 0}, c.sizes.train},
      {"train_INITIAL_DEV", {Split::initial, Split::heldout, pp, pm}, c.sizes.dev},
      {"simulation", {Split::initial, Split::learn, pp, pm}, c.sizes.simulation},
      {"test_INITIAL", {Split::initial, std::nullopt, 0, 0}, c.sizes.test_initial},
      {"test_LEARN", {Split::initial, Split::learn, pp, pm}, c.sizes.test_learn},
      {"test_UNKNOWN", {Split::unknown, std::nullopt, 0, 0}, c.sizes.test_unknown},
  };
}

inline std::vector<TaggedUtterance> generate(const Experiment& e, const DatasetSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "dataset-" + spec.name));
  return generate_dataset(e.bundle, spec.composition, spec.size, rng);
}

// Counts of UNKNOWN-split elements (and, for test_UNKNOWN, of anything else)
// based on the provenance carried by each utterance.
struct IsolationCount {
  std::size_t utterances = 0;
  std::size_t with_unknown = 0;      // utterances using an UNKNOWN pattern or mention
  std::size_t with_non_unknown = 0;  // utterances using anything outside UNKNOWN
};

inline IsolationCount scan_isolation(std::span<const TaggedUtterance> data) {
  IsolationCount c;
  for (const auto& u : data) {
    ++c.utterances;
    const auto& o = u.origin;
    bool unknown = o.pattern_split == Split::unknown;
    bool other = o.pattern_split != Split::unknown;
    for (Split s : o.mention_splits) {
      unknown |= s == Split::unknown;
      other |= s != Split::unknown;
    }
    c.with_unknown += unknown ? 1 : 0;
    c.with_non_unknown += other ? 1 : 0;
  }
  return c;
}

inline Json to_json(const IsolationCount& c) {
  return Json{{"utterances", c.utterances}, {"with_unknown", c.with_unknown}, {"with_non_unknown", c.with_non_unknown}};
}

inline fs::path data_dir(const RunConfig& c) { return c.output_path() / "data"; }
inline fs::path model_dir(const RunConfig& c) { return c.output_path() / "model"; }
inline fs::path run_dir(const RunConfig& c, Mode m) { return c.output_path() / "runs" / std::string(name_of(m)); }

inline void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw IoError("cannot create directory " + p.string());
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

inline Json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot read " + p.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

inline std::vector<TaggedUtterance> load_dataset(const fs::path& dir, const std::string& name) {
  const auto conll = dir / (name + ".conll");
  if (!fs::exists(conll)) throw DataError("missing dataset " + conll.string() + " (run gen-data first)");
  auto data = read_conll_file(conll);
  const auto prov = dir / (name + ".prov.tsv");
  std::ifstream in(prov);
  if (!in) throw DataError("missing provenance file " + prov.string());
  read_provenance(in, prov.string(), data);
  return data;
}

inline void write_dataset(const fs::path& dir, const std::string& name, const std::vector<TaggedUtterance>& data) {
  write_conll_file(dir / (name + ".conll"), data);
  std::ofstream prov(dir / (name + ".prov.tsv"), std::ios::binary);
  if (!prov) throw IoError("cannot write provenance for " + name);
  write_provenance(prov, data);
}

inline void write_splits(const fs::path& dir, const SplitBundle& b) {
  ensure_dir(dir);
  for (Split s : {Split::initial, Split::heldout, Split::learn, Split::unknown}) {
    std::ofstream p(dir / ("patterns_" + std::string(name_of(s)) + ".tsv"), std::ios::binary);
    p << "# id\ttemplate\n";
    for (const auto& x : b.patterns(s)) p << x.id << '\t' << x.text() << '\n';
    std::ofstream m(dir / ("mentions_" + std::string(name_of(s)) + ".tsv"), std::ios::binary);
    m << "# id\tsurface\ttype\tfrequency\n";
    for (const auto& x : b.mentions(s)) m << x.id << '\t' << x.text() << '\t' << name_of(x.type) << '\t' << x.frequency << '\n';
    if (!p || !m) throw IoError("cannot write split files in " + dir.string());
  }
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataResult {
  fs::path dir;
  std::map<std::string, std::string> hashes;  // dataset -> conll hash
};

inline GenDataResult cmd_gen_data(const RunConfig& c) {
  const auto e = prepare_experiment(c);
  const auto dir = data_dir(c);
  ensure_dir(dir);
  write_text(c.output_path() / "config.json", config_to_json(c, c.output_path()).dump(2) + "\n");
  write_splits(dir / "splits", e.bundle);
  GenDataResult res{dir, {}};
  Json manifest{{"seed", c.seed}, {"datasets", Json::object()}, {"resources", Json::object()}};
  for (Split s : {Split::initial, Split::heldout, Split::learn, Split::unknown})
    manifest["resources"][std::string(name_of(s))] = {{"patterns", e.bundle.patterns(s).size()},
                                                      {"mentions", e.bundle.mentions(s).size()}};
  for (const auto& spec : dataset_specs(c)) {
    const auto data = generate(e, spec, c.seed);
    write_dataset(dir, spec.name, data);
    const auto h = file_hash(dir / (spec.name + ".conll"));
    res.hashes[spec.name] = h;
    manifest["datasets"][spec.name] = {{"size", data.size()},
                                       {"conll_hash", h},
                                       {"provenance_hash", file_hash(dir / (spec.name + ".prov.tsv"))},
                                       {"isolation", to_json(scan_isolation(data))}};
    Log::get().info("gen-data: ", spec.name, " ", data.size(), " utterances");
  }
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return res;
}

// ---------------------------------------------------------------------------
// train

inline TestSets load_test_sets(const RunConfig& c) {
  const auto dir = data_dir(c);
  TestSets t;
  t.initial = load_dataset(dir, "test_INITIAL");
  t.learn = load_dataset(dir, "test_LEARN");
  t.unknown = load_dataset(dir, "test_UNKNOWN");
  if (!c.evaluation.test_real.empty()) t.real = read_conll_file(c.resolve(c.evaluation.test_real), Provenance::external);
  t.validate();
  return t;
}

inline std::map<std::string, std::string> test_hashes(const RunConfig& c) {
  const auto dir = data_dir(c);
  std::map<std::string, std::string> h;
  for (const char* n : {"test_INITIAL", "test_LEARN", "test_UNKNOWN"}) h[n] = file_hash(dir / (std::string(n) + ".conll"));
  if (!c.evaluation.test_real.empty()) h["test_REAL"] = file_hash(c.resolve(c.evaluation.test_real));
  return h;
}

inline Json to_json(const EvalRecord& r) {
  Json j{{"dialogue", r.dialogue},
         {"with_stm", r.with_stm},
         {"model_version", r.model_version},
         {"adaptations", r.adaptation_count},
         {"stm_size", r.stm_size},
         {"f1_initial", r.f1_initial},
         {"f1_learn", r.f1_learn},
         {"f1_unknown", r.f1_unknown},
         {"f1_weighted", r.f1_weighted}};
  if (r.f1_real) j["f1_real"] = *r.f1_real;
  return j;
}

inline EvalRecord record_from_json(const Json& j) {
  EvalRecord r;
  r.dialogue = j.at("dialogue").get<std::size_t>();
  r.with_stm = j.at("with_stm").get<bool>();
  r.model_version = j.at("model_version").get<std::size_t>();
  r.adaptation_count = j.at("adaptations").get<std::size_t>();
  r.stm_size = j.at("stm_size").get<std::size_t>();
  r.f1_initial = j.at("f1_initial").get<double>();
  r.f1_learn = j.at("f1_learn").get<double>();
  r.f1_unknown = j.at("f1_unknown").get<double>();
  r.f1_weighted = j.at("f1_weighted").get<double>();
  if (j.contains("f1_real")) r.f1_real = j.at("f1_real").get<double>();
  return r;
}

inline void save_model(const FeatureTagger& m, const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  m.save(out);
  if (!out) throw IoError("write failed: " + p.string());
}

inline FeatureTagger load_model(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("missing model checkpoint " + p.string() + " (run train first)");
  return FeatureTagger::load(in, p.string());
}

struct TrainResult {
  FeatureTagger model;
  EvalRecord scores;
  std::string checkpoint_hash;
};

inline TrainResult cmd_train(const RunConfig& c) {
  const auto dir = data_dir(c);
  const auto train = load_dataset(dir, "train_INITIAL_TRN");
  const auto dev = load_dataset(dir, "train_INITIAL_DEV");
  const auto tests = load_test_sets(c);
  auto model = FeatureTagger::train(train, dev, c.train_config());
  const auto mdir = model_dir(c);
  ensure_dir(mdir);
  const auto ckpt = mdir / "initial.ckpt";
  save_model(model, ckpt);
  ShortTermMemory empty;
  KnowledgeBase kb;
  auto rec = evaluate_checkpoint(model, empty, kb, tests, false);
  const auto& rep = model.report();
  Json summary{{"kind", "initial"},
               {"seed", c.seed},
               {"checkpoint_hash", file_hash(ckpt)},
               {"features", model.feature_count()},
               {"dev", {{"start", rep.start_dev_f1}, {"epochs", rep.epoch_dev_f1},
                        {"selected_epoch", rep.selected_epoch}, {"selected", rep.selected_dev_f1}}},
               {"initial", to_json(rec)},
               {"test_hashes", test_hashes(c)}};
  write_text(mdir / "summary.json", summary.dump(2) + "\n");
  Log::get().info("train: dev F1 ", format_score(rep.selected_dev_f1), ", test_INITIAL ", format_score(rec.f1_initial),
                  ", test_LEARN ", format_score(rec.f1_learn), ", test_UNKNOWN ", format_score(rec.f1_unknown));
  return {std::move(model), rec, file_hash(ckpt)};
}

// ---------------------------------------------------------------------------
// simulate

inline SimulationSettings simulation_settings(const RunConfig& c, Mode mode) {
  SimulationSettings s;
  s.mode = mode;
  s.policy = c.policy();
  s.train = c.train_config();
  s.checkpoint_every = c.evaluation.checkpoint_every;
  s.seed = c.seed;
  s.detector = MisunderstandingDetector(c.acquisition.misunderstanding_patterns);
  s.negation.window = c.acquisition.negation_window;
  if (!c.acquisition.stopwords.empty()) {
    std::ifstream in(c.resolve(c.acquisition.stopwords));
    if (!in) throw ConfigError("cannot read stopword list " + c.acquisition.stopwords);
    s.stopwords.clear();
    std::string w;
    while (in >> w) s.stopwords.insert(to_lower(w));
  }
  return s;
}

struct SimulateResult {
  fs::path dir;
  EvalRecord initial;
  EvalRecord final_model;
  EvalRecord final_stm;
  RunStats stats;
  DeltaReport delta;
  std::size_t train_learn_sets = 0;
  IsolationCount train_learn_isolation;
};

inline SimulateResult cmd_simulate(const RunConfig& c, Mode mode, std::optional<fs::path> out_dir = std::nullopt) {
  const auto dir = out_dir ? *out_dir : run_dir(c, mode);
  ensure_dir(dir);
  write_text(dir / "config.json",
             Json{{"mode", name_of(mode)}, {"config", config_to_json(c, dir)}}.dump(2) + "\n");

  const auto e = prepare_experiment(c);
  const auto ddir = data_dir(c);
  const auto dev = load_dataset(ddir, "train_INITIAL_DEV");
  const auto goals = load_dataset(ddir, "simulation");
  const auto tests = load_test_sets(c);
  const auto hashes_start = test_hashes(c);

  SystemState<FeatureTagger> sys;
  sys.model = load_model(model_dir(c) / "initial.ckpt");
  sys.kb = KnowledgeBase::from_mentions(e.lexicon);
  ablate_kb(sys.kb, c.kb_ablation_fraction, frequency_table(e.lexicon));
  LexiconOracle oracle(e.lexicon);
  sys.oracle = &oracle;
  sys.store = KnowledgeStore(e.bundle.patterns(Split::initial), e.bundle.mentions(Split::initial));

  std::ofstream events(dir / "events.jsonl", std::ios::binary);
  std::ofstream csv(dir / "eval.csv", std::ios::binary);
  if (!events || !csv) throw IoError("cannot write run artifacts in " + dir.string());
  csv << kEvalCsvHeader << '\n';

  SimulateResult res;
  res.dir = dir;
  SimulationObserver<FeatureTagger> obs;
  obs.on_event = [&](const Json& j) {
    events << j.dump() << '\n';
    if (!events) throw IoError("write failed: events.jsonl");
  };
  obs.on_record = [&](const EvalRecord& r) {
    csv << to_csv_row(r) << '\n';
    if (!csv) throw IoError("write failed: eval.csv");
  };
  const auto tl_dir = dir / "train_learn";
  if (c.evaluation.dump_train_learn) ensure_dir(tl_dir);
  obs.on_train_learn = [&](std::size_t n, const TrainLearnSet& set) {
    ++res.train_learn_sets;
    const auto iso = scan_isolation(set.utterances);
    res.train_learn_isolation.utterances += iso.utterances;
    res.train_learn_isolation.with_unknown += iso.with_unknown;
    res.train_learn_isolation.with_non_unknown += iso.with_non_unknown;
    if (c.evaluation.dump_train_learn) write_dataset(tl_dir, "train_LEARN_" + std::to_string(n), set.utterances);
  };
  const auto ckpt_dir = dir / "checkpoints";
  obs.on_adapted = [&](const AdaptationEvent& ev, const FeatureTagger& m) {
    const auto every = c.evaluation.model_checkpoint_every;
    if (every == 0 || ev.index % every != 0) return;
    ensure_dir(ckpt_dir);
    save_model(m, ckpt_dir / ("model_" + std::to_string(ev.index) + ".ckpt"));
  };

  CheckpointEvaluator evaluator(tests);
  const auto settings = simulation_settings(c, mode);
  const auto t0 = std::chrono::steady_clock::now();
  auto sim = run_simulation(std::move(sys), goals, dev, evaluator, settings, obs);
  events.flush();
  csv.flush();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto hashes_end = test_hashes(c);
  if (hashes_end != hashes_start) throw DataError("test sets changed during the run");

  save_model(sim.model, dir / "final.ckpt");
  res.stats = sim.stats;
  for (const auto& r : sim.records) {
    if (r.dialogue == 0 && !r.with_stm) res.initial = r;
  }
  for (const auto& r : sim.records) (r.with_stm ? res.final_stm : res.final_model) = r;
  res.delta = delta_analysis(sim.records, sim.adaptations.size());

  auto stats_of = [](const DeltaStats& s) {
    return Json{{"max", s.max}, {"min", s.min}, {"mean", s.mean}, {"median", s.median}};
  };
  Json windows = Json::array();
  for (const auto& w : res.delta.windows)
    windows.push_back({{"adaptations", w.adaptations},
                       {"checkpoints", w.checkpoints},
                       {"first_dialogue", w.first_dialogue},
                       {"last_dialogue", w.last_dialogue},
                       {"initial", stats_of(w.initial)},
                       {"learn", stats_of(w.learn)},
                       {"unknown", stats_of(w.unknown)},
                       {"weighted", stats_of(w.weighted)}});
  write_text(dir / "delta.json", Json{{"windows", windows},
                                      {"overall", {{"initial", stats_of(res.delta.initial)},
                                                   {"learn", stats_of(res.delta.learn)},
                                                   {"unknown", stats_of(res.delta.unknown)},
                                                   {"weighted", stats_of(res.delta.weighted)}}}}
                                     .dump(2) + "\n");
  Json summary{{"kind", "run"},
               {"mode", name_of(mode)},
               {"seed", c.seed},
               {"dialogues", goals.size()},
               {"test_hashes", hashes_start},
               {"initial", to_json(res.initial)},
               {"final", to_json(res.final_model)},
               {"final_with_stm", to_json(res.final_stm)},
               {"stats", to_json(res.stats)},
               {"train_learn", {{"sets", res.train_learn_sets}, {"isolation", to_json(res.train_learn_isolation)}}},
               {"stm_delta_learn", stats_of(res.delta.learn)},
               {"final_checkpoint_hash", file_hash(dir / "final.ckpt")}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  Log::get().info("simulate ", name_of(mode), " seed ", c.seed, ": ", sim.stats.adaptations, " adaptations, f1_learn ",
                  format_score(res.initial.f1_learn), " -> ", format_score(res.final_model.f1_learn), ", f1_initial ",
                  format_score(res.initial.f1_initial), " -> ", format_score(res.final_model.f1_initial), " (",
                  static_cast<int>(secs), "s)");
  return res;
}

// ---------------------------------------------------------------------------
// report

inline std::string row_label(std::string_view mode) {
  if (mode == "RPM") return "model_LEARN,RPM";
  if (mode == "RM") return "model_LEARN,RM";
  if (mode == "STM_ONLY") return "model_LEARN,STM";
  if (mode == "SIMU_UPPER") return "model_SIMU";
  return std::string(mode);
}

struct ReportResult {
  std::vector<TableRow> rows;
  std::string table;
  fs::path dir;
};

inline std::string render_svg(const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series,
                              const std::string& title) {
  const double w = 720, h = 400, ml = 50, mr = 170, mt = 30, mb = 40;
  double xmax = 1, ymin = 100, ymax = 0;
  for (const auto& [name, pts] : series)
    for (auto [x, y] : pts) {
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  ymin = std::floor(std::max(0.0, ymin - 1));
  ymax = std::ceil(std::min(100.0, ymax + 1));
  if (ymax <= ymin) ymax = ymin + 1;
  auto px = [&](double x) { return ml + (w - ml - mr) * x / xmax; };
  auto py = [&](double y) { return mt + (h - mt - mb) * (1 - (y - ymin) / (ymax - ymin)); };
  static constexpr std::array<const char*, 6> colors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream s;
  char buf[64];
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  s << "<text x=\"" << ml << "\" y=\"18\" font-size=\"14\">" << title << "</text>\n";
  s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << (w - ml - mr) << "\" height=\"" << (h - mt - mb)
    << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = ymin + (ymax - ymin) * k / 4;
    std::snprintf(buf, sizeof buf, "%.1f", y);
    s << "<text x=\"4\" y=\"" << py(y) + 4 << "\" font-size=\"11\">" << buf << "</text>\n";
  }
  s << "<text x=\"" << ml << "\" y=\"" << h - 10 << "\" font-size=\"11\">dialogue 0 .. " << xmax << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& [name, pts] = series[i];
    s << "<polyline fill=\"none\" stroke=\"" << colors[i % colors.size()] << "\" points=\"";
    for (auto [x, y] : pts) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(x), py(y));
      s << buf;
    }
    s << "\"/>\n";
    s << "<text x=\"" << (w - mr + 8) << "\" y=\"" << (mt + 16 * (i + 1)) << "\" font-size=\"12\" fill=\""
      << colors[i % colors.size()] << "\">" << name << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

// Table of the initial model and every run, curve files per run and a chart.
// Runs must have been evaluated on identical test sets.
inline ReportResult cmd_report(const std::vector<fs::path>& dirs, const fs::path& out_dir) {
  if (dirs.empty()) throw ConfigError("report needs at least one run directory");
  struct Loaded {
    fs::path dir;
    Json summary;
  };
  std::vector<Loaded> runs;
  for (const auto& d : dirs) runs.push_back({d, read_json(d / "summary.json")});
  const Json& ref = runs.front().summary.at("test_hashes");
  for (const auto& r : runs)
    if (r.summary.at("test_hashes") != ref)
      throw DataError("refusing to compare " + runs.front().dir.string() + " and " + r.dir.string() +
                      ": they were evaluated on different test sets");

  ensure_dir(out_dir);
  ReportResult res;
  res.dir = out_dir;
  res.rows.push_back(row_from("model_INITIAL", record_from_json(runs.front().summary.at("initial"))));
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
  std::map<std::string, int> label_uses;
  Json report_json{{"rows", Json::array()}, {"runs", Json::array()}};
  for (const auto& r : runs) {
    if (r.summary.at("kind") != "run") continue;
    const std::string mode = r.summary.at("mode");
    std::string label = row_label(mode);
    if (label_uses[label]++ > 0) label += "#" + std::to_string(label_uses[label]);
    const auto rec = record_from_json(r.summary.at(mode == "STM_ONLY" ? "final_with_stm" : "final"));
    res.rows.push_back(row_from(label, rec));

    const auto records = read_eval_csv_file((r.dir / "eval.csv").string());
    std::ostringstream curve;
    curve << "dialogue\tf1_initial\tf1_learn\tf1_unknown\tf1_weighted\tstm_f1_initial\tstm_f1_learn\tstm_f1_unknown\tstm_f1_weighted\n";
    std::map<std::size_t, std::pair<const EvalRecord*, const EvalRecord*>> by_dialogue;
    for (const auto& x : records) (x.with_stm ? by_dialogue[x.dialogue].second : by_dialogue[x.dialogue].first) = &x;
    std::vector<std::pair<double, double>> pts;
    for (const auto& [d, pair] : by_dialogue) {
      const auto* m = pair.first;
      const auto* s = pair.second ? pair.second : pair.first;
      if (!m) continue;
      curve << d << '\t' << format_score(m->f1_initial) << '\t' << format_score(m->f1_learn) << '\t'
            << format_score(m->f1_unknown) << '\t' << format_score(m->f1_weighted) << '\t'
            << format_score(s->f1_initial) << '\t' << format_score(s->f1_learn) << '\t'
            << format_score(s->f1_unknown) << '\t' << format_score(s->f1_weighted) << '\n';
      pts.emplace_back(static_cast<double>(d), (mode == "STM_ONLY" ? s : m)->f1_weighted);
    }
    std::string file = label;
    std::replace(file.begin(), file.end(), ',', '_');
    std::replace(file.begin(), file.end(), '#', '_');
    write_text(out_dir / ("curve_" + file + ".tsv"), curve.str());
    series.emplace_back(label, std::move(pts));
    report_json["runs"].push_back({{"dir", r.dir.string()}, {"label", label}, {"stats", r.summary.at("stats")},
                                   {"stm_delta_learn", r.summary.at("stm_delta_learn")}});
  }
  for (const auto& row : res.rows) {
    Json j{{"label", row.label}, {"f1_initial", row.f1_initial}, {"f1_learn", row.f1_learn},
           {"f1_unknown", row.f1_unknown}, {"f1_weighted", row.f1_weighted}};
    if (row.f1_real) j["f1_real"] = *row.f1_real;
    report_json["rows"].push_back(j);
  }
  res.table = format_table(res.rows);
  std::ostringstream text;
  text << res.table;
  for (const auto& r : report_json["runs"]) {
    const auto& d = r.at("stm_delta_learn");
    text << "\n" << r.at("label").get<std::string>() << ": STM contribution on test_LEARN max "
         << format_score(d.at("max").get<double>()) << ", mean " << format_score(d.at("mean").get<double>())
         << ", median " << format_score(d.at("median").get<double>()) << "; annotation success rate "
         << format_score(100 * r.at("stats").at("annotation_success_rate").get<double>()) << "%";
  }
  text << "\n";
  write_text(out_dir / "report.txt", text.str());
  write_text(out_dir / "report.json", report_json.dump(2) + "\n");
  if (!series.empty()) write_text(out_dir / "weighted_f1.svg", render_svg(series, "weighted F1 during simulation"));
  return res;
}

// ---------------------------------------------------------------------------
// grid

template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

inline RunConfig config_for_seed(const RunConfig& c, std::uint64_t seed) {
  RunConfig s = c;
  s.seed = seed;
  s.output_dir = (fs::path(c.output_dir) / ("seed-" + std::to_string(seed))).string();
  return s;
}

struct GridCell {
  std::uint64_t seed = 0;
  Mode mode = Mode::rpm;
  SimulateResult result;
};

struct GridResult {
  std::vector<TrainResult> initial;  // per seed, in seed order
  std::vector<GridCell> cells;       // seed-major
};

inline GridResult cmd_grid(const RunConfig& c, const std::vector<std::uint64_t>& seeds, const std::vector<Mode>& modes,
                           std::size_t jobs) {
  if (seeds.empty() || modes.empty()) throw ConfigError("grid needs at least one seed and one mode");
  GridResult g;
  g.initial.resize(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t i) {
    const auto sc = config_for_seed(c, seeds[i]);
    cmd_gen_data(sc);
    g.initial[i] = cmd_train(sc);
  });
  g.cells.resize(seeds.size() * modes.size());
  parallel_for(g.cells.size(), jobs, [&](std::size_t k) {
    auto& cell = g.cells[k];
    cell.seed = seeds[k / modes.size()];
    cell.mode = modes[k % modes.size()];
    cell.result = cmd_simulate(config_for_seed(c, cell.seed), cell.mode);
  });
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto sc = config_for_seed(c, seeds[i]);
    std::vector<fs::path> dirs;
    for (Mode m : modes) dirs.push_back(run_dir(sc, m));
    cmd_report(dirs, sc.output_path() / "report");
  }
  Json summary = Json::array();
  for (const auto& cell : g.cells)
    summary.push_back({{"seed", cell.seed},
                       {"mode", name_of(cell.mode)},
                       {"initial", to_json(cell.result.initial)},
                       {"final", to_json(cell.result.final_model)},
                       {"final_with_stm", to_json(cell.result.final_stm)},
                       {"adaptations", cell.result.stats.adaptations}});
  ensure_dir(c.output_path());
  write_text(c.output_path() / "grid_summary.json", summary.dump(2) + "\n");
  return g;
}

}  // namespace otjl
