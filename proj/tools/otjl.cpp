#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "otjl/otjl.hpp"

namespace {

std::size_t default_jobs() {
  if (const char* env = std::getenv("OTJL_JOBS"); env && *env) {
    try {
      return std::max(1ul, std::stoul(env));
    } catch (const std::exception&) {
      throw otjl::ConfigError("OTJL_JOBS must be a positive integer");
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"On-the-job learning laboratory for slot-filling NLU"};
  app.require_subcommand(1);
  std::string config_path;
  std::string root;
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only print results");

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--root", root, "Directory config paths are relative to (default: the config's directory)");
  };

  auto* gen = app.add_subcommand("gen-data", "Split resources and write every dataset");
  add_config(gen);

  auto* train = app.add_subcommand("train", "Train the initial model on train_INITIAL");
  add_config(train);

  auto* sim = app.add_subcommand("simulate", "Run the simulated production phase");
  add_config(sim);
  std::string mode_name;
  std::string run_dir;
  sim->add_option("-m,--mode", mode_name, "RPM, RM, STM_ONLY or SIMU_UPPER")->required();
  sim->add_option("--run-dir", run_dir, "Write artifacts here instead of <output_dir>/runs/<mode>");

  auto* report = app.add_subcommand("report", "Compare runs and emit tables and curves");
  std::vector<std::string> report_dirs;
  std::string report_out;
  report->add_option("runs", report_dirs, "Run directories (or a model directory)")->required()->check(CLI::ExistingDirectory);
  report->add_option("-o,--out", report_out, "Output directory (default: <first run>/../report)");

  auto* grid = app.add_subcommand("grid", "gen-data, train and simulate for several seeds and modes");
  add_config(grid);
  std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  std::vector<std::string> mode_names{"RPM", "RM", "STM_ONLY", "SIMU_UPPER"};
  std::size_t jobs = 0;
  grid->add_option("--seeds", seeds, "Seeds")->delimiter(',');
  grid->add_option("--modes", mode_names, "Modes")->delimiter(',');
  grid->add_option("-j,--jobs", jobs, "Parallel runs (default: OTJL_JOBS or 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    otjl::Log::get().set_level(quiet ? otjl::LogLevel::quiet : otjl::LogLevel::info);
    auto config = [&] {
      return otjl::load_config(config_path, root.empty() ? std::nullopt : std::optional<otjl::fs::path>(root));
    };
    if (gen->parsed()) {
      auto res = otjl::cmd_gen_data(config());
      for (const auto& [name, hash] : res.hashes) std::cout << name << '\t' << hash << '\n';
    } else if (train->parsed()) {
      auto res = otjl::cmd_train(config());
      std::cout << "checkpoint\t" << res.checkpoint_hash << '\n'
                << "dev_f1\t" << otjl::format_score(res.model.report().selected_dev_f1) << '\n'
                << "f1_initial\t" << otjl::format_score(res.scores.f1_initial) << '\n'
                << "f1_learn\t" << otjl::format_score(res.scores.f1_learn) << '\n'
                << "f1_unknown\t" << otjl::format_score(res.scores.f1_unknown) << '\n';
    } else if (sim->parsed()) {
      const auto mode = otjl::parse_mode(mode_name);
      auto res = otjl::cmd_simulate(config(), mode,
                                    run_dir.empty() ? std::nullopt : std::optional<otjl::fs::path>(run_dir));
      std::cout << "run\t" << res.dir.string() << '\n'
                << "adaptations\t" << res.stats.adaptations << '\n'
                << "f1_weighted\t" << otjl::format_score(res.initial.f1_weighted) << " -> "
                << otjl::format_score(res.final_model.f1_weighted) << '\n';
    } else if (report->parsed()) {
      std::vector<otjl::fs::path> dirs(report_dirs.begin(), report_dirs.end());
      const otjl::fs::path out = report_out.empty() ? dirs.front().parent_path() / "report" : otjl::fs::path(report_out);
      auto res = otjl::cmd_report(dirs, out);
      std::cout << res.table;
    } else if (grid->parsed()) {
      std::vector<otjl::Mode> modes;
      for (const auto& m : mode_names) modes.push_back(otjl::parse_mode(m));
      const auto cfg = config();
      auto res = otjl::cmd_grid(cfg, seeds, modes, jobs ? jobs : default_jobs());
      for (const auto& cell : res.cells)
        std::cout << "seed " << cell.seed << '\t' << otjl::name_of(cell.mode) << "\tf1_learn "
                  << otjl::format_score(cell.result.initial.f1_learn) << " -> "
                  << otjl::format_score(cell.result.final_model.f1_learn) << "\tf1_initial "
                  << otjl::format_score(cell.result.initial.f1_initial) << " -> "
                  << otjl::format_score(cell.result.final_model.f1_initial) << '\n';
    }
  } catch (const otjl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(otjl::ExitCode::runtime);
  }
  return 0;
}
