// fedcorr command-line tool: experiment runner (run), correlation probe
// (probe), and the basis-reuse cost calculators (breakeven, horizon).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fedcorr/config.hpp"
#include "fedcorr/costs.hpp"
#include "fedcorr/error.hpp"
#include "fedcorr/fedsim.hpp"
#include "fedcorr/kernels.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

bool log_enabled() {
  const char* level = std::getenv("FEDCORR_LOG");
  return level != nullptr && level[0] != '\0' &&
         std::string_view(level) != "0";
}

struct RunOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool strict_paper_pca = false;
};

void add_common_flags(CLI::App* cmd, RunOptions& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--out-dir", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "override the config seed")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_flag("--strict-paper-pca", opts.strict_paper_pca,
                "rank budget ceil(beta*p) instead of ceil(beta*min(p,n))");
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw fedcorr::Error("cannot write " + path.string());
  return out;
}

int execute(const RunOptions& opts, bool probe) {
  fedcorr::ExperimentConfig cfg;
  try {
    cfg = fedcorr::load_experiment_config(opts.config_path);
  } catch (const fedcorr::InvalidInput& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
  if (opts.seed_set) cfg.fed.seed = opts.seed;
  if (opts.strict_paper_pca)
    cfg.fed.rank_rule = fedcorr::PcaRankRule::kStrictPaper;
  if (probe) {
    if (cfg.fed.scheme != fedcorr::Scheme::kNone) {
      std::cerr << "probe: compression disabled, ignoring configured scheme\n";
      cfg.fed.scheme = fedcorr::Scheme::kNone;
    }
    cfg.fed.probe = true;
  }

  const fedcorr::LabeledDataset dataset =
      fedcorr::materialize_dataset(cfg.dataset, cfg.fed.seed);

  if (log_enabled()) {
    std::cerr << "fedcorr: kernels=" << fedcorr::kernels::backend_name()
              << " scheme=" << fedcorr::scheme_name(cfg.fed.scheme)
              << " d=" << cfg.model.param_count()
              << " samples=" << dataset.size() << "\n";
  }

  const fedcorr::ExperimentResult result =
      fedcorr::run_experiment(cfg.fed, cfg.model, dataset);

  std::filesystem::create_directories(opts.out_dir);
  const std::filesystem::path dir(opts.out_dir);

  if (probe) {
    auto out = open_output(dir / "correlations.jsonl");
    for (const auto& record : result.records)
      for (const auto& reading : record.readings)
        out << reading.to_jsonl() << "\n";
  } else {
    auto rounds_out = open_output(dir / "rounds.jsonl");
    auto states_out = open_output(dir / "state_trace.jsonl");
    for (const auto& record : result.records) {
      rounds_out << record.to_jsonl() << "\n";
      states_out << record.state_trace_jsonl() << "\n";
    }
    auto summary = open_output(dir / "summary.csv");
    summary << fedcorr::summary_csv_header() << "\n";
    summary << result.summary_csv_row(fedcorr::scheme_name(cfg.fed.scheme))
            << "\n";
  }

  if (log_enabled()) {
    for (const auto& record : result.records) {
      std::cerr << "round " << record.round << " loss " << record.train_loss
                << " acc " << record.val_accuracy << " uplink "
                << record.traffic.uplink_total() << "\n";
    }
  }

  std::cout << fedcorr::summary_csv_header() << "\n"
            << result.summary_csv_row(fedcorr::scheme_name(cfg.fed.scheme))
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated update-compression toolkit"};
  app.require_subcommand(1);

  RunOptions run_opts;
  RunOptions probe_opts;
  std::size_t breakeven_m = 0;
  std::size_t breakeven_r = 0;
  double horizon_c = 0.0;

  CLI::App* run_cmd = app.add_subcommand("run", "run a federated experiment");
  add_common_flags(run_cmd, run_opts);

  CLI::App* probe_cmd = app.add_subcommand(
      "probe", "measure correlations during uncompressed training");
  add_common_flags(probe_cmd, probe_opts);

  CLI::App* breakeven_cmd = app.add_subcommand(
      "breakeven", "rounds after which basis reuse beats raw transmission");
  breakeven_cmd->add_option("m", breakeven_m, "slice length")->required();
  breakeven_cmd->add_option("r", breakeven_r, "basis rank")->required();

  CLI::App* horizon_cmd = app.add_subcommand(
      "horizon", "basis reuse horizon for a per-round cosine lower bound");
  horizon_cmd->add_option("c", horizon_c, "cosine lower bound in (0,1]")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (app.got_subcommand(run_cmd)) return execute(run_opts, false);
    if (app.got_subcommand(probe_cmd)) return execute(probe_opts, true);
    if (app.got_subcommand(breakeven_cmd)) {
      try {
        std::cout << fedcorr::breakeven_rounds(breakeven_m, breakeven_r)
                  << "\n";
      } catch (const fedcorr::InvalidInput& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
      }
      return 0;
    }
    if (app.got_subcommand(horizon_cmd)) {
      try {
        const auto primary = fedcorr::reuse_horizon(horizon_c);
        const auto quarter = fedcorr::reuse_horizon_quarter(horizon_c);
        if (primary) {
          std::cout << "horizon: " << *primary << "\n";
        } else {
          std::cout << "horizon: unbounded\n";
        }
        if (quarter) {
          std::cout << "alternate-quarter: " << *quarter << "\n";
        } else {
          std::cout << "alternate-quarter: unbounded\n";
        }
      } catch (const fedcorr::InvalidInput& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
      }
      return 0;
    }
  } catch (const fedcorr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
