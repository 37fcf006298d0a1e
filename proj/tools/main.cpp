#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maxinfo/bandit.hpp"
#include "maxinfo/harness.hpp"

namespace fs = std::filesystem;
using namespace maxinfo;

namespace {

struct FlagBinding {
  const char* flag;
  const char* key;
  const char* desc;
  std::string value;
  CLI::Option* opt = nullptr;
};

void bind_flags(CLI::App* cmd, std::vector<FlagBinding>& flags) {
  for (FlagBinding& f : flags) f.opt = cmd->add_option(f.flag, f.value, f.desc);
}

std::vector<std::pair<std::string, std::string>> present_flags(
    const std::vector<FlagBinding>& flags) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const FlagBinding& f : flags)
    if (f.opt->count() > 0) out.emplace_back(f.key, f.value);
  return out;
}

std::optional<fs::path> file_option(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return fs::path(path);
}

int do_train(const RunConfig& base, int seed_count) {
  if (seed_count < 1)
    throw std::invalid_argument("train: --seeds must be >= 1");
  const long long base_seed = config_int(base, "seed");
  std::vector<TrainOutcome> outcomes(static_cast<std::size_t>(seed_count));
  std::vector<std::function<void()>> jobs;
  for (int i = 0; i < seed_count; ++i) {
    jobs.emplace_back([&base, &outcomes, base_seed, i] {
      RunConfig cfg = base;
      cfg["seed"] = std::to_string(base_seed + i);
      outcomes[static_cast<std::size_t>(i)] = run_training(cfg);
    });
  }
  run_jobs(jobs, max_jobs());
  for (const TrainOutcome& o : outcomes) {
    std::cout << "wrote " << o.csv_path.string();
    if (!o.rows.empty())
      std::cout << " (final eval " << o.rows.back().episodic_return << ")";
    std::cout << "\n";
  }
  return 0;
}

int do_bandit(const RunConfig& cfg) {
  const BanditOutcome outcome = run_bandit_experiment(cfg);
  const long long horizon = config_int(cfg, "horizon");
  std::vector<double> finals;
  for (const RegretTrace& trace : outcome.traces)
    finals.push_back(trace.cumulative(horizon - 1) /
                     static_cast<double>(horizon));
  std::sort(finals.begin(), finals.end());
  const std::size_t n = finals.size();
  const double median = n % 2 == 1 ? finals[n / 2]
                                   : 0.5 * (finals[n / 2 - 1] + finals[n / 2]);
  std::cout << "wrote " << n << " bandit runs to "
            << config_string(cfg, "out") << "\n";
  std::cout << "median final average regret: " << median << "\n";
  return 0;
}

int do_tabular(const RunConfig& cfg) {
  const TabularAudit audit = run_tabular_audit(cfg);
  std::cout << "checked " << config_int(cfg, "mdps")
            << " mdps x 4 temperature settings: " << audit.passes << "/"
            << audit.runs << " pass\n";
  std::cout << "worst monotonicity violation: " << audit.worst_monotone
            << " (tolerance " << kMonotoneTol << ")\n";
  std::cout << "worst evaluation-oracle gap: " << audit.worst_oracle
            << " (tolerance " << kOracleTol << ")\n";
  std::cout << "wrote " << audit.csv_path.string() << "\n";
  return audit.passes == audit.runs ? 0 : 1;
}

int do_aggregate(const std::string& dir) {
  const fs::path out = aggregate_directory(dir);
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exploration agents, bandit regret runs, and tabular checks"};
  app.require_subcommand(1);

  CLI::App* train = app.add_subcommand("train", "train an agent and log evals");
  std::vector<FlagBinding> train_flags = {
      {"--env", "env", "pendulum or cartpole"},
      {"--algo", "algo",
       "sac, maxinfosac, sac_intrinsic, explore_exploit, or eps_maxinfo"},
      {"--action-cost", "action_cost", "action penalty coefficient"},
      {"--steps", "total_steps", "environment steps"},
      {"--seed", "seed", "base seed"},
      {"--out", "out", "output directory"},
      {"--gamma", "gamma", "discount factor"},
      {"--lr", "lr", "learning rate"},
      {"--batch-size", "batch_size", "minibatch size"},
      {"--tau", "tau", "polyak coefficient"},
      {"--warmup-steps", "warmup_steps", "uniform-random warmup steps"},
      {"--updates-per-step", "updates_per_step", "gradient updates per step"},
      {"--buffer-capacity", "buffer_capacity", "replay capacity"},
      {"--hidden", "hidden", "comma-separated hidden widths"},
      {"--ensemble-size", "ensemble_size", "dynamics ensemble members"},
      {"--intrinsic", "intrinsic", "info_gain, curiosity, or rnd"},
      {"--target-info-samples", "target_info_samples",
       "target-policy bonus samples"},
      {"--eps0", "eps0", "initial exploration probability"},
      {"--eps-decay-steps", "eps_decay_steps", "epsilon decay horizon"},
      {"--eps-block", "eps_block", "epsilon block length"},
      {"--eval-every", "eval_every", "steps between evaluations"},
      {"--eval-episodes", "eval_episodes", "episodes per evaluation"},
  };
  bind_flags(train, train_flags);
  std::string train_config_file;
  train->add_option("--config", train_config_file, "config file");
  int train_seeds = 1;
  train->add_option("--seeds", train_seeds,
                    "consecutive seeds starting at --seed");

  CLI::App* bandit = app.add_subcommand("bandit", "run bandit regret seeds");
  std::vector<FlagBinding> bandit_flags = {
      {"--alpha", "alpha", "exploration schedule exponent"},
      {"--horizon", "horizon", "rounds per seed"},
      {"--seeds", "seeds", "number of seeds"},
      {"--noise", "noise", "observation noise standard deviation"},
      {"--grid-points", "grid_points", "candidate grid size"},
      {"--out", "out", "output directory"},
  };
  bind_flags(bandit, bandit_flags);
  std::string bandit_config_file;
  bandit->add_option("--config", bandit_config_file, "config file");

  CLI::App* tabular =
      app.add_subcommand("tabular", "verify soft policy iteration on random mdps");
  std::vector<FlagBinding> tabular_flags = {
      {"--mdps", "mdps", "number of random mdps"},
      {"--seed", "seed", "root seed"},
      {"--gamma", "gamma", "discount factor"},
      {"--out", "out", "output directory"},
  };
  bind_flags(tabular, tabular_flags);
  std::string tabular_config_file;
  tabular->add_option("--config", tabular_config_file, "config file");

  CLI::App* aggregate =
      app.add_subcommand("aggregate", "aggregate per-seed csv logs");
  std::string aggregate_dir;
  aggregate->add_option("dir", aggregate_dir, "directory of csv logs")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed())
      return do_train(parse_config(train_defaults(), present_flags(train_flags),
                                   file_option(train_config_file)),
                      train_seeds);
    if (bandit->parsed())
      return do_bandit(parse_config(bandit_defaults(),
                                    present_flags(bandit_flags),
                                    file_option(bandit_config_file)));
    if (tabular->parsed())
      return do_tabular(parse_config(tabular_defaults(),
                                     present_flags(tabular_flags),
                                     file_option(tabular_config_file)));
    if (aggregate->parsed()) return do_aggregate(aggregate_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
