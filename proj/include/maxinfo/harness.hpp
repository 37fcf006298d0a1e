#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maxinfo/agents.hpp"
#include "maxinfo/bandit.hpp"
#include "maxinfo/envs.hpp"
#include "maxinfo/policy.hpp"
#include "maxinfo/rng.hpp"
#include "maxinfo/tabular.hpp"

namespace maxinfo {

// Flat key/value configuration. Parsing starts from a defaults map and
// rejects any key that is not present in it.
using RunConfig = std::map<std::string, std::string>;

RunConfig train_defaults();
RunConfig bandit_defaults();
RunConfig tabular_defaults();

// `key = value` lines; '#' starts a comment, blank lines are skipped.
std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path);

// Precedence: command-line flag > file entry > default.
RunConfig parse_config(
    const RunConfig& defaults,
    const std::vector<std::pair<std::string, std::string>>& flags,
    const std::optional<std::filesystem::path>& file = std::nullopt);

// Emits the config as sorted `key = value` lines; parses back verbatim.
void write_config_snapshot(const RunConfig& config,
                           const std::filesystem::path& path);

const std::string& config_string(const RunConfig& config,
                                 const std::string& key);
long long config_int(const RunConfig& config, const std::string& key);
double config_double(const RunConfig& config, const std::string& key);

// Comma-separated layer widths, e.g. "256,256"; empty means no hidden layers.
std::vector<int> parse_hidden(const std::string& text);

AgentConfig agent_config_from(const RunConfig& config);

struct LogRow {
  long long step = 0;
  double episodic_return = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double mean_intrinsic = 0.0;
  double policy_entropy_estimate = 0.0;
  double critic_loss = 0.0;
};

inline constexpr char kLogHeader[] =
    "step,episodic_return,alpha1,alpha2,mean_intrinsic,policy_entropy_"
    "estimate,critic_loss";

// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

// Steps must be strictly increasing; both directions enforce it.
void write_log_csv(const std::filesystem::path& path,
                   const std::vector<LogRow>& rows);
std::vector<LogRow> read_log_csv(const std::filesystem::path& path);

struct EvalResult {
  double mean_return = 0.0;
  // Mean |wrapped angle| over the final `tail` steps of each episode
  // (pendulum angle, or pole angle for cartpole).
  double tail_angle = 0.0;
};

// Runs full episodes with the deterministic (mean) action.
EvalResult evaluate_policy(const SquashedGaussianPolicy& policy, EnvKind kind,
                           const ActionCostConfig& cost, int episodes,
                           Rng& rng, int tail = 50);

struct TrainOutcome {
  std::filesystem::path csv_path;
  std::vector<LogRow> rows;
  double final_tail_angle = 0.0;
};

// Trains per the config, evaluates every eval_every steps, and writes
// <algo>_seed<seed>.csv plus a config snapshot into the output directory.
TrainOutcome run_training(const RunConfig& config);
std::filesystem::path run_experiment(const RunConfig& config);

struct BanditOutcome {
  std::vector<std::filesystem::path> csv_paths;
  std::vector<RegretTrace> traces;
};

// Runs `seeds` regret experiments on the standard objective (seeds counted
// from 0) and writes bandit_seed<k>.csv files plus a config snapshot into
// the output directory. Columns: t,instant_regret,cumulative_regret,
// chose_explore.
BanditOutcome run_bandit_experiment(const RunConfig& config);

inline constexpr double kMonotoneTol = 1e-9;
inline constexpr double kOracleTol = 1e-10;

struct TabularAudit {
  long long runs = 0;
  long long passes = 0;
  double worst_monotone = 0.0;
  double worst_oracle = 0.0;
  std::string csv;
  std::filesystem::path csv_path;
};

// Soft policy iteration on random mdps at four temperature settings each,
// audited for monotone Q-improvement and, at every evaluation pass, against
// a direct linear-solve of the fixed point. Writes tabular.csv plus a
// config snapshot into the output directory.
TabularAudit run_tabular_audit(const RunConfig& config);

struct Aggregate {
  std::vector<long long> steps;
  Eigen::VectorXd mean;
  Eigen::VectorXd median;
  Eigen::VectorXd std_error;
};

// Per-step statistics of episodic_return across runs. Step grids must be
// identical; values are sorted per step, so file order never matters.
Aggregate aggregate_seeds(const std::vector<std::filesystem::path>& paths);
void write_aggregate_csv(const Aggregate& agg,
                         const std::filesystem::path& path);

// Aggregates every *.csv in the directory except aggregate.csv itself and
// writes <dir>/aggregate.csv.
std::filesystem::path aggregate_directory(const std::filesystem::path& dir);

// MAXINFO_THREADS when set to a positive integer, hardware concurrency
// otherwise; at least 1.
int max_jobs();

// Runs the jobs on up to max_threads workers; rethrows the first failure
// after all workers finish. A single worker runs the jobs in order.
void run_jobs(const std::vector<std::function<void()>>& jobs, int max_threads);

}  // namespace maxinfo
