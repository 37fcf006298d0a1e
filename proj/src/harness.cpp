#include "maxinfo/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace maxinfo {

namespace {

// Streams 0-12 belong to the agent; evaluation episodes get their own so a
// mid-training eval never perturbs the training draws.
constexpr std::uint64_t kEvalEnvStream = 13;

std::string trim(const std::string& s) {
  const char* ws = " \t\r";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

long long to_int(const std::string& text, const std::string& what) {
  long long value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end)
    throw std::invalid_argument("harness: bad integer for " + what + ": \"" +
                                text + "\"");
  return value;
}

double to_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end)
    throw std::invalid_argument("harness: bad number for " + what + ": \"" +
                                text + "\"");
  return value;
}

std::string read_text_file(const std::filesystem::path& path,
                           const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error(std::string("harness: cannot open ") + what +
                             ": " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text, const char* what) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error(std::string("harness: cannot write ") + what +
                             ": " + path.string());
  out << text;
}

}  // namespace

RunConfig train_defaults() {
  return {
      {"action_cost", "0"},
      {"algo", "maxinfosac"},
      {"batch_size", "256"},
      {"buffer_capacity", "100000"},
      {"ensemble_size", "5"},
      {"env", "pendulum"},
      {"eps0", "1"},
      {"eps_block", "32"},
      {"eps_decay_steps", "0"},
      {"eval_episodes", "5"},
      {"eval_every", "1000"},
      {"gamma", "0.99"},
      {"hidden", "256,256"},
      {"intrinsic", "info_gain"},
      {"lr", "0.0003"},
      {"out", "runs"},
      {"seed", "0"},
      {"target_info_samples", "1"},
      {"tau", "0.005"},
      {"total_steps", "30000"},
      {"updates_per_step", "1"},
      {"warmup_steps", "1000"},
  };
}

RunConfig bandit_defaults() {
  return {
      {"alpha", "0.4"},    {"grid_points", "256"}, {"horizon", "2000"},
      {"noise", "0.05"},   {"out", "runs"},        {"seeds", "10"},
  };
}

RunConfig tabular_defaults() {
  return {
      {"gamma", "0.9"},
      {"mdps", "100"},
      {"out", "runs"},
      {"seed", "0"},
  };
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path) {
  const std::string text = read_text_file(path, "config file");
  std::vector<std::pair<std::string, std::string>> entries;
  for (const std::string& raw : split(text, '\n')) {
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("harness: bad config line: \"" + line +
                                  "\"");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("harness: bad config line: \"" + line +
                                  "\"");
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return entries;
}

RunConfig parse_config(
    const RunConfig& defaults,
    const std::vector<std::pair<std::string, std::string>>& flags,
    const std::optional<std::filesystem::path>& file) {
  RunConfig config = defaults;
  const auto apply = [&config](const std::string& key,
                               const std::string& value) {
    const auto it = config.find(key);
    if (it == config.end())
      throw std::invalid_argument("harness: unknown config key: " + key);
    it->second = value;
  };
  if (file)
    for (const auto& [key, value] : read_config_file(*file)) apply(key, value);
  for (const auto& [key, value] : flags) apply(key, value);
  return config;
}

void write_config_snapshot(const RunConfig& config,
                           const std::filesystem::path& path) {
  std::string text;
  for (const auto& [key, value] : config)
    text += key + " = " + value + "\n";
  write_text_file(path, text, "config snapshot");
}

const std::string& config_string(const RunConfig& config,
                                 const std::string& key) {
  const auto it = config.find(key);
  if (it == config.end())
    throw std::invalid_argument("harness: missing config key: " + key);
  return it->second;
}

long long config_int(const RunConfig& config, const std::string& key) {
  return to_int(config_string(config, key), key);
}

double config_double(const RunConfig& config, const std::string& key) {
  return to_double(config_string(config, key), key);
}

std::vector<int> parse_hidden(const std::string& text) {
  std::vector<int> sizes;
  if (trim(text).empty()) return sizes;
  for (const std::string& piece : split(text, ',')) {
    const long long width = to_int(trim(piece), "hidden");
    if (width < 1)
      throw std::invalid_argument("harness: bad hidden sizes: \"" + text +
                                  "\"");
    sizes.push_back(static_cast<int>(width));
  }
  return sizes;
}

AgentConfig agent_config_from(const RunConfig& config) {
  AgentConfig a;
  a.algo = algo_from_name(config_string(config, "algo"));
  a.gamma = config_double(config, "gamma");
  a.lr = config_double(config, "lr");
  a.batch_size = static_cast<int>(config_int(config, "batch_size"));
  a.tau = config_double(config, "tau");
  a.warmup_steps = static_cast<int>(config_int(config, "warmup_steps"));
  a.updates_per_step = static_cast<int>(config_int(config, "updates_per_step"));
  a.buffer_capacity = static_cast<int>(config_int(config, "buffer_capacity"));
  a.hidden = parse_hidden(config_string(config, "hidden"));
  a.ensemble_size = static_cast<int>(config_int(config, "ensemble_size"));
  a.intrinsic = intrinsic_from_name(config_string(config, "intrinsic"));
  a.target_info_samples =
      static_cast<int>(config_int(config, "target_info_samples"));
  a.total_steps = config_int(config, "total_steps");
  a.action_cost = config_double(config, "action_cost");
  a.eps.eps0 = config_double(config, "eps0");
  a.eps.decay_steps = config_int(config, "eps_decay_steps");
  a.eps.block = static_cast<int>(config_int(config, "eps_block"));
  return a;
}

std::string format_double(double value) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

void write_log_csv(const std::filesystem::path& path,
                   const std::vector<LogRow>& rows) {
  std::string text = std::string(kLogHeader) + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].step <= rows[i - 1].step)
      throw std::invalid_argument(
          "harness: log steps must be strictly increasing");
    const LogRow& r = rows[i];
    text += std::to_string(r.step);
    for (double v : {r.episodic_return, r.alpha1, r.alpha2, r.mean_intrinsic,
                     r.policy_entropy_estimate, r.critic_loss})
      text += "," + format_double(v);
    text += "\n";
  }
  write_text_file(path, text, "log csv");
}

std::vector<LogRow> read_log_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path, "log csv");
  std::vector<std::string> lines = split(text, '\n');
  for (std::string& line : lines)
    if (!line.empty() && line.back() == '\r') line.pop_back();
  if (lines.empty() || lines.front() != kLogHeader)
    throw std::runtime_error("harness: bad csv header in " + path.string());
  std::vector<LogRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> fields = split(lines[i], ',');
    if (fields.size() != 7)
      throw std::runtime_error("harness: bad csv row in " + path.string() +
                               ": \"" + lines[i] + "\"");
    LogRow r;
    r.step = to_int(fields[0], "step");
    r.episodic_return = to_double(fields[1], "episodic_return");
    r.alpha1 = to_double(fields[2], "alpha1");
    r.alpha2 = to_double(fields[3], "alpha2");
    r.mean_intrinsic = to_double(fields[4], "mean_intrinsic");
    r.policy_entropy_estimate = to_double(fields[5], "policy_entropy_estimate");
    r.critic_loss = to_double(fields[6], "critic_loss");
    if (!rows.empty() && r.step <= rows.back().step)
      throw std::runtime_error("harness: non-increasing steps in " +
                               path.string());
    rows.push_back(r);
  }
  return rows;
}

EvalResult evaluate_policy(const SquashedGaussianPolicy& policy, EnvKind kind,
                           const ActionCostConfig& cost, int episodes,
                           Rng& rng, int tail) {
  if (episodes < 1)
    throw std::invalid_argument("harness: episodes must be positive");
  if (tail < 1) throw std::invalid_argument("harness: tail must be positive");
  const int angle_index = kind == EnvKind::pendulum ? 0 : 2;
  double return_sum = 0.0;
  double angle_sum = 0.0;
  long long angle_count = 0;
  for (int e = 0; e < episodes; ++e) {
    EnvState state = reset_env(kind, rng);
    std::vector<double> angles;
    double episode_return = 0.0;
    while (true) {
      const Eigen::VectorXd obs = observe(kind, state);
      const Eigen::VectorXd action = sample_action(policy, obs, rng, true).first;
      const StepResult sr = step_env(kind, state, action, cost);
      episode_return += sr.reward;
      angles.push_back(std::abs(wrap_angle(sr.next_state.x(angle_index))));
      state = sr.next_state;
      if (sr.done) break;
    }
    return_sum += episode_return;
    const std::size_t take =
        std::min(angles.size(), static_cast<std::size_t>(tail));
    for (std::size_t i = angles.size() - take; i < angles.size(); ++i)
      angle_sum += angles[i];
    angle_count += static_cast<long long>(take);
  }
  EvalResult result;
  result.mean_return = return_sum / episodes;
  result.tail_angle = angle_sum / static_cast<double>(angle_count);
  return result;
}

TrainOutcome run_training(const RunConfig& config) {
  const EnvKind env = env_from_name(config_string(config, "env"));
  const AgentConfig acfg = agent_config_from(config);
  const long long total_steps = acfg.total_steps;
  const long long eval_every = config_int(config, "eval_every");
  const long long eval_episodes = config_int(config, "eval_episodes");
  const auto seed = static_cast<std::uint64_t>(config_int(config, "seed"));
  if (eval_every < 1)
    throw std::invalid_argument("harness: eval_every must be positive");
  if (eval_episodes < 1)
    throw std::invalid_argument("harness: eval_episodes must be positive");

  Agent agent(env, acfg, seed);

  const std::filesystem::path out_dir = config_string(config, "out");
  std::filesystem::create_directories(out_dir);
  const std::string stem =
      std::string(algo_name(acfg.algo)) + "_seed" + std::to_string(seed);
  write_config_snapshot(config, out_dir / (stem + ".config"));

  const ActionCostConfig cost{acfg.action_cost};
  TrainOutcome outcome;
  for (long long t = 0; t < total_steps; ++t) {
    const TrainStats stats = agent.train_step();
    if ((t + 1) % eval_every != 0) continue;
    // Re-seeding per evaluation gives every eval the same start states.
    Rng eval_rng = make_rng(seed, kEvalEnvStream);
    const EvalResult ev = evaluate_policy(agent.eval_policy(), env, cost,
                                          static_cast<int>(eval_episodes),
                                          eval_rng);
    LogRow row;
    row.step = t + 1;
    row.episodic_return = ev.mean_return;
    row.alpha1 = stats.alpha1;
    row.alpha2 = stats.alpha2;
    row.mean_intrinsic = stats.mean_intrinsic;
    row.policy_entropy_estimate = stats.entropy_estimate;
    row.critic_loss = stats.critic_loss;
    outcome.rows.push_back(row);
    outcome.final_tail_angle = ev.tail_angle;
  }
  outcome.csv_path = out_dir / (stem + ".csv");
  write_log_csv(outcome.csv_path, outcome.rows);
  return outcome;
}

std::filesystem::path run_experiment(const RunConfig& config) {
  return run_training(config).csv_path;
}

BanditOutcome run_bandit_experiment(const RunConfig& config) {
  const double alpha = config_double(config, "alpha");
  const long long horizon = config_int(config, "horizon");
  const long long seeds = config_int(config, "seeds");
  const double noise = config_double(config, "noise");
  const long long grid_points = config_int(config, "grid_points");
  if (seeds < 1)
    throw std::invalid_argument("harness: bandit seeds must be >= 1");

  const std::filesystem::path out_dir = config_string(config, "out");
  std::filesystem::create_directories(out_dir);
  write_config_snapshot(config, out_dir / "bandit.config");

  const Kernel kernel{};
  const Eigen::VectorXd grid = uniform_grid(static_cast<int>(grid_points));
  const Eigen::VectorXd objective = standard_objective(kernel, grid);

  BanditOutcome outcome;
  outcome.csv_paths.resize(static_cast<std::size_t>(seeds));
  outcome.traces.resize(static_cast<std::size_t>(seeds));
  std::vector<std::function<void()>> jobs;
  for (long long s = 0; s < seeds; ++s) {
    jobs.emplace_back([&, s] {
      const RegretTrace trace =
          run_bandit(objective, horizon, alpha, noise * noise, kernel,
                     static_cast<std::uint64_t>(s));
      std::string text = "t,instant_regret,cumulative_regret,chose_explore\n";
      for (long long t = 0; t < horizon; ++t)
        text += std::to_string(t + 1) + "," + format_double(trace.instant(t)) +
                "," + format_double(trace.cumulative(t)) + "," +
                (trace.explored[static_cast<std::size_t>(t)] ? "1" : "0") +
                "\n";
      const std::filesystem::path path =
          out_dir / ("bandit_seed" + std::to_string(s) + ".csv");
      write_text_file(path, text, "bandit csv");
      outcome.csv_paths[static_cast<std::size_t>(s)] = path;
      outcome.traces[static_cast<std::size_t>(s)] = trace;
    });
  }
  run_jobs(jobs, max_jobs());
  return outcome;
}

namespace {

Eigen::MatrixXd linear_solve_q(const FiniteMdp& mdp, const TabularPolicy& pi,
                               double alpha1, double alpha2,
                               const BonusTable& bonus) {
  const int states = mdp.num_states;
  const int actions = mdp.num_actions;
  Eigen::MatrixXd p_pi(states, states);
  Eigen::VectorXd r_pi(states), extra(states);
  for (int s = 0; s < states; ++s) {
    p_pi.row(s) = pi.row(s) * mdp.P[static_cast<std::size_t>(s)];
    r_pi(s) = pi.row(s).dot(mdp.r.row(s));
    double e = 0.0;
    for (int a = 0; a < actions; ++a) {
      const double p = pi(s, a);
      if (p == 0.0) continue;
      e += p * (-alpha1 * std::log(p) + alpha2 * bonus(s, a));
    }
    extra(s) = e;
  }
  const Eigen::MatrixXd m =
      Eigen::MatrixXd::Identity(states, states) - mdp.gamma * p_pi;
  const Eigen::VectorXd v = m.fullPivLu().solve(r_pi + extra);
  Eigen::MatrixXd q(states, actions);
  for (int s = 0; s < states; ++s)
    q.row(s) =
        mdp.r.row(s) +
        mdp.gamma * (mdp.P[static_cast<std::size_t>(s)] * v).transpose();
  return q;
}

}  // namespace

TabularAudit run_tabular_audit(const RunConfig& config) {
  const long long mdps = config_int(config, "mdps");
  const auto seed = static_cast<std::uint64_t>(config_int(config, "seed"));
  const double gamma = config_double(config, "gamma");
  if (mdps < 1)
    throw std::invalid_argument("harness: tabular mdps must be >= 1");

  const std::filesystem::path out_dir = config_string(config, "out");
  std::filesystem::create_directories(out_dir);
  write_config_snapshot(config, out_dir / "tabular.config");

  constexpr double kIterTol = 1e-10;
  constexpr std::pair<double, double> kTemperatures[] = {
      {0.1, 0.0}, {0.1, 0.5}, {1.0, 0.0}, {1.0, 0.5}};

  Rng rng = make_rng(seed, 0);
  TabularAudit audit;
  audit.csv = "mdp,alpha1,alpha2,iterations,monotone_violation,oracle_gap\n";
  for (long long i = 0; i < mdps; ++i) {
    const int states = uniform_int(rng, 2, 5);
    const int actions = uniform_int(rng, 2, 4);
    const FiniteMdp mdp = random_mdp(states, actions, gamma, rng);
    const BonusTable bonus = random_bonus(states, actions, 1.0, rng);
    for (const auto& [a1, a2] : kTemperatures) {
      const PolicyIterationResult res =
          soft_policy_iteration(mdp, a1, a2, bonus, kIterTol);
      double monotone = 0.0;
      for (std::size_t k = 0; k + 1 < res.trace.size(); ++k)
        monotone =
            std::max(monotone, (res.trace[k] - res.trace[k + 1]).maxCoeff());
      double oracle = 0.0;
      TabularPolicy pi =
          TabularPolicy::Constant(states, actions, 1.0 / actions);
      for (const Eigen::MatrixXd& q : res.trace) {
        oracle = std::max(oracle, (linear_solve_q(mdp, pi, a1, a2, bonus) - q)
                                      .cwiseAbs()
                                      .maxCoeff());
        pi = soft_policy_improve(mdp, q, a1, a2, bonus);
      }
      ++audit.runs;
      if (monotone <= kMonotoneTol && oracle <= kOracleTol) ++audit.passes;
      audit.worst_monotone = std::max(audit.worst_monotone, monotone);
      audit.worst_oracle = std::max(audit.worst_oracle, oracle);
      audit.csv += std::to_string(i) + "," + format_double(a1) + "," +
                   format_double(a2) + "," + std::to_string(res.iterations) +
                   "," + format_double(monotone) + "," + format_double(oracle) +
                   "\n";
    }
  }
  audit.csv_path = out_dir / "tabular.csv";
  write_text_file(audit.csv_path, audit.csv, "tabular csv");
  return audit;
}

Aggregate aggregate_seeds(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty())
    throw std::invalid_argument("harness: no csv files to aggregate");
  std::vector<std::vector<LogRow>> runs;
  runs.reserve(paths.size());
  for (const auto& path : paths) runs.push_back(read_log_csv(path));
  const std::size_t rows = runs.front().size();
  for (std::size_t f = 1; f < runs.size(); ++f) {
    bool aligned = runs[f].size() == rows;
    for (std::size_t i = 0; aligned && i < rows; ++i)
      aligned = runs[f][i].step == runs.front()[i].step;
    if (!aligned)
      throw std::invalid_argument("harness: step grids differ between " +
                                  paths.front().string() + " and " +
                                  paths[f].string());
  }

  const std::size_t n = runs.size();
  Aggregate agg;
  agg.steps.resize(rows);
  agg.mean.resize(static_cast<Eigen::Index>(rows));
  agg.median.resize(static_cast<Eigen::Index>(rows));
  agg.std_error.resize(static_cast<Eigen::Index>(rows));
  std::vector<double> values(n);
  for (std::size_t i = 0; i < rows; ++i) {
    agg.steps[i] = runs.front()[i].step;
    for (std::size_t f = 0; f < n; ++f)
      values[f] = runs[f][i].episodic_return;
    // Sorting first makes the output invariant to the file order.
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(n);
    const double median = n % 2 == 1
                              ? values[n / 2]
                              : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    const double std_error =
        n == 1 ? 0.0
               : std::sqrt(sq / static_cast<double>(n - 1)) /
                     std::sqrt(static_cast<double>(n));
    const auto k = static_cast<Eigen::Index>(i);
    agg.mean(k) = mean;
    agg.median(k) = median;
    agg.std_error(k) = std_error;
  }
  return agg;
}

void write_aggregate_csv(const Aggregate& agg,
                         const std::filesystem::path& path) {
  std::string text = "step,mean,median,stderr\n";
  for (std::size_t i = 0; i < agg.steps.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    text += std::to_string(agg.steps[i]) + "," + format_double(agg.mean(k)) +
            "," + format_double(agg.median(k)) + "," +
            format_double(agg.std_error(k)) + "\n";
  }
  write_text_file(path, text, "aggregate csv");
}

std::filesystem::path aggregate_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> inputs;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
        entry.path().filename() != "aggregate.csv")
      inputs.push_back(entry.path());
  if (inputs.empty())
    throw std::invalid_argument("harness: no csv files in " + dir.string());
  std::sort(inputs.begin(), inputs.end());
  const Aggregate agg = aggregate_seeds(inputs);
  const std::filesystem::path out = dir / "aggregate.csv";
  write_aggregate_csv(agg, out);
  return out;
}

int max_jobs() {
  if (const char* env = std::getenv("MAXINFO_THREADS")) {
    int v = 0;
    const auto res = std::from_chars(env, env + std::strlen(env), v);
    if (res.ec == std::errc{} && *res.ptr == '\0' && v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void run_jobs(const std::vector<std::function<void()>>& jobs,
              int max_threads) {
  if (jobs.empty()) return;
  const int workers =
      std::clamp(max_threads, 1, static_cast<int>(jobs.size()));
  if (workers == 1) {
    for (const auto& job : jobs) job();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first;
  const auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        jobs[i]();
      } catch (...) {
        const std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace maxinfo
