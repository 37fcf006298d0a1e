#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "maxinfo/harness.hpp"

using namespace maxinfo;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "maxinfo_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(bool(out));
  out << text;
}

LogRow make_row(long long step, double ret) {
  LogRow r;
  r.step = step;
  r.episodic_return = ret;
  return r;
}

RunConfig tiny_train(const std::string& out) {
  RunConfig cfg = train_defaults();
  cfg["total_steps"] = "60";
  cfg["eval_every"] = "20";
  cfg["eval_episodes"] = "2";
  cfg["warmup_steps"] = "10";
  cfg["batch_size"] = "8";
  cfg["hidden"] = "8,8";
  cfg["ensemble_size"] = "2";
  cfg["buffer_capacity"] = "500";
  cfg["seed"] = "5";
  cfg["out"] = out;
  return cfg;
}

}  // namespace

TEST_CASE("defaults cover every consumer") {
  const RunConfig train = train_defaults();
  const AgentConfig acfg = agent_config_from(train);
  CHECK(acfg.algo == Algo::maxinfosac);
  CHECK(acfg.gamma == 0.99);
  CHECK(acfg.hidden == std::vector<int>{256, 256});
  CHECK(acfg.eps.block == 32);
  CHECK(config_int(train, "eval_every") == 1000);
  CHECK(config_int(train, "eval_episodes") == 5);

  const RunConfig bandit = bandit_defaults();
  CHECK(config_double(bandit, "alpha") == 0.4);
  CHECK(config_int(bandit, "horizon") == 2000);
  CHECK(config_int(bandit, "seeds") == 10);
  CHECK(config_double(bandit, "noise") == 0.05);

  const RunConfig tabular = tabular_defaults();
  CHECK(config_int(tabular, "mdps") == 100);
  CHECK(config_double(tabular, "gamma") == 0.9);
}

TEST_CASE("parse_config precedence and rejection") {
  const RunConfig defaults = train_defaults();
  CHECK(parse_config(defaults, {}) == defaults);

  const fs::path dir = fresh_dir("parse");
  write_bytes(dir / "run.cfg",
              "# experiment\n"
              "seed = 3\n"
              "  gamma=0.5   # inline note\n"
              "\n"
              "hidden = 32, 16\n");

  const RunConfig from_file = parse_config(defaults, {}, dir / "run.cfg");
  CHECK(config_int(from_file, "seed") == 3);
  CHECK(config_double(from_file, "gamma") == 0.5);
  CHECK(parse_hidden(config_string(from_file, "hidden")) ==
        std::vector<int>{32, 16});

  const RunConfig flagged =
      parse_config(defaults, {{"seed", "7"}}, dir / "run.cfg");
  CHECK(config_int(flagged, "seed") == 7);
  CHECK(config_double(flagged, "gamma") == 0.5);

  CHECK_THROWS_WITH_AS(parse_config(defaults, {{"garbage", "1"}}),
                       "harness: unknown config key: garbage",
                       std::invalid_argument);
  write_bytes(dir / "bad_key.cfg", "garbage = 1\n");
  CHECK_THROWS_AS(parse_config(defaults, {}, dir / "bad_key.cfg"),
                  std::invalid_argument);
  write_bytes(dir / "bad_line.cfg", "no equals sign here\n");
  CHECK_THROWS_AS(read_config_file(dir / "bad_line.cfg"),
                  std::invalid_argument);
  CHECK_THROWS_AS(read_config_file(dir / "missing.cfg"), std::runtime_error);
}

TEST_CASE("config value conversions name the key") {
  RunConfig cfg = train_defaults();
  cfg["gamma"] = "abc";
  CHECK_THROWS_WITH_AS(config_double(cfg, "gamma"),
                       "harness: bad number for gamma: \"abc\"",
                       std::invalid_argument);
  cfg["batch_size"] = "1.5";
  CHECK_THROWS_AS(config_int(cfg, "batch_size"), std::invalid_argument);
  CHECK_THROWS_AS(config_string(cfg, "no_such_key"), std::invalid_argument);

  CHECK(parse_hidden("") == std::vector<int>{});
  CHECK(parse_hidden(" 128 , 64 ") == std::vector<int>{128, 64});
  CHECK_THROWS_AS(parse_hidden("a"), std::invalid_argument);
  CHECK_THROWS_AS(parse_hidden("0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_hidden("256,,8"), std::invalid_argument);
}

TEST_CASE("snapshot emission round-trips") {
  const fs::path dir = fresh_dir("snapshot");
  RunConfig cfg = train_defaults();
  cfg["gamma"] = "0.99";
  cfg["seed"] = "11";
  write_config_snapshot(cfg, dir / "run.config");

  const std::string text = read_bytes(dir / "run.config");
  CHECK(text.find("gamma = 0.99\n") != std::string::npos);
  CHECK(parse_config(train_defaults(), {}, dir / "run.config") == cfg);
}

TEST_CASE("log csv format and round trip") {
  const fs::path dir = fresh_dir("csv");
  LogRow r;
  r.step = 1000;
  r.episodic_return = 0.5;
  r.alpha1 = 1.0;
  r.alpha2 = 0.25;
  r.mean_intrinsic = 0.1;
  r.policy_entropy_estimate = -3.0;
  r.critic_loss = 2.0;
  write_log_csv(dir / "run.csv", {r});

  const std::string expected =
      std::string(kLogHeader) + "\n1000,0.5,1,0.25,0.1,-3,2\n";
  CHECK(read_bytes(dir / "run.csv") == expected);

  const std::vector<LogRow> back = read_log_csv(dir / "run.csv");
  REQUIRE(back.size() == 1);
  CHECK(back[0].step == 1000);
  CHECK(back[0].episodic_return == 0.5);
  CHECK(back[0].mean_intrinsic == 0.1);
  CHECK(back[0].critic_loss == 2.0);

  CHECK_THROWS_AS(write_log_csv(dir / "bad.csv",
                                {make_row(10, 0.0), make_row(10, 1.0)}),
                  std::invalid_argument);
  write_bytes(dir / "head.csv", "step,oops\n");
  CHECK_THROWS_AS(read_log_csv(dir / "head.csv"), std::runtime_error);
  write_bytes(dir / "short.csv", std::string(kLogHeader) + "\n1,2,3\n");
  CHECK_THROWS_AS(read_log_csv(dir / "short.csv"), std::runtime_error);
  write_bytes(dir / "order.csv", std::string(kLogHeader) +
                                     "\n20,0,0,0,0,0,0\n10,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(read_log_csv(dir / "order.csv"), std::runtime_error);
  write_bytes(dir / "field.csv",
              std::string(kLogHeader) + "\n10,x,0,0,0,0,0\n");
  CHECK_THROWS_AS(read_log_csv(dir / "field.csv"), std::invalid_argument);
}

TEST_CASE("format_double keeps exact values") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-3.0) == "-3");
  const double pi = 3.141592653589793;
  double parsed = 0.0;
  const std::string text = format_double(pi);
  parsed = std::stod(text);
  CHECK(parsed == pi);
}

TEST_CASE("aggregate statistics match the closed forms") {
  const fs::path dir = fresh_dir("aggregate");
  const std::vector<double> at10 = {1.0, 2.0, 3.0};
  const std::vector<double> at20 = {6.0, 4.0, 5.0};
  std::vector<fs::path> paths;
  for (int f = 0; f < 3; ++f) {
    const fs::path p = dir / ("seed" + std::to_string(f) + ".csv");
    write_log_csv(p, {make_row(10, at10[f]), make_row(20, at20[f])});
    paths.push_back(p);
  }

  const Aggregate agg = aggregate_seeds(paths);
  REQUIRE(agg.steps == std::vector<long long>{10, 20});
  CHECK(agg.mean(0) == 2.0);
  CHECK(agg.median(0) == 2.0);
  CHECK(agg.std_error(0) == doctest::Approx(0.57735).epsilon(1e-5));
  CHECK(agg.std_error(0) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(agg.mean(1) == 5.0);
  CHECK(agg.median(1) == 5.0);

  const Aggregate single = aggregate_seeds({paths[1]});
  CHECK(single.mean(0) == 2.0);
  CHECK(single.median(0) == 2.0);
  CHECK(single.std_error(0) == 0.0);

  write_aggregate_csv(agg, dir / "a.csv");
  write_aggregate_csv(aggregate_seeds({paths[2], paths[0], paths[1]}),
                      dir / "b.csv");
  CHECK(read_bytes(dir / "a.csv") == read_bytes(dir / "b.csv"));

  const fs::path even = dir / "seed3.csv";
  write_log_csv(even, {make_row(10, 7.0), make_row(20, 6.0)});
  paths.push_back(even);
  const Aggregate four = aggregate_seeds(paths);
  CHECK(four.median(0) == 2.5);

  const fs::path misaligned = dir / "bad_grid.csv";
  write_log_csv(misaligned, {make_row(10, 1.0), make_row(30, 1.0)});
  CHECK_THROWS_AS(aggregate_seeds({paths[0], misaligned}),
                  std::invalid_argument);
  const fs::path shorter = dir / "bad_len.csv";
  write_log_csv(shorter, {make_row(10, 1.0)});
  CHECK_THROWS_AS(aggregate_seeds({paths[0], shorter}),
                  std::invalid_argument);
  CHECK_THROWS_AS(aggregate_seeds({}), std::invalid_argument);
}

TEST_CASE("aggregate_directory scans csv files only") {
  const fs::path dir = fresh_dir("agg_dir");
  write_log_csv(dir / "s0.csv", {make_row(5, 1.0)});
  write_log_csv(dir / "s1.csv", {make_row(5, 3.0)});
  write_bytes(dir / "notes.txt", "ignored\n");
  write_bytes(dir / "aggregate.csv", "stale\n");

  const fs::path out = aggregate_directory(dir);
  CHECK(out == dir / "aggregate.csv");
  const std::string text = read_bytes(out);
  CHECK(text == "step,mean,median,stderr\n5,2,2,1\n");

  const fs::path empty = fresh_dir("agg_empty");
  CHECK_THROWS_AS(aggregate_directory(empty), std::invalid_argument);
}

TEST_CASE("evaluate_policy is deterministic and bounded") {
  Rng init = make_rng(0, 1);
  const EnvSpec spec = env_spec(EnvKind::pendulum);
  const SquashedGaussianPolicy policy =
      make_policy(spec.obs_dim, spec.action_dim, {8}, spec.action_low,
                  spec.action_high, init);

  Rng eval_a = make_rng(7, 13);
  Rng eval_b = make_rng(7, 13);
  const EvalResult a =
      evaluate_policy(policy, EnvKind::pendulum, {0.0}, 3, eval_a);
  const EvalResult b =
      evaluate_policy(policy, EnvKind::pendulum, {0.0}, 3, eval_b);
  CHECK(a.mean_return == b.mean_return);
  CHECK(a.tail_angle == b.tail_angle);
  CHECK(a.tail_angle >= 0.0);
  CHECK(a.tail_angle <= 3.141592653589794);
  CHECK(a.mean_return < 0.0);

  Rng eval_c = make_rng(7, 13);
  CHECK_NOTHROW(
      evaluate_policy(policy, EnvKind::pendulum, {0.0}, 1, eval_c, 100000));
  Rng eval_d = make_rng(7, 13);
  CHECK_THROWS_AS(evaluate_policy(policy, EnvKind::pendulum, {0.0}, 0, eval_d),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      evaluate_policy(policy, EnvKind::pendulum, {0.0}, 1, eval_d, 0),
      std::invalid_argument);
}

TEST_CASE("run_training writes schedule-shaped logs") {
  const fs::path dir = fresh_dir("train");
  const RunConfig cfg = tiny_train((dir / "out").string());
  const TrainOutcome outcome = run_training(cfg);

  REQUIRE(outcome.rows.size() == 3);
  CHECK(outcome.rows[0].step == 20);
  CHECK(outcome.rows[1].step == 40);
  CHECK(outcome.rows[2].step == 60);
  CHECK(outcome.csv_path == dir / "out" / "maxinfosac_seed5.csv");
  CHECK(fs::exists(dir / "out" / "maxinfosac_seed5.config"));
  CHECK(outcome.final_tail_angle >= 0.0);
  CHECK(std::isfinite(outcome.rows[2].episodic_return));

  const std::vector<LogRow> back = read_log_csv(outcome.csv_path);
  REQUIRE(back.size() == 3);
  CHECK(back[2].episodic_return == outcome.rows[2].episodic_return);
  CHECK(back[2].critic_loss == outcome.rows[2].critic_loss);

  CHECK(parse_config(train_defaults(), {},
                     dir / "out" / "maxinfosac_seed5.config") == cfg);
}

TEST_CASE("run_training repeats byte-identically") {
  const fs::path dir = fresh_dir("repeat");
  RunConfig a = tiny_train((dir / "a").string());
  RunConfig b = tiny_train((dir / "b").string());
  const TrainOutcome ra = run_training(a);
  const TrainOutcome rb = run_training(b);
  CHECK(read_bytes(ra.csv_path) == read_bytes(rb.csv_path));

  RunConfig other = tiny_train((dir / "c").string());
  other["seed"] = "6";
  const TrainOutcome rc = run_training(other);
  CHECK(read_bytes(ra.csv_path) != read_bytes(rc.csv_path));
}

TEST_CASE("run_training degenerate and invalid configs") {
  const fs::path dir = fresh_dir("degenerate");
  RunConfig cfg = tiny_train((dir / "zero").string());
  cfg["total_steps"] = "0";
  const fs::path csv = run_experiment(cfg);
  CHECK(read_bytes(csv) == std::string(kLogHeader) + "\n");

  RunConfig partial = tiny_train((dir / "partial").string());
  partial["total_steps"] = "55";
  partial["eval_every"] = "10";
  partial["eval_episodes"] = "1";
  partial["warmup_steps"] = "100";
  const TrainOutcome po = run_training(partial);
  REQUIRE(po.rows.size() == 5);
  CHECK(po.rows.back().step == 50);

  RunConfig bad_every = tiny_train((dir / "bad1").string());
  bad_every["eval_every"] = "0";
  CHECK_THROWS_AS(run_training(bad_every), std::invalid_argument);
  RunConfig bad_eps = tiny_train((dir / "bad2").string());
  bad_eps["eval_episodes"] = "0";
  CHECK_THROWS_AS(run_training(bad_eps), std::invalid_argument);
  RunConfig bad_env = tiny_train((dir / "bad3").string());
  bad_env["env"] = "lunar";
  CHECK_THROWS_AS(run_training(bad_env), std::invalid_argument);
  RunConfig bad_algo = tiny_train((dir / "bad4").string());
  bad_algo["algo"] = "frobnicate";
  CHECK_THROWS_AS(run_training(bad_algo), std::invalid_argument);

  RunConfig bad_combo = tiny_train((dir / "bad5").string());
  bad_combo["intrinsic"] = "curiosity";
  CHECK_THROWS_AS(run_training(bad_combo), std::invalid_argument);
  CHECK_FALSE(fs::exists(dir / "bad5"));
}

TEST_CASE("run_training drives every algo through the config surface") {
  const fs::path dir = fresh_dir("algos");
  for (const std::string algo :
       {"sac", "sac_intrinsic", "explore_exploit", "eps_maxinfo"}) {
    RunConfig cfg = tiny_train((dir / algo).string());
    cfg["algo"] = algo;
    cfg["total_steps"] = "40";
    cfg["eval_every"] = "40";
    cfg["eval_episodes"] = "1";
    if (algo == "sac_intrinsic") cfg["intrinsic"] = "curiosity";
    const TrainOutcome outcome = run_training(cfg);
    REQUIRE(outcome.rows.size() == 1);
    CHECK(outcome.rows[0].step == 40);
  }
}

TEST_CASE("run_bandit_experiment writes one csv per seed") {
  const fs::path dir = fresh_dir("bandit1");
  RunConfig cfg = bandit_defaults();
  cfg["seeds"] = "2";
  cfg["horizon"] = "50";
  cfg["grid_points"] = "64";
  cfg["out"] = dir.string();
  const BanditOutcome outcome = run_bandit_experiment(cfg);

  REQUIRE(outcome.csv_paths.size() == 2);
  REQUIRE(outcome.traces.size() == 2);
  CHECK(outcome.csv_paths[0] == dir / "bandit_seed0.csv");
  CHECK(fs::exists(dir / "bandit.config"));
  for (const RegretTrace& trace : outcome.traces) {
    CHECK(trace.cumulative.size() == 50);
    CHECK(trace.cumulative(49) >= 0.0);
  }
  const std::string body = read_bytes(outcome.csv_paths[1]);
  CHECK(body.rfind("t,instant_regret,cumulative_regret,chose_explore\n", 0) ==
        0);
  CHECK(std::count(body.begin(), body.end(), '\n') == 51);

  const fs::path dir2 = fresh_dir("bandit2");
  cfg["out"] = dir2.string();
  const BanditOutcome again = run_bandit_experiment(cfg);
  for (std::size_t s = 0; s < 2; ++s)
    CHECK(read_bytes(outcome.csv_paths[s]) == read_bytes(again.csv_paths[s]));

  cfg["seeds"] = "0";
  CHECK_THROWS_AS(run_bandit_experiment(cfg), std::invalid_argument);
}

TEST_CASE("run_tabular_audit passes its own tolerances") {
  const fs::path dir = fresh_dir("tabular1");
  RunConfig cfg = tabular_defaults();
  cfg["mdps"] = "5";
  cfg["out"] = dir.string();
  const TabularAudit audit = run_tabular_audit(cfg);

  CHECK(audit.runs == 20);
  CHECK(audit.passes == 20);
  CHECK(audit.worst_monotone <= kMonotoneTol);
  CHECK(audit.worst_oracle <= kOracleTol);
  CHECK(audit.csv_path == dir / "tabular.csv");
  CHECK(read_bytes(audit.csv_path) == audit.csv);
  CHECK(audit.csv.rfind(
            "mdp,alpha1,alpha2,iterations,monotone_violation,oracle_gap\n",
            0) == 0);
  CHECK(std::count(audit.csv.begin(), audit.csv.end(), '\n') == 21);

  const fs::path dir2 = fresh_dir("tabular2");
  cfg["out"] = dir2.string();
  CHECK(run_tabular_audit(cfg).csv == audit.csv);

  cfg["mdps"] = "0";
  CHECK_THROWS_AS(run_tabular_audit(cfg), std::invalid_argument);
}

TEST_CASE("job pool runs everything and propagates failures") {
  std::atomic<int> counter{0};
  std::vector<std::function<void()>> jobs;
  for (int i = 0; i < 8; ++i)
    jobs.emplace_back([&counter] { counter.fetch_add(1); });
  run_jobs(jobs, 3);
  CHECK(counter.load() == 8);

  std::vector<int> order;
  std::vector<std::function<void()>> ordered;
  for (int i = 0; i < 4; ++i)
    ordered.emplace_back([&order, i] { order.push_back(i); });
  run_jobs(ordered, 1);
  CHECK(order == std::vector<int>{0, 1, 2, 3});

  std::atomic<int> survivors{0};
  std::vector<std::function<void()>> mixed;
  mixed.emplace_back([&survivors] { survivors.fetch_add(1); });
  mixed.emplace_back([] { throw std::runtime_error("boom"); });
  mixed.emplace_back([&survivors] { survivors.fetch_add(1); });
  CHECK_THROWS_AS(run_jobs(mixed, 2), std::runtime_error);
  CHECK(survivors.load() == 2);

  run_jobs({}, 4);
}

TEST_CASE("max_jobs honors the environment cap") {
  setenv("MAXINFO_THREADS", "3", 1);
  CHECK(max_jobs() == 3);
  setenv("MAXINFO_THREADS", "not_a_number", 1);
  CHECK(max_jobs() >= 1);
  unsetenv("MAXINFO_THREADS");
  CHECK(max_jobs() >= 1);
}
