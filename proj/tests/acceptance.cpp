// Acceptance gate. Runs ten end-to-end checks and prints one line per
// criterion; the exit status is the number of failures.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "maxinfo/agents.hpp"
#include "maxinfo/harness.hpp"

using namespace maxinfo;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  ["
            << detail << "]" << std::endl;
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", value);
  return buf;
}

fs::path out_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "maxinfo_acceptance" / name;
  fs::remove_all(dir);
  return dir;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// 1. Soft policy iteration on random finite MDPs: monotone Q-improvement
//    and agreement with the linear-solve evaluation oracle.
void criterion1() {
  const auto start = Clock::now();
  RunConfig cfg = tabular_defaults();
  cfg["out"] = out_dir("tabular").string();
  const TabularAudit audit = run_tabular_audit(cfg);
  const double secs = seconds_since(start);
  const bool pass = audit.passes == audit.runs && secs < 60.0;
  report(1, pass,
         std::to_string(audit.passes) + "/" + std::to_string(audit.runs) +
             " runs pass, worst monotone violation " +
             fmt(audit.worst_monotone) + ", worst oracle gap " +
             fmt(audit.worst_oracle) + ", " + fmt(secs) + "s");
}

// 2. The soft Bellman operator is a gamma-contraction in sup norm for any
//    fixed policy; the entropy and bonus terms cancel in the difference.
void criterion2() {
  Rng rng = make_rng(2026, 2);
  double worst_margin = -1.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int states = uniform_int(rng, 2, 5);
    const int actions = uniform_int(rng, 2, 4);
    const FiniteMdp mdp = random_mdp(states, actions, 0.9, rng);
    const BonusTable bonus = random_bonus(states, actions, 1.0, rng);
    TabularPolicy pi(states, actions);
    for (int s = 0; s < states; ++s) {
      for (int a = 0; a < actions; ++a)
        pi(s, a) = -std::log(uniform(rng, 1e-12, 1.0));
      pi.row(s) /= pi.row(s).sum();
    }
    Eigen::MatrixXd q1(states, actions), q2(states, actions);
    for (int s = 0; s < states; ++s) {
      for (int a = 0; a < actions; ++a) {
        q1(s, a) = uniform(rng, -5.0, 5.0);
        q2(s, a) = uniform(rng, -5.0, 5.0);
      }
    }
    const double a1 = trial % 2 == 0 ? 0.1 : 1.0;
    const double a2 = trial % 4 < 2 ? 0.0 : 0.5;
    const Eigen::MatrixXd t1 = soft_bellman_apply(mdp, pi, q1, a1, a2, bonus);
    const Eigen::MatrixXd t2 = soft_bellman_apply(mdp, pi, q2, a1, a2, bonus);
    const double lhs = (t1 - t2).cwiseAbs().maxCoeff();
    const double rhs = mdp.gamma * (q1 - q2).cwiseAbs().maxCoeff() + 1e-12;
    worst_margin = std::max(worst_margin, lhs - rhs);
  }
  report(2, worst_margin <= 0.0,
         "1000 operator pairs, worst contraction margin " + fmt(worst_margin));
}

// 3. Bandit average regret must halve between T=200 and T=2000 (median over
//    10 seeds), and at low noise the late exploit selections must sit on the
//    grid maximizer at least 90% of the time, pooled across the runs.
void criterion3() {
  const auto start = Clock::now();
  RunConfig cfg = bandit_defaults();
  cfg["out"] = out_dir("bandit_long").string();
  const BanditOutcome long_runs = run_bandit_experiment(cfg);
  cfg["horizon"] = "200";
  cfg["out"] = out_dir("bandit_short").string();
  const BanditOutcome short_runs = run_bandit_experiment(cfg);

  auto final_average = [](const BanditOutcome& outcome) {
    std::vector<double> finals;
    for (const RegretTrace& trace : outcome.traces) {
      const Eigen::Index last = trace.cumulative.size() - 1;
      finals.push_back(trace.cumulative(last) / static_cast<double>(last + 1));
    }
    return median(finals);
  };
  const double med_long = final_average(long_runs);
  const double med_short = final_average(short_runs);
  const bool decay_ok = med_long <= 0.5 * med_short;

  cfg = bandit_defaults();
  cfg["noise"] = "0.01";
  cfg["out"] = out_dir("bandit_hit").string();
  const BanditOutcome low_noise = run_bandit_experiment(cfg);
  long long hits = 0, pool = 0;
  for (const RegretTrace& trace : low_noise.traces) {
    std::vector<Eigen::Index> exploit;
    for (Eigen::Index t = 0; t < trace.instant.size(); ++t)
      if (!trace.explored[static_cast<std::size_t>(t)]) exploit.push_back(t);
    const std::size_t take = std::min<std::size_t>(50, exploit.size());
    for (std::size_t k = exploit.size() - take; k < exploit.size(); ++k) {
      ++pool;
      if (trace.instant(exploit[k]) == 0.0) ++hits;
    }
  }
  const double hit_rate =
      pool == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(pool);

  const double secs = seconds_since(start);
  const bool pass = decay_ok && hit_rate >= 0.9 && secs < 60.0;
  report(3, pass,
         "median avg regret " + fmt(med_long) + " at T=2000 vs " +
             fmt(med_short) + " at T=200 (need <= half), maximizer hit rate " +
             fmt(hit_rate) + " (need >= 0.9), " + fmt(secs) + "s");
}

RunConfig swingup_config(const std::string& algo, int seed, double action_cost,
                         const std::string& out) {
  RunConfig cfg = train_defaults();
  cfg["algo"] = algo;
  cfg["action_cost"] = format_double(action_cost);
  cfg["hidden"] = "128,128";
  cfg["batch_size"] = "128";
  cfg["seed"] = std::to_string(seed);
  cfg["out"] = out;
  return cfg;
}

// 4 and 5. Pendulum swing-up outcomes: free swing-up reaches -250 within the
// step budget, and with an action cost the agent still swings up and beats
// the plain baseline. Nine 30K-step runs, scheduled through the job pool.
void criteria4and5() {
  const std::string free_dir = out_dir("swingup_free").string();
  const std::string cost_dir = out_dir("swingup_cost").string();
  const std::string base_dir = out_dir("swingup_cost_baseline").string();

  std::vector<RunConfig> cfgs;
  for (int seed = 0; seed < 3; ++seed)
    cfgs.push_back(swingup_config("maxinfosac", seed, 0.0, free_dir));
  for (int seed = 0; seed < 3; ++seed)
    cfgs.push_back(swingup_config("maxinfosac", seed, 0.2, cost_dir));
  for (int seed = 0; seed < 3; ++seed)
    cfgs.push_back(swingup_config("sac", seed, 0.2, base_dir));

  std::cerr << "training 9 pendulum runs (30K steps each), this is the slow "
               "part\n";
  std::vector<TrainOutcome> outcomes(cfgs.size());
  std::vector<double> secs(cfgs.size(), 0.0);
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    jobs.emplace_back([&cfgs, &outcomes, &secs, i] {
      const auto start = Clock::now();
      outcomes[i] = run_training(cfgs[i]);
      secs[i] = seconds_since(start);
    });
  }
  run_jobs(jobs, max_jobs());

  std::vector<double> best_free, secs_free;
  for (int i = 0; i < 3; ++i) {
    double best = outcomes[i].rows.front().episodic_return;
    for (const LogRow& row : outcomes[i].rows)
      best = std::max(best, row.episodic_return);
    best_free.push_back(best);
    secs_free.push_back(secs[i]);
  }
  const double med_best = median(best_free);
  const double slowest = *std::max_element(secs_free.begin(), secs_free.end());
  report(4, med_best >= -250.0 && slowest < 1800.0,
         "median best eval return " + fmt(med_best) +
             " (need >= -250), per-seed best " + fmt(best_free[0]) + "/" +
             fmt(best_free[1]) + "/" + fmt(best_free[2]) + ", slowest seed " +
             fmt(slowest / 60.0) + " min");

  std::vector<double> cost_final, cost_tail, base_final;
  for (int i = 0; i < 3; ++i) {
    cost_final.push_back(outcomes[3 + i].rows.back().episodic_return);
    cost_tail.push_back(outcomes[3 + i].final_tail_angle);
    base_final.push_back(outcomes[6 + i].rows.back().episodic_return);
  }
  const double med_tail = median(cost_tail);
  const double med_cost = median(cost_final);
  const double med_base = median(base_final);
  report(5, med_tail < 0.3 && med_cost > med_base,
         "median final tail angle " + fmt(med_tail) +
             " rad (need < 0.3), final return " + fmt(med_cost) +
             " vs baseline " + fmt(med_base) + " (need strictly greater)");
}

// 6. Reverse accumulation against central finite differences: ten plain
//    networks (parameter and input gradients) and ten squashed-Gaussian
//    log-probability gradients through the head cotangent path.
void criterion6() {
  Rng rng = make_rng(2026, 6);
  const double h = 1e-5;
  double worst = 0.0;

  for (int trial = 0; trial < 10; ++trial) {
    MlpSpec spec;
    const int in_dim = uniform_int(rng, 2, 5);
    const int out_dim = uniform_int(rng, 1, 4);
    spec.layer_widths.push_back(in_dim);
    const int depth = uniform_int(rng, 1, 2);
    for (int l = 0; l < depth; ++l)
      spec.layer_widths.push_back(uniform_int(rng, 3, 8));
    spec.layer_widths.push_back(out_dim);
    spec.activation = trial % 2 == 0 ? Activation::tanh : Activation::relu;
    spec.output_activation =
        trial % 3 == 0 ? OutputActivation::tanh : OutputActivation::none;

    const Eigen::VectorXd params = init_params(spec, rng);
    const int batch = 3;
    Eigen::MatrixXd x(batch, in_dim), cot(batch, out_dim);
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < in_dim; ++j) x(i, j) = normal(rng);
      for (int j = 0; j < out_dim; ++j) cot(i, j) = normal(rng);
    }

    const auto loss = [&](const Eigen::VectorXd& p, const Eigen::MatrixXd& in) {
      return forward(spec, p, in).cwiseProduct(cot).sum();
    };
    const Gradients grads = backward(spec, params, x, cot);

    Eigen::VectorXd fd_params(params.size());
    for (Eigen::Index j = 0; j < params.size(); ++j) {
      Eigen::VectorXd hi = params, lo = params;
      hi(j) += h;
      lo(j) -= h;
      fd_params(j) = (loss(hi, x) - loss(lo, x)) / (2.0 * h);
    }
    Eigen::MatrixXd fd_input(batch, in_dim);
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < in_dim; ++j) {
        Eigen::MatrixXd hi = x, lo = x;
        hi(i, j) += h;
        lo(i, j) -= h;
        fd_input(i, j) = (loss(params, hi) - loss(params, lo)) / (2.0 * h);
      }
    }
    const double num =
        std::max((fd_params - grads.params).cwiseAbs().maxCoeff(),
                 (fd_input - grads.input).cwiseAbs().maxCoeff());
    const double den = std::max({fd_params.cwiseAbs().maxCoeff(),
                                 fd_input.cwiseAbs().maxCoeff(), 1e-12});
    worst = std::max(worst, num / den);
  }

  for (int trial = 0; trial < 10; ++trial) {
    const int obs_dim = uniform_int(rng, 2, 4);
    const int action_dim = uniform_int(rng, 1, 2);
    const std::vector<int> hidden =
        trial % 2 == 0 ? std::vector<int>{8} : std::vector<int>{8, 8};
    const Eigen::VectorXd low = Eigen::VectorXd::Constant(action_dim, -2.0);
    const Eigen::VectorXd high = Eigen::VectorXd::Constant(action_dim, 2.0);
    SquashedGaussianPolicy policy =
        make_policy(obs_dim, action_dim, hidden, low, high, rng);

    const int batch = 3;
    Eigen::MatrixXd obs(batch, obs_dim), z(batch, action_dim);
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < obs_dim; ++j) obs(i, j) = normal(rng);
      for (int j = 0; j < action_dim; ++j) z(i, j) = normal(rng);
    }

    const PolicyBatchSample sample = evaluate_with_z(policy, obs, z);
    const Eigen::MatrixXd action_cot = Eigen::MatrixXd::Zero(batch, action_dim);
    const Eigen::VectorXd logp_cot =
        Eigen::VectorXd::Constant(batch, 1.0 / batch);
    const Eigen::MatrixXd heads_cot =
        head_cotangent(policy, sample, action_cot, logp_cot);
    const Gradients grads = backward(policy.spec, policy.params, obs, heads_cot);

    const auto loss = [&](const Eigen::VectorXd& p) {
      SquashedGaussianPolicy probe = policy;
      probe.params = p;
      return evaluate_with_z(probe, obs, z).log_prob.mean();
    };
    Eigen::VectorXd fd(policy.params.size());
    for (Eigen::Index j = 0; j < policy.params.size(); ++j) {
      Eigen::VectorXd hi = policy.params, lo = policy.params;
      hi(j) += h;
      lo(j) -= h;
      fd(j) = (loss(hi) - loss(lo)) / (2.0 * h);
    }
    const double num = (fd - grads.params).cwiseAbs().maxCoeff();
    const double den = std::max(fd.cwiseAbs().maxCoeff(), 1e-12);
    worst = std::max(worst, num / den);
  }

  report(6, worst < 1e-4,
         "20 configurations, worst relative gradient error " + fmt(worst) +
             " (need < 1e-4)");
}

// 7. Information-gain bound: non-negative everywhere, exactly zero for
//    parameter-identical ensemble members, ln 2 when a single dimension's
//    disagreement sits at the noise floor.
void criterion7() {
  Rng rng = make_rng(2026, 7);
  const double sigma = 1e-3;

  bool nonneg = true;
  for (int trial = 0; trial < 200; ++trial) {
    const int dims = uniform_int(rng, 1, 6);
    Eigen::VectorXd var(dims);
    for (int j = 0; j < dims; ++j)
      var(j) = uniform(rng, 0.0, 1.0) < 0.2
                   ? 0.0
                   : std::exp(uniform(rng, -20.0, 5.0));
    if (info_gain_upper(var, sigma) < 0.0) nonneg = false;
  }

  DynamicsEnsemble ens = make_ensemble(3, 1, 4, {16, 16}, sigma, rng);
  Eigen::MatrixXd s(5, 3), a(5, 1);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 3; ++j) s(i, j) = normal(rng);
    a(i, 0) = normal(rng);
  }
  if (info_gain_bonus(ens, s, a).value.minCoeff() < 0.0) nonneg = false;

  for (std::size_t m = 1; m < ens.params.size(); ++m)
    ens.params[m] = ens.params[0];
  const Eigen::VectorXd identical = info_gain_bonus(ens, s, a).value;
  const bool zero_ok = (identical.array() == 0.0).all() &&
                       disagreement(ens, s.row(0), a.row(0)).maxCoeff() == 0.0;

  Eigen::VectorXd floor_var = Eigen::VectorXd::Zero(3);
  floor_var(0) = sigma * sigma;
  const double ln2_gap =
      std::abs(info_gain_upper(floor_var, sigma) - std::log(2.0));

  report(7, nonneg && zero_ok && ln2_gap <= 1e-12,
         std::string("non-negative on sweep: ") + (nonneg ? "yes" : "no") +
             ", identical members give " + fmt(identical.cwiseAbs().maxCoeff()) +
             ", ln 2 gap " + fmt(ln2_gap) + " (need <= 1e-12)");
}

// 8. Temperatures stay strictly positive under adversarial batches and do
//    not move when both constraint residuals are exactly zero.
void criterion8() {
  const double lr = 3e-4;
  Temperatures temps = make_temperatures(1);
  double min_a1 = temps.alpha1(), min_a2 = temps.alpha2();
  bool positive = true;
  for (int k = 0; k < 100000 && positive; ++k) {
    double mean_logp = 0.0, mean_bonus = 0.0, target_bonus = 0.0;
    switch (k % 4) {
      case 0: target_bonus = 5.0; break;
      case 1: mean_logp = -3.0; mean_bonus = 1e6; break;
      case 2: mean_logp = -50.0; mean_bonus = 3.0; target_bonus = 3.0; break;
      default: mean_logp = 50.0; mean_bonus = 1e-9; target_bonus = 1e3; break;
    }
    update_temperatures(temps, mean_logp, mean_bonus, target_bonus, lr, true);
    const double a1 = temps.alpha1(), a2 = temps.alpha2();
    min_a1 = std::min(min_a1, a1);
    min_a2 = std::min(min_a2, a2);
    positive = std::isfinite(a1) && a1 > 0.0 && std::isfinite(a2) && a2 > 0.0;
  }

  Temperatures fresh = make_temperatures(1);
  const double log1 = fresh.log_alpha1, log2 = fresh.log_alpha2;
  double drift = 0.0;
  for (int k = 0; k < 100; ++k) {
    update_temperatures(fresh, -fresh.target_entropy, 2.5, 2.5, lr, true);
    drift = std::max({drift, std::abs(fresh.log_alpha1 - log1),
                      std::abs(fresh.log_alpha2 - log2)});
  }

  report(8, positive && drift <= 1e-12,
         "1e5 adversarial updates, min alpha1 " + fmt(min_a1) +
             ", min alpha2 " + fmt(min_a2) + ", zero-residual drift " +
             fmt(drift) + " (need <= 1e-12)");
}

// 9. Pinning the bonus temperature to zero and disabling the intrinsic
//    machinery must reproduce the plain baseline bit for bit.
void criterion9() {
  AgentConfig base;
  base.hidden = {64, 64};
  base.batch_size = 64;
  base.warmup_steps = 500;
  base.total_steps = 5000;
  base.buffer_capacity = 20000;

  AgentConfig plain = base;
  plain.algo = Algo::sac;
  AgentConfig reduced = base;
  reduced.algo = Algo::maxinfosac;
  reduced.pin_alpha2_zero = true;
  reduced.use_intrinsic = false;

  Agent a(EnvKind::pendulum, plain, 0);
  Agent b(EnvKind::pendulum, reduced, 0);

  long long bad_step = -1;
  std::string bad_field;
  for (long long t = 0; t < 5000 && bad_step < 0; ++t) {
    const TrainStats sa = a.train_step();
    const TrainStats sb = b.train_step();
    const auto mismatch = [&](const char* name) {
      bad_step = t;
      bad_field = name;
    };
    if (sa.step != sb.step) mismatch("step");
    else if (sa.action.size() != sb.action.size() ||
             !(sa.action.array() == sb.action.array()).all())
      mismatch("action");
    else if (sa.reward != sb.reward) mismatch("reward");
    else if (sa.done != sb.done) mismatch("done");
    else if (sa.episodic_return != sb.episodic_return)
      mismatch("episodic_return");
    else if (sa.critic_loss != sb.critic_loss) mismatch("critic_loss");
    else if (sa.policy_loss != sb.policy_loss) mismatch("policy_loss");
    else if (sa.alpha1 != sb.alpha1) mismatch("alpha1");
    else if (sa.alpha2 != sb.alpha2) mismatch("alpha2");
    else if (sa.mean_intrinsic != sb.mean_intrinsic) mismatch("mean_intrinsic");
    else if (sa.entropy_estimate != sb.entropy_estimate)
      mismatch("entropy_estimate");
    else if (sa.ensemble_loss != sb.ensemble_loss) mismatch("ensemble_loss");
  }

  report(9, bad_step < 0,
         bad_step < 0 ? "5000 steps bit-identical across all stat fields"
                      : "first mismatch at step " + std::to_string(bad_step) +
                            " in " + bad_field);
}

// 10. Repeating any run with the same config and seed reproduces the CSV
//     bodies byte for byte.
void criterion10() {
  RunConfig train = train_defaults();
  train["total_steps"] = "400";
  train["eval_every"] = "100";
  train["warmup_steps"] = "50";
  train["batch_size"] = "16";
  train["hidden"] = "16,16";
  train["ensemble_size"] = "2";
  train["buffer_capacity"] = "2000";
  train["seed"] = "3";
  train["out"] = out_dir("repeat_train_a").string();
  const TrainOutcome ta = run_training(train);
  train["out"] = out_dir("repeat_train_b").string();
  const TrainOutcome tb = run_training(train);
  const std::string train_a = read_bytes(ta.csv_path);
  const bool train_ok = !train_a.empty() && train_a == read_bytes(tb.csv_path);

  RunConfig bandit = bandit_defaults();
  bandit["seeds"] = "2";
  bandit["horizon"] = "150";
  bandit["out"] = out_dir("repeat_bandit_a").string();
  const BanditOutcome ba = run_bandit_experiment(bandit);
  bandit["out"] = out_dir("repeat_bandit_b").string();
  const BanditOutcome bb = run_bandit_experiment(bandit);
  bool bandit_ok = ba.csv_paths.size() == bb.csv_paths.size();
  for (std::size_t s = 0; bandit_ok && s < ba.csv_paths.size(); ++s)
    bandit_ok = read_bytes(ba.csv_paths[s]) == read_bytes(bb.csv_paths[s]);

  RunConfig tabular = tabular_defaults();
  tabular["mdps"] = "3";
  tabular["out"] = out_dir("repeat_tabular_a").string();
  const TabularAudit aud_a = run_tabular_audit(tabular);
  tabular["out"] = out_dir("repeat_tabular_b").string();
  const TabularAudit aud_b = run_tabular_audit(tabular);
  const bool tabular_ok = read_bytes(aud_a.csv_path) == read_bytes(aud_b.csv_path);

  report(10, train_ok && bandit_ok && tabular_ok,
         std::string("train ") + (train_ok ? "identical" : "differs") +
             ", bandit " + (bandit_ok ? "identical" : "differs") +
             ", tabular " + (tabular_ok ? "identical" : "differs"));
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criteria4and5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  return failures;
}
