#include "maxinfo/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maxinfo {

namespace {

// Stream ids under the root seed; every stochastic component owns one so
// disabling a component never shifts the draws of another.
enum Stream : std::uint64_t {
  kEnvStream = 0,
  kPolicyInit = 1,
  kCriticInit = 2,
  kEnsembleInit = 3,
  kBufferStream = 4,
  kActionStream = 5,
  kUpdateStream = 6,
  kTargetInfoStream = 7,
  kModeStream = 8,
  kRndInit = 9,
  kIntrinsicPolicyInit = 10,
  kIntrinsicCriticInit = 11,
  kSecondCriticInit = 12,
};

Eigen::MatrixXd sa_input(const Eigen::MatrixXd& s, const Eigen::MatrixXd& a) {
  Eigen::MatrixXd input(s.rows(), s.cols() + a.cols());
  input << s, a;
  return input;
}

void adam_scalar(double& value, AdamState& state, double grad, double lr) {
  Eigen::VectorXd p(1), g(1);
  p(0) = value;
  g(0) = grad;
  adam_step(p, state, g, lr);
  value = p(0);
}

}  // namespace

TwinCritics make_critics(int obs_dim, int action_dim,
                         const std::vector<int>& hidden, Rng& rng) {
  TwinCritics critics;
  critics.spec.layer_widths.push_back(obs_dim + action_dim);
  for (int w : hidden) critics.spec.layer_widths.push_back(w);
  critics.spec.layer_widths.push_back(1);
  critics.spec.activation = Activation::relu;
  critics.spec.output_activation = OutputActivation::none;
  critics.online1 = init_params(critics.spec, rng);
  critics.online2 = init_params(critics.spec, rng);
  critics.target1 = critics.online1;
  critics.target2 = critics.online2;
  critics.opt1 = make_adam_state(critics.online1.size());
  critics.opt2 = make_adam_state(critics.online2.size());
  return critics;
}

Eigen::VectorXd critic_values(const MlpSpec& spec, const Eigen::VectorXd& params,
                              const Eigen::MatrixXd& s, const Eigen::MatrixXd& a) {
  return forward(spec, params, sa_input(s, a)).col(0);
}

Eigen::VectorXd min_online_q(const TwinCritics& critics, const Eigen::MatrixXd& s,
                             const Eigen::MatrixXd& a) {
  return critic_values(critics.spec, critics.online1, s, a)
      .cwiseMin(critic_values(critics.spec, critics.online2, s, a));
}

Eigen::VectorXd min_target_q(const TwinCritics& critics, const Eigen::MatrixXd& s,
                             const Eigen::MatrixXd& a) {
  return critic_values(critics.spec, critics.target1, s, a)
      .cwiseMin(critic_values(critics.spec, critics.target2, s, a));
}

double Temperatures::alpha1() const { return std::exp(log_alpha1); }
double Temperatures::alpha2() const { return std::exp(log_alpha2); }

Temperatures make_temperatures(int action_dim) {
  Temperatures temps;
  temps.target_entropy = -static_cast<double>(action_dim);
  return temps;
}

Eigen::VectorXd critic_target(const Batch& batch,
                              const Eigen::VectorXd& min_q_next,
                              const Eigen::VectorXd& logp_next, double gamma,
                              double alpha1, double alpha2,
                              const Eigen::VectorXd& intrinsic_next) {
  int rows = batch.size();
  if (min_q_next.size() != rows || logp_next.size() != rows ||
      intrinsic_next.size() != rows) {
    throw std::invalid_argument("agents: critic_target size mismatch");
  }
  Eigen::VectorXd bracket =
      min_q_next - alpha1 * logp_next + alpha2 * intrinsic_next;
  return batch.r.array() +
         gamma * (1.0 - batch.done.array()) * bracket.array();
}

double update_critics(TwinCritics& critics, const Eigen::MatrixXd& s,
                      const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                      double lr) {
  Eigen::MatrixXd input = sa_input(s, a);
  int rows = static_cast<int>(input.rows());
  if (y.size() != rows) {
    throw std::invalid_argument("agents: target size mismatch");
  }
  double total = 0.0;
  Eigen::VectorXd* params[2] = {&critics.online1, &critics.online2};
  AdamState* opts[2] = {&critics.opt1, &critics.opt2};
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd q = forward(critics.spec, *params[k], input).col(0);
    Eigen::VectorXd diff = q - y;
    total += 0.5 * diff.squaredNorm() / rows;
    Eigen::MatrixXd cot = diff / rows;
    Gradients g = backward(critics.spec, *params[k], input, cot);
    adam_step(*params[k], *opts[k], g.params, lr);
  }
  return total / 2.0;
}

BonusEval info_gain_bonus(const DynamicsEnsemble& ens, const Eigen::MatrixXd& s,
                          const Eigen::MatrixXd& a) {
  Eigen::MatrixXd input = sa_input(s, a);
  std::vector<Eigen::MatrixXd> preds;
  preds.reserve(ens.params.size());
  for (const Eigen::VectorXd& p : ens.params) {
    preds.push_back(forward(ens.spec, p, input));
  }
  double count = static_cast<double>(preds.size());
  Eigen::MatrixXd mean = preds[0];
  for (std::size_t i = 1; i < preds.size(); ++i) {
    mean += (preds[i] - mean) / static_cast<double>(i + 1);
  }
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
  for (const Eigen::MatrixXd& p : preds) {
    var.array() += (p - mean).array().square();
  }
  var /= count;

  double sn2 = ens.sigma_noise * ens.sigma_noise;
  BonusEval out;
  out.value = info_gain_upper_rows(var, ens.sigma_noise);
  Eigen::ArrayXXd denom = sn2 + var.array();
  Eigen::MatrixXd input_grad =
      Eigen::MatrixXd::Zero(input.rows(), input.cols());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    Eigen::MatrixXd cot =
        ((2.0 / count) * (preds[i] - mean).array() / denom).matrix();
    input_grad += backward(ens.spec, ens.params[i], input, cot).input;
  }
  out.action_grad = input_grad.rightCols(a.cols());
  return out;
}

PolicyUpdate update_policy(SquashedGaussianPolicy& policy, AdamState& opt,
                           const std::vector<const TwinCritics*>& critic_pairs,
                           double alpha1, double alpha2, const BonusFn& bonus,
                           const Eigen::MatrixXd& s, Rng& rng, double lr) {
  if (critic_pairs.empty()) {
    throw std::invalid_argument("agents: update_policy needs critics");
  }
  int rows = static_cast<int>(s.rows());
  int da = policy.action_dim;
  PolicyBatchSample sample = sample_action_batch(policy, s, rng, false);
  Eigen::MatrixXd input = sa_input(s, sample.action);

  Eigen::VectorXd q_sum = Eigen::VectorXd::Zero(rows);
  Eigen::MatrixXd q_action_grad = Eigen::MatrixXd::Zero(rows, da);
  for (const TwinCritics* pair : critic_pairs) {
    Eigen::VectorXd q1 = forward(pair->spec, pair->online1, input).col(0);
    Eigen::VectorXd q2 = forward(pair->spec, pair->online2, input).col(0);
    q_sum += q1.cwiseMin(q2);
    Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(rows, 1);
    Eigen::MatrixXd c2 = Eigen::MatrixXd::Zero(rows, 1);
    for (int b = 0; b < rows; ++b) {
      (q1(b) <= q2(b) ? c1 : c2)(b, 0) = 1.0;
    }
    q_action_grad +=
        backward(pair->spec, pair->online1, input, c1).input.rightCols(da);
    q_action_grad +=
        backward(pair->spec, pair->online2, input, c2).input.rightCols(da);
  }

  PolicyUpdate result;
  Eigen::MatrixXd action_cot = -q_action_grad / rows;
  double bonus_term = 0.0;
  if (bonus) {
    BonusEval be = bonus(s, sample.action);
    result.mean_bonus = be.value.mean();
    bonus_term = alpha2 * result.mean_bonus;
    action_cot -= (alpha2 / rows) * be.action_grad;
  }
  result.mean_log_prob = sample.log_prob.mean();
  result.loss = alpha1 * result.mean_log_prob - bonus_term - q_sum.mean();

  Eigen::VectorXd logp_cot = Eigen::VectorXd::Constant(rows, alpha1 / rows);
  Eigen::MatrixXd head_cot = head_cotangent(policy, sample, action_cot, logp_cot);
  Eigen::VectorXd grad = backward(policy.spec, policy.params, s, head_cot).params;
  adam_step(policy.params, opt, grad, lr);
  return result;
}

std::pair<double, double> update_temperatures(Temperatures& temps,
                                              double mean_log_prob,
                                              double mean_bonus,
                                              double target_bonus, double lr,
                                              bool tune_alpha2) {
  double g1 = -temps.alpha1() * (mean_log_prob + temps.target_entropy);
  adam_scalar(temps.log_alpha1, temps.opt_alpha1, g1, lr);
  if (tune_alpha2) {
    double g2 = temps.alpha2() * (mean_bonus - target_bonus);
    adam_scalar(temps.log_alpha2, temps.opt_alpha2, g2, lr);
  }
  return {temps.alpha1(), temps.alpha2()};
}

void update_target_policy(SquashedGaussianPolicy& target,
                          const SquashedGaussianPolicy& online, double tau) {
  polyak(target.params, online.params, tau);
}

double eps_value(const EpsSchedule& schedule, long long step) {
  if (schedule.decay_steps < 1) {
    throw std::invalid_argument("agents: eps decay_steps must be >= 1");
  }
  double frac = static_cast<double>(step) / schedule.decay_steps;
  return std::max(0.0, schedule.eps0 * (1.0 - frac));
}

ActorMode eps_select(long long step, const EpsSchedule& schedule, Rng& rng) {
  double eps = eps_value(schedule, step);
  return uniform(rng, 0.0, 1.0) < eps ? ActorMode::intrinsic_actor
                                      : ActorMode::extrinsic_actor;
}

long long explore_switch_step(long long total_steps) { return total_steps / 4; }

ActorMode explore_then_exploit_mode(long long step, long long total_steps) {
  return step < explore_switch_step(total_steps) ? ActorMode::intrinsic_actor
                                                 : ActorMode::extrinsic_actor;
}

const char* algo_name(Algo algo) {
  switch (algo) {
    case Algo::sac: return "sac";
    case Algo::maxinfosac: return "maxinfosac";
    case Algo::sac_intrinsic: return "sac_intrinsic";
    case Algo::explore_then_exploit: return "explore_exploit";
    case Algo::eps_maxinfo: return "eps_maxinfo";
  }
  throw std::invalid_argument("agents: unknown algo");
}

Algo algo_from_name(const std::string& name) {
  if (name == "sac") return Algo::sac;
  if (name == "maxinfosac") return Algo::maxinfosac;
  if (name == "sac_intrinsic") return Algo::sac_intrinsic;
  if (name == "explore_exploit" || name == "explore_then_exploit") {
    return Algo::explore_then_exploit;
  }
  if (name == "eps_maxinfo") return Algo::eps_maxinfo;
  throw std::invalid_argument("agents: unknown algo '" + name + "'");
}

namespace {

SacCore make_core(const EnvSpec& espec, const std::vector<int>& hidden,
                  Rng& policy_rng, Rng& critic_rng) {
  SacCore core;
  core.policy = make_policy(espec.obs_dim, espec.action_dim, hidden,
                            espec.action_low, espec.action_high, policy_rng);
  core.target_policy = core.policy;
  core.policy_opt = make_adam_state(core.policy.params.size());
  core.critics =
      make_critics(espec.obs_dim, espec.action_dim, hidden, critic_rng);
  core.temps = make_temperatures(espec.action_dim);
  return core;
}

void validate_config(const AgentConfig& cfg) {
  if (cfg.gamma < 0.0 || cfg.gamma >= 1.0) {
    throw std::invalid_argument("agents: gamma must be in [0, 1)");
  }
  if (cfg.batch_size < 1) {
    throw std::invalid_argument("agents: batch_size must be >= 1");
  }
  if (cfg.lr <= 0.0) {
    throw std::invalid_argument("agents: lr must be > 0");
  }
  if (cfg.tau < 0.0 || cfg.tau > 1.0) {
    throw std::invalid_argument("agents: tau must be in [0, 1]");
  }
  if (cfg.warmup_steps < 0 || cfg.updates_per_step < 1 ||
      cfg.total_steps < 0) {
    throw std::invalid_argument("agents: invalid step counts");
  }
  if (cfg.eps.block < 1) {
    throw std::invalid_argument("agents: eps block must be >= 1");
  }
  if (cfg.algo == Algo::maxinfosac && cfg.use_intrinsic &&
      cfg.intrinsic == IntrinsicKind::curiosity) {
    throw std::invalid_argument(
        "agents: curiosity needs realized transitions; use sac_intrinsic, "
        "explore_exploit, or eps_maxinfo");
  }
}

}  // namespace

Agent::Agent(EnvKind env, const AgentConfig& config, std::uint64_t seed)
    : env_kind_(env),
      espec_(env_spec(env)),
      cfg_(config),
      buffer_(config.buffer_capacity, make_rng(seed, kBufferStream)),
      env_rng_(make_rng(seed, kEnvStream)),
      action_rng_(make_rng(seed, kActionStream)),
      update_rng_(make_rng(seed, kUpdateStream)),
      target_rng_(make_rng(seed, kTargetInfoStream)),
      mode_rng_(make_rng(seed, kModeStream)) {
  if (cfg_.algo == Algo::sac) {
    cfg_.pin_alpha2_zero = true;
    cfg_.use_intrinsic = false;
  } else if (cfg_.algo != Algo::maxinfosac) {
    cfg_.use_intrinsic = true;
  }
  if (cfg_.eps.decay_steps < 1) cfg_.eps.decay_steps = cfg_.total_steps;
  validate_config(cfg_);

  Rng policy_rng = make_rng(seed, kPolicyInit);
  Rng critic_rng = make_rng(seed, kCriticInit);
  core_ = make_core(espec_, cfg_.hidden, policy_rng, critic_rng);

  if (cfg_.use_intrinsic) {
    if (cfg_.intrinsic == IntrinsicKind::rnd) {
      Rng rnd_rng = make_rng(seed, kRndInit);
      rnd_ = make_rnd(espec_.obs_dim, espec_.action_dim, cfg_.ensemble_size,
                      cfg_.hidden, espec_.obs_dim + 1, cfg_.sigma_noise,
                      rnd_rng);
    } else {
      Rng ens_rng = make_rng(seed, kEnsembleInit);
      ensemble_ = make_ensemble(espec_.obs_dim, espec_.action_dim,
                                cfg_.ensemble_size, cfg_.hidden,
                                cfg_.sigma_noise, ens_rng);
    }
  }
  if (cfg_.algo == Algo::sac_intrinsic) {
    Rng second_rng = make_rng(seed, kSecondCriticInit);
    intrinsic_critics_ = make_critics(espec_.obs_dim, espec_.action_dim,
                                      cfg_.hidden, second_rng);
  }
  if (cfg_.algo == Algo::explore_then_exploit ||
      cfg_.algo == Algo::eps_maxinfo) {
    Rng ipolicy_rng = make_rng(seed, kIntrinsicPolicyInit);
    Rng icritic_rng = make_rng(seed, kIntrinsicCriticInit);
    intrinsic_core_ = make_core(espec_, cfg_.hidden, ipolicy_rng, icritic_rng);
  }
  env_state_ = reset_env(env_kind_, env_rng_);
}

BonusEval Agent::bonus(const Eigen::MatrixXd& s, const Eigen::MatrixXd& a) const {
  if (cfg_.intrinsic == IntrinsicKind::rnd) {
    return info_gain_bonus(rnd_->predictor, s, a);
  }
  if (cfg_.intrinsic == IntrinsicKind::info_gain) {
    return info_gain_bonus(*ensemble_, s, a);
  }
  throw std::logic_error("agents: curiosity has no state-action bonus");
}

Eigen::VectorXd Agent::normalize_rows(const Eigen::VectorXd& raw) {
  Eigen::VectorXd out(raw.size());
  for (int b = 0; b < raw.size(); ++b) out(b) = normalize(normalizer_, raw(b));
  return out;
}

double Agent::target_bonus_mean(const Eigen::MatrixXd& s) {
  double mean = 0.0;
  for (int k = 0; k < cfg_.target_info_samples; ++k) {
    PolicyBatchSample draw =
        sample_action_batch(core_.target_policy, s, target_rng_, false);
    double g = bonus(s, draw.action).value.mean();
    mean += (g - mean) / static_cast<double>(k + 1);
  }
  return mean;
}

Eigen::VectorXd Agent::collect_action() {
  if (step_ < cfg_.warmup_steps) {
    Eigen::VectorXd a(espec_.action_dim);
    for (int i = 0; i < a.size(); ++i) {
      a(i) = uniform(action_rng_, espec_.action_low(i), espec_.action_high(i));
    }
    return a;
  }
  const SquashedGaussianPolicy* policy = &core_.policy;
  if (intrinsic_core_ && mode_ == ActorMode::intrinsic_actor) {
    policy = &intrinsic_core_->policy;
  }
  Eigen::VectorXd obs = observe(env_kind_, env_state_);
  return sample_action(*policy, obs, action_rng_, false).first;
}

double Agent::model_step(const Batch& batch) {
  if (rnd_) return train_rnd(*rnd_, batch, cfg_.lr);
  if (ensemble_) return train_ensemble(*ensemble_, batch, cfg_.lr);
  return 0.0;
}

void Agent::polyak_core(SacCore& core) {
  polyak(core.critics.target1, core.critics.online1, cfg_.tau);
  polyak(core.critics.target2, core.critics.online2, cfg_.tau);
  update_target_policy(core.target_policy, core.policy, cfg_.tau);
}

void Agent::update_maxinfo(TrainStats& stats) {
  Batch batch = buffer_.sample(cfg_.batch_size);
  double alpha1 = core_.temps.alpha1();
  bool tune2 = cfg_.use_intrinsic && !cfg_.pin_alpha2_zero;
  double alpha2 = cfg_.pin_alpha2_zero ? 0.0
                  : cfg_.use_intrinsic ? core_.temps.alpha2()
                                       : 0.0;

  PolicyBatchSample next =
      sample_action_batch(core_.policy, batch.s_next, update_rng_, false);
  Eigen::VectorXd i_next = Eigen::VectorXd::Zero(batch.size());
  if (cfg_.use_intrinsic) {
    Eigen::VectorXd raw = bonus(batch.s_next, next.action).value;
    stats.mean_intrinsic = raw.mean();
    i_next = normalize_rows(raw);
  }
  Eigen::VectorXd y = critic_target(
      batch, min_target_q(core_.critics, batch.s_next, next.action),
      next.log_prob, cfg_.gamma, alpha1, alpha2, i_next);
  stats.critic_loss =
      update_critics(core_.critics, batch.s, batch.a, y, cfg_.lr);

  BonusFn bonus_fn;
  if (cfg_.use_intrinsic) {
    bonus_fn = [this](const Eigen::MatrixXd& bs, const Eigen::MatrixXd& ba) {
      return bonus(bs, ba);
    };
  }
  PolicyUpdate pu =
      update_policy(core_.policy, core_.policy_opt, {&core_.critics}, alpha1,
                    alpha2, bonus_fn, batch.s, update_rng_, cfg_.lr);
  stats.policy_loss = pu.loss;
  stats.entropy_estimate = -pu.mean_log_prob;

  double target_bonus = tune2 ? target_bonus_mean(batch.s) : 0.0;
  auto [a1, a2] = update_temperatures(core_.temps, pu.mean_log_prob,
                                      pu.mean_bonus, target_bonus, cfg_.lr,
                                      tune2);
  stats.alpha1 = a1;
  stats.alpha2 = tune2 ? a2 : 0.0;

  if (cfg_.use_intrinsic) stats.ensemble_loss = model_step(batch);
  polyak_core(core_);
}

void Agent::update_sac_intrinsic(TrainStats& stats) {
  Batch batch = buffer_.sample(cfg_.batch_size);
  double alpha1 = core_.temps.alpha1();

  Eigen::VectorXd raw;
  if (cfg_.intrinsic == IntrinsicKind::curiosity) {
    raw = curiosity_rows(*ensemble_, batch);
  } else {
    raw = bonus(batch.s, batch.a).value;
  }
  stats.mean_intrinsic = raw.mean();
  Eigen::VectorXd r_int = normalize_rows(raw);

  PolicyBatchSample next =
      sample_action_batch(core_.policy, batch.s_next, update_rng_, false);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(batch.size());
  Eigen::VectorXd y_ext = critic_target(
      batch, min_target_q(core_.critics, batch.s_next, next.action),
      next.log_prob, cfg_.gamma, 0.0, 0.0, zero);
  // Non-episodic intrinsic head: no done mask, entropy rides along.
  Eigen::VectorXd y_int =
      r_int.array() +
      cfg_.gamma *
          (min_target_q(*intrinsic_critics_, batch.s_next, next.action) -
           alpha1 * next.log_prob)
              .array();

  double ext_loss =
      update_critics(core_.critics, batch.s, batch.a, y_ext, cfg_.lr);
  double int_loss =
      update_critics(*intrinsic_critics_, batch.s, batch.a, y_int, cfg_.lr);
  stats.critic_loss = 0.5 * (ext_loss + int_loss);

  PolicyUpdate pu = update_policy(core_.policy, core_.policy_opt,
                                  {&core_.critics, &*intrinsic_critics_},
                                  alpha1, 0.0, BonusFn(), batch.s, update_rng_,
                                  cfg_.lr);
  stats.policy_loss = pu.loss;
  stats.entropy_estimate = -pu.mean_log_prob;

  auto [a1, a2] = update_temperatures(core_.temps, pu.mean_log_prob, 0.0, 0.0,
                                      cfg_.lr, false);
  stats.alpha1 = a1;
  stats.alpha2 = 0.0;

  stats.ensemble_loss = model_step(batch);
  polyak_core(core_);
  polyak(intrinsic_critics_->target1, intrinsic_critics_->online1, cfg_.tau);
  polyak(intrinsic_critics_->target2, intrinsic_critics_->online2, cfg_.tau);
}

void Agent::update_two_actor(TrainStats& stats) {
  Batch batch = buffer_.sample(cfg_.batch_size);

  Eigen::VectorXd raw;
  if (cfg_.intrinsic == IntrinsicKind::curiosity) {
    raw = curiosity_rows(*ensemble_, batch);
  } else {
    raw = bonus(batch.s, batch.a).value;
  }
  stats.mean_intrinsic = raw.mean();
  Eigen::VectorXd r_int = normalize_rows(raw);

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(batch.size());

  // Extrinsic core on task rewards.
  {
    double alpha1 = core_.temps.alpha1();
    PolicyBatchSample next =
        sample_action_batch(core_.policy, batch.s_next, update_rng_, false);
    Eigen::VectorXd y = critic_target(
        batch, min_target_q(core_.critics, batch.s_next, next.action),
        next.log_prob, cfg_.gamma, alpha1, 0.0, zero);
    stats.critic_loss =
        update_critics(core_.critics, batch.s, batch.a, y, cfg_.lr);
    PolicyUpdate pu =
        update_policy(core_.policy, core_.policy_opt, {&core_.critics}, alpha1,
                      0.0, BonusFn(), batch.s, update_rng_, cfg_.lr);
    stats.policy_loss = pu.loss;
    stats.entropy_estimate = -pu.mean_log_prob;
    auto [a1, a2] = update_temperatures(core_.temps, pu.mean_log_prob, 0.0,
                                        0.0, cfg_.lr, false);
    stats.alpha1 = a1;
    stats.alpha2 = 0.0;
  }

  // Intrinsic core on the normalized bonus as its reward.
  {
    SacCore& icore = *intrinsic_core_;
    double alpha1 = icore.temps.alpha1();
    Batch ibatch = batch;
    ibatch.r = r_int;
    PolicyBatchSample next =
        sample_action_batch(icore.policy, ibatch.s_next, update_rng_, false);
    Eigen::VectorXd y = critic_target(
        ibatch, min_target_q(icore.critics, ibatch.s_next, next.action),
        next.log_prob, cfg_.gamma, alpha1, 0.0, zero);
    update_critics(icore.critics, ibatch.s, ibatch.a, y, cfg_.lr);
    PolicyUpdate pu =
        update_policy(icore.policy, icore.policy_opt, {&icore.critics}, alpha1,
                      0.0, BonusFn(), ibatch.s, update_rng_, cfg_.lr);
    update_temperatures(icore.temps, pu.mean_log_prob, 0.0, 0.0, cfg_.lr,
                        false);
  }

  stats.ensemble_loss = model_step(batch);
  polyak_core(core_);
  polyak_core(*intrinsic_core_);
}

TrainStats Agent::train_step() {
  if (cfg_.algo == Algo::eps_maxinfo && step_ % cfg_.eps.block == 0) {
    mode_ = eps_select(step_, cfg_.eps, mode_rng_);
  } else if (cfg_.algo == Algo::explore_then_exploit) {
    mode_ = explore_then_exploit_mode(step_, cfg_.total_steps);
  }

  Eigen::VectorXd obs = observe(env_kind_, env_state_);
  Eigen::VectorXd action = collect_action();
  StepResult sr = step_env(env_kind_, env_state_, action, {cfg_.action_cost});

  Transition t;
  t.s = obs;
  t.a = action;
  t.r = sr.reward;
  t.s_next = sr.observation;
  t.done = sr.done;
  buffer_.push(t);

  episode_return_ += sr.reward;
  TrainStats stats;
  stats.step = step_;
  stats.action = action;
  stats.reward = sr.reward;
  stats.done = sr.done;
  stats.episodic_return = episode_return_;

  env_state_ = sr.next_state;
  if (sr.done) {
    env_state_ = reset_env(env_kind_, env_rng_);
    episode_return_ = 0.0;
  }

  if (step_ >= cfg_.warmup_steps && buffer_.size() >= cfg_.batch_size) {
    for (int u = 0; u < cfg_.updates_per_step; ++u) {
      switch (cfg_.algo) {
        case Algo::sac:
        case Algo::maxinfosac:
          update_maxinfo(stats);
          break;
        case Algo::sac_intrinsic:
          update_sac_intrinsic(stats);
          break;
        case Algo::explore_then_exploit:
        case Algo::eps_maxinfo:
          update_two_actor(stats);
          break;
      }
    }
  }
  ++step_;
  return stats;
}

}  // namespace maxinfo
