#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "maxinfo/envs.hpp"
#include "maxinfo/intrinsic.hpp"
#include "maxinfo/mlp.hpp"
#include "maxinfo/policy.hpp"
#include "maxinfo/replay.hpp"
#include "maxinfo/rng.hpp"

namespace maxinfo {

struct TwinCritics {
  MlpSpec spec;
  Eigen::VectorXd online1, online2;
  Eigen::VectorXd target1, target2;
  AdamState opt1, opt2;
};

TwinCritics make_critics(int obs_dim, int action_dim,
                         const std::vector<int>& hidden, Rng& rng);

Eigen::VectorXd critic_values(const MlpSpec& spec, const Eigen::VectorXd& params,
                              const Eigen::MatrixXd& s, const Eigen::MatrixXd& a);

Eigen::VectorXd min_online_q(const TwinCritics& critics, const Eigen::MatrixXd& s,
                             const Eigen::MatrixXd& a);
Eigen::VectorXd min_target_q(const TwinCritics& critics, const Eigen::MatrixXd& s,
                             const Eigen::MatrixXd& a);

// Dual temperatures, optimized through their logs.
struct Temperatures {
  double log_alpha1 = 0.0;
  double log_alpha2 = 0.0;
  double target_entropy = 0.0;
  AdamState opt_alpha1 = make_adam_state(1);
  AdamState opt_alpha2 = make_adam_state(1);

  double alpha1() const;
  double alpha2() const;
};

Temperatures make_temperatures(int action_dim);

// y = r + gamma * (1 - done) * (min_q_next - alpha1 * logp_next + alpha2 * i_next)
Eigen::VectorXd critic_target(const Batch& batch,
                              const Eigen::VectorXd& min_q_next,
                              const Eigen::VectorXd& logp_next, double gamma,
                              double alpha1, double alpha2,
                              const Eigen::VectorXd& intrinsic_next);

// One Adam step per critic on 0.5 * mean (Q - y)^2; returns the averaged loss.
double update_critics(TwinCritics& critics, const Eigen::MatrixXd& s,
                      const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                      double lr);

// State-action exploration bonus with its action gradient, row per sample.
struct BonusEval {
  Eigen::VectorXd value;
  Eigen::MatrixXd action_grad;
};
using BonusFn =
    std::function<BonusEval(const Eigen::MatrixXd& s, const Eigen::MatrixXd& a)>;

// Info-gain bonus of an ensemble, differentiated through the member nets.
BonusEval info_gain_bonus(const DynamicsEnsemble& ens, const Eigen::MatrixXd& s,
                          const Eigen::MatrixXd& a);

struct PolicyUpdate {
  double loss = 0.0;
  double mean_log_prob = 0.0;
  double mean_bonus = 0.0;
};

// Minimizes mean[alpha1 * log pi - alpha2 * bonus - sum over pairs of min Q]
// with reparameterized actions; `bonus` may be empty when alpha2 is unused.
PolicyUpdate update_policy(SquashedGaussianPolicy& policy, AdamState& opt,
                           const std::vector<const TwinCritics*>& critic_pairs,
                           double alpha1, double alpha2, const BonusFn& bonus,
                           const Eigen::MatrixXd& s, Rng& rng, double lr);

// Descends J(a1) = mean[-a1 * (logp + target_entropy)] and, when enabled,
// J(a2) = a2 * (mean_bonus - target_bonus), one Adam step each on the logs.
std::pair<double, double> update_temperatures(Temperatures& temps,
                                              double mean_log_prob,
                                              double mean_bonus,
                                              double target_bonus, double lr,
                                              bool tune_alpha2);

void update_target_policy(SquashedGaussianPolicy& target,
                          const SquashedGaussianPolicy& online, double tau);

// Two-actor plumbing.
enum class ActorMode { intrinsic_actor, extrinsic_actor };

struct EpsSchedule {
  double eps0 = 1.0;
  long long decay_steps = 0;
  int block = 32;
};

double eps_value(const EpsSchedule& schedule, long long step);
// Bernoulli draw for one block; call once per block start.
ActorMode eps_select(long long step, const EpsSchedule& schedule, Rng& rng);

long long explore_switch_step(long long total_steps);
ActorMode explore_then_exploit_mode(long long step, long long total_steps);

enum class Algo { sac, maxinfosac, sac_intrinsic, explore_then_exploit, eps_maxinfo };

const char* algo_name(Algo algo);
Algo algo_from_name(const std::string& name);

struct AgentConfig {
  Algo algo = Algo::maxinfosac;
  double gamma = 0.99;
  double lr = 3e-4;
  int batch_size = 256;
  double tau = 0.005;
  int warmup_steps = 1000;
  int updates_per_step = 1;
  int buffer_capacity = 100000;
  std::vector<int> hidden = {256, 256};
  int ensemble_size = 5;
  IntrinsicKind intrinsic = IntrinsicKind::info_gain;
  double sigma_noise = 1e-3;
  int target_info_samples = 1;
  long long total_steps = 30000;
  double action_cost = 0.0;
  EpsSchedule eps;
  // Reduction knobs; the sac algo forces both.
  bool pin_alpha2_zero = false;
  bool use_intrinsic = true;
};

struct TrainStats {
  long long step = 0;
  Eigen::VectorXd action;
  double reward = 0.0;
  bool done = false;
  double episodic_return = 0.0;
  double critic_loss = 0.0;
  double policy_loss = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double mean_intrinsic = 0.0;
  double entropy_estimate = 0.0;
  double ensemble_loss = 0.0;
};

struct SacCore {
  SquashedGaussianPolicy policy;
  SquashedGaussianPolicy target_policy;
  AdamState policy_opt;
  TwinCritics critics;
  Temperatures temps;
};

// One training agent: owns the environment state, replay buffer, and all
// learned components of the selected algorithm. Reported losses and
// temperatures come from the extrinsic core; mean_intrinsic tracks the raw
// bonus values consumed by the step's update.
class Agent {
 public:
  Agent(EnvKind env, const AgentConfig& config, std::uint64_t seed);

  TrainStats train_step();

  const SquashedGaussianPolicy& eval_policy() const { return core_.policy; }
  const AgentConfig& config() const { return cfg_; }
  EnvKind env_kind() const { return env_kind_; }
  int buffer_size() const { return buffer_.size(); }
  long long steps_taken() const { return step_; }
  const SacCore& core() const { return core_; }
  const SacCore* intrinsic_core() const {
    return intrinsic_core_ ? &*intrinsic_core_ : nullptr;
  }
  const DynamicsEnsemble* ensemble() const {
    return ensemble_ ? &*ensemble_ : nullptr;
  }

 private:
  BonusEval bonus(const Eigen::MatrixXd& s, const Eigen::MatrixXd& a) const;
  Eigen::VectorXd normalize_rows(const Eigen::VectorXd& raw);
  double target_bonus_mean(const Eigen::MatrixXd& s);
  Eigen::VectorXd collect_action();
  void update_maxinfo(TrainStats& stats);
  void update_sac_intrinsic(TrainStats& stats);
  void update_two_actor(TrainStats& stats);
  double model_step(const Batch& batch);
  void polyak_core(SacCore& core);

  EnvKind env_kind_;
  EnvSpec espec_;
  AgentConfig cfg_;
  EnvState env_state_;
  double episode_return_ = 0.0;
  long long step_ = 0;
  ReplayBuffer buffer_;
  SacCore core_;
  std::optional<SacCore> intrinsic_core_;
  std::optional<TwinCritics> intrinsic_critics_;
  std::optional<DynamicsEnsemble> ensemble_;
  std::optional<RndPair> rnd_;
  RunningNormalizer normalizer_;
  ActorMode mode_ = ActorMode::extrinsic_actor;
  Rng env_rng_, action_rng_, update_rng_, target_rng_, mode_rng_;
};

}  // namespace maxinfo
