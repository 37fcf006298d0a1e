#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "maxinfo/rng.hpp"

namespace maxinfo {

enum class EnvKind { pendulum, cartpole };

struct EnvSpec {
  int obs_dim = 0;
  int action_dim = 0;
  Eigen::VectorXd action_low;
  Eigen::VectorXd action_high;
  double dt = 0.0;
  int max_episode_steps = 0;
};

// Internal state. Pendulum: (theta, theta_dot). Cartpole: (x, x_dot, theta,
// theta_dot). theta = 0 is upright for both; theta is kept unwrapped here and
// wrapped on observation.
struct EnvState {
  Eigen::VectorXd x;
  int step_index = 0;
};

struct StepResult {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool done = false;
  EnvState next_state;
};

struct ActionCostConfig {
  double K = 0.0;
};

EnvSpec env_spec(EnvKind kind);
const char* env_name(EnvKind kind);
EnvKind env_from_name(const std::string& name);

// Equivalent angle in [-pi, pi]; the -pi boundary maps to +pi.
double wrap_angle(double theta);

EnvState reset_env(EnvKind kind, Rng& rng);
EnvState reset_env(EnvKind kind, std::uint64_t seed);

Eigen::VectorXd observe(EnvKind kind, const EnvState& state);

// Reward is evaluated on the state the action is applied in; the action cost
// -K * |u| uses the clipped action.
StepResult step_pendulum(const EnvState& state, const Eigen::VectorXd& action,
                         const ActionCostConfig& cost);
StepResult step_cartpole(const EnvState& state, const Eigen::VectorXd& action,
                         const ActionCostConfig& cost);
StepResult step_env(EnvKind kind, const EnvState& state,
                    const Eigen::VectorXd& action, const ActionCostConfig& cost);

}  // namespace maxinfo
