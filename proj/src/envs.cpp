#include "maxinfo/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maxinfo {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kGravity = 9.81;

// Pendulum: uniform rod, mass 1, length 1, torque limit 2, speed limit 8.
constexpr double kPendulumDt = 0.05;
constexpr double kMaxTorque = 2.0;
constexpr double kMaxSpeed = 8.0;
constexpr int kPendulumSteps = 200;

// Cartpole: cart mass 1, pole mass 0.1, pole half-length 0.5, force limit 10,
// elastic walls at |x| = 2.4.
constexpr double kCartpoleDt = 0.02;
constexpr double kCartMass = 1.0;
constexpr double kPoleMass = 0.1;
constexpr double kHalfLength = 0.5;
constexpr double kMaxForce = 10.0;
constexpr double kTrackLimit = 2.4;
constexpr int kCartpoleSteps = 500;
constexpr double kTotalMass = kCartMass + kPoleMass;
constexpr double kPoleMassLength = kPoleMass * kHalfLength;

double validate_action(const Eigen::VectorXd& action, double limit,
                       const ActionCostConfig& cost) {
  if (action.size() != 1) {
    throw std::invalid_argument("envs: action must have dimension 1");
  }
  if (!std::isfinite(action(0))) {
    throw std::invalid_argument("envs: non-finite action");
  }
  if (cost.K < 0.0) {
    throw std::invalid_argument("envs: action cost K must be >= 0");
  }
  return std::clamp(action(0), -limit, limit);
}

Eigen::Vector4d cartpole_deriv(const Eigen::Vector4d& s, double force) {
  double costh = std::cos(s(2));
  double sinth = std::sin(s(2));
  double temp = (force + kPoleMassLength * s(3) * s(3) * sinth) / kTotalMass;
  double thacc = (kGravity * sinth - costh * temp) /
                 (kHalfLength * (4.0 / 3.0 - kPoleMass * costh * costh / kTotalMass));
  double xacc = temp - kPoleMassLength * thacc * costh / kTotalMass;
  return {s(1), xacc, s(3), thacc};
}

}  // namespace

EnvSpec env_spec(EnvKind kind) {
  EnvSpec spec;
  spec.action_dim = 1;
  if (kind == EnvKind::pendulum) {
    spec.obs_dim = 3;
    spec.action_low = Eigen::VectorXd::Constant(1, -kMaxTorque);
    spec.action_high = Eigen::VectorXd::Constant(1, kMaxTorque);
    spec.dt = kPendulumDt;
    spec.max_episode_steps = kPendulumSteps;
  } else {
    spec.obs_dim = 4;
    spec.action_low = Eigen::VectorXd::Constant(1, -kMaxForce);
    spec.action_high = Eigen::VectorXd::Constant(1, kMaxForce);
    spec.dt = kCartpoleDt;
    spec.max_episode_steps = kCartpoleSteps;
  }
  return spec;
}

const char* env_name(EnvKind kind) {
  return kind == EnvKind::pendulum ? "pendulum" : "cartpole";
}

EnvKind env_from_name(const std::string& name) {
  if (name == "pendulum") return EnvKind::pendulum;
  if (name == "cartpole") return EnvKind::cartpole;
  throw std::invalid_argument("envs: unknown environment '" + name + "'");
}

double wrap_angle(double theta) {
  double w = std::remainder(theta, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

EnvState reset_env(EnvKind kind, Rng& rng) {
  EnvState state;
  state.step_index = 0;
  if (kind == EnvKind::pendulum) {
    state.x.resize(2);
    state.x(0) = uniform(rng, -kPi, kPi);
    state.x(1) = uniform(rng, -1.0, 1.0);
  } else {
    state.x.resize(4);
    state.x(0) = uniform(rng, -0.05, 0.05);
    state.x(1) = uniform(rng, -0.05, 0.05);
    state.x(2) = kPi + uniform(rng, -0.05, 0.05);
    state.x(3) = uniform(rng, -0.05, 0.05);
  }
  return state;
}

EnvState reset_env(EnvKind kind, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  return reset_env(kind, rng);
}

Eigen::VectorXd observe(EnvKind kind, const EnvState& state) {
  if (kind == EnvKind::pendulum) {
    Eigen::VectorXd obs(3);
    obs(0) = std::cos(state.x(0));
    obs(1) = std::sin(state.x(0));
    obs(2) = state.x(1);
    return obs;
  }
  Eigen::VectorXd obs(4);
  obs(0) = state.x(0);
  obs(1) = state.x(1);
  obs(2) = wrap_angle(state.x(2));
  obs(3) = state.x(3);
  return obs;
}

StepResult step_pendulum(const EnvState& state, const Eigen::VectorXd& action,
                         const ActionCostConfig& cost) {
  double u = validate_action(action, kMaxTorque, cost);
  double th = state.x(0);
  double thdot = state.x(1);

  double wrapped = wrap_angle(th);
  double base = -(wrapped * wrapped + 0.1 * thdot * thdot + 0.001 * u * u);
  double reward = base - cost.K * std::abs(u);

  double new_thdot = thdot + kPendulumDt * (1.5 * kGravity * std::sin(th) + 3.0 * u);
  new_thdot = std::clamp(new_thdot, -kMaxSpeed, kMaxSpeed);
  double new_th = th + kPendulumDt * new_thdot;

  StepResult result;
  result.next_state.x.resize(2);
  result.next_state.x(0) = new_th;
  result.next_state.x(1) = new_thdot;
  result.next_state.step_index = state.step_index + 1;
  result.observation = observe(EnvKind::pendulum, result.next_state);
  result.reward = reward;
  result.done = result.next_state.step_index >= kPendulumSteps;
  return result;
}

StepResult step_cartpole(const EnvState& state, const Eigen::VectorXd& action,
                         const ActionCostConfig& cost) {
  double u = validate_action(action, kMaxForce, cost);
  Eigen::Vector4d s = state.x;

  double reward = std::cos(s(2)) - cost.K * std::abs(u);

  Eigen::Vector4d k1 = cartpole_deriv(s, u);
  Eigen::Vector4d k2 = cartpole_deriv(s + 0.5 * kCartpoleDt * k1, u);
  Eigen::Vector4d k3 = cartpole_deriv(s + 0.5 * kCartpoleDt * k2, u);
  Eigen::Vector4d k4 = cartpole_deriv(s + kCartpoleDt * k3, u);
  Eigen::Vector4d next = s + (kCartpoleDt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  if (next(0) > kTrackLimit) {
    next(0) = kTrackLimit;
    if (next(1) > 0.0) next(1) = -next(1);
  } else if (next(0) < -kTrackLimit) {
    next(0) = -kTrackLimit;
    if (next(1) < 0.0) next(1) = -next(1);
  }

  StepResult result;
  result.next_state.x = next;
  result.next_state.step_index = state.step_index + 1;
  result.observation = observe(EnvKind::cartpole, result.next_state);
  result.reward = reward;
  result.done = result.next_state.step_index >= kCartpoleSteps;
  return result;
}

StepResult step_env(EnvKind kind, const EnvState& state,
                    const Eigen::VectorXd& action, const ActionCostConfig& cost) {
  return kind == EnvKind::pendulum ? step_pendulum(state, action, cost)
                                   : step_cartpole(state, action, cost);
}

}  // namespace maxinfo
