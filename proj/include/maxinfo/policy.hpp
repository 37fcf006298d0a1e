#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "maxinfo/mlp.hpp"
#include "maxinfo/rng.hpp"

namespace maxinfo {

// Gaussian policy squashed through tanh and mapped into the action box via
// a = bias + scale * tanh(mean + std * z). The network emits 2 * action_dim
// heads per observation: means first, then log-stds (hard-clamped to
// [-20, 2]).
struct SquashedGaussianPolicy {
  MlpSpec spec;
  Eigen::VectorXd params;
  Eigen::VectorXd bias;
  Eigen::VectorXd scale;
  int action_dim = 0;
};

SquashedGaussianPolicy make_policy(int obs_dim, int action_dim,
                                   const std::vector<int>& hidden,
                                   const Eigen::VectorXd& action_low,
                                   const Eigen::VectorXd& action_high,
                                   Rng& rng);

struct PolicyBatchSample {
  Eigen::MatrixXd heads;     // raw network output, B x 2da
  Eigen::MatrixXd mean;      // B x da
  Eigen::MatrixXd log_std;   // clamped, B x da
  Eigen::MatrixXd z;         // standard-normal draws, B x da
  Eigen::MatrixXd pre_tanh;  // mean + std * z
  Eigen::MatrixXd tanh_u;    // squashed pre_tanh
  Eigen::MatrixXd action;    // B x da
  Eigen::VectorXd log_prob;  // B
};

// Deterministic core: runs the network and applies the given z draws.
PolicyBatchSample evaluate_with_z(const SquashedGaussianPolicy& policy,
                                  const Eigen::MatrixXd& obs,
                                  const Eigen::MatrixXd& z);

// Draws z row by row from rng (all zeros when deterministic).
PolicyBatchSample sample_action_batch(const SquashedGaussianPolicy& policy,
                                      const Eigen::MatrixXd& obs, Rng& rng,
                                      bool deterministic);

std::pair<Eigen::VectorXd, double> sample_action(
    const SquashedGaussianPolicy& policy, const Eigen::VectorXd& obs, Rng& rng,
    bool deterministic);

// Maps per-sample cotangents on (action, log_prob) back to cotangents on the
// raw network heads, treating z as a fixed draw (reparameterization) and
// zeroing gradients where the log-std clamp is active.
Eigen::MatrixXd head_cotangent(const SquashedGaussianPolicy& policy,
                               const PolicyBatchSample& sample,
                               const Eigen::MatrixXd& action_cot,
                               const Eigen::VectorXd& logp_cot);

}  // namespace maxinfo
