#pragma once

#include <Eigen/Dense>

#include <vector>

#include "maxinfo/rng.hpp"

namespace maxinfo {

// Explicit finite MDP. P[s] is an A x S matrix; row a is the distribution
// over next states after taking action a in state s.
struct FiniteMdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<Eigen::MatrixXd> P;
  Eigen::MatrixXd r;
  double gamma = 0.9;
};

// Row-stochastic S x A tables: pi(s, a) and a fixed exploration bonus.
using TabularPolicy = Eigen::MatrixXd;
using BonusTable = Eigen::MatrixXd;

void validate_mdp(const FiniteMdp& mdp);
void validate_policy(const FiniteMdp& mdp, const TabularPolicy& pi);

// V(s) = sum_a pi(a|s) [Q(s,a) - alpha1 log pi(a|s) + alpha2 I(s,a)],
// with zero-probability actions contributing nothing.
Eigen::VectorXd soft_value(const FiniteMdp& mdp, const TabularPolicy& pi,
                           const Eigen::MatrixXd& q, double alpha1,
                           double alpha2, const BonusTable& bonus);

// Q'(s,a) = r(s,a) + gamma * sum_{s'} P(s'|s,a) V(s').
Eigen::MatrixXd soft_bellman_apply(const FiniteMdp& mdp,
                                   const TabularPolicy& pi,
                                   const Eigen::MatrixXd& q, double alpha1,
                                   double alpha2, const BonusTable& bonus);

// Iterates the operator from Q = 0 until the sup-norm change drops below tol.
Eigen::MatrixXd soft_policy_evaluate(const FiniteMdp& mdp,
                                     const TabularPolicy& pi, double alpha1,
                                     double alpha2, const BonusTable& bonus,
                                     double tol);

// Row-wise softmax of (Q + alpha2 * bonus) / alpha1.
TabularPolicy soft_policy_improve(const FiniteMdp& mdp,
                                  const Eigen::MatrixXd& q, double alpha1,
                                  double alpha2, const BonusTable& bonus);

struct PolicyIterationResult {
  TabularPolicy policy;
  Eigen::MatrixXd q;
  std::vector<Eigen::MatrixXd> trace;  // Q table per evaluation pass
  int iterations = 0;                  // improvement steps taken
};

// Alternates evaluation and improvement from the uniform policy until the
// worst per-row total-variation change drops below tol. Evaluation runs to
// min(tol, 1e-12) in sup norm.
PolicyIterationResult soft_policy_iteration(const FiniteMdp& mdp,
                                            double alpha1, double alpha2,
                                            const BonusTable& bonus,
                                            double tol);

// Transition rows drawn Dirichlet(1), rewards Unif[-0.5, 0.5].
FiniteMdp random_mdp(int num_states, int num_actions, double gamma, Rng& rng);
BonusTable random_bonus(int num_states, int num_actions, double scale,
                        Rng& rng);

}  // namespace maxinfo
