#include "maxinfo/tabular.hpp"

#include <cmath>
#include <stdexcept>

namespace maxinfo {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kEvalTol = 1e-12;

}  // namespace

void validate_mdp(const FiniteMdp& mdp) {
  if (mdp.num_states < 1 || mdp.num_actions < 1) {
    throw std::invalid_argument("tabular: empty state or action set");
  }
  if (mdp.gamma < 0.0 || mdp.gamma >= 1.0) {
    throw std::invalid_argument("tabular: gamma must be in [0, 1)");
  }
  if (static_cast<int>(mdp.P.size()) != mdp.num_states ||
      mdp.r.rows() != mdp.num_states || mdp.r.cols() != mdp.num_actions) {
    throw std::invalid_argument("tabular: table shapes disagree");
  }
  if (!mdp.r.allFinite()) {
    throw std::invalid_argument("tabular: rewards must be finite");
  }
  for (const Eigen::MatrixXd& ps : mdp.P) {
    if (ps.rows() != mdp.num_actions || ps.cols() != mdp.num_states) {
      throw std::invalid_argument("tabular: transition shapes disagree");
    }
    if ((ps.array() < 0.0).any()) {
      throw std::invalid_argument("tabular: negative transition probability");
    }
    for (int a = 0; a < mdp.num_actions; ++a) {
      if (std::abs(ps.row(a).sum() - 1.0) > kRowSumTol) {
        throw std::invalid_argument("tabular: transition row does not sum to 1");
      }
    }
  }
}

void validate_policy(const FiniteMdp& mdp, const TabularPolicy& pi) {
  if (pi.rows() != mdp.num_states || pi.cols() != mdp.num_actions) {
    throw std::invalid_argument("tabular: policy shape disagrees");
  }
  if ((pi.array() < 0.0).any()) {
    throw std::invalid_argument("tabular: negative policy probability");
  }
  for (int s = 0; s < mdp.num_states; ++s) {
    if (std::abs(pi.row(s).sum() - 1.0) > kRowSumTol) {
      throw std::invalid_argument("tabular: policy row does not sum to 1");
    }
  }
}

Eigen::VectorXd soft_value(const FiniteMdp& mdp, const TabularPolicy& pi,
                           const Eigen::MatrixXd& q, double alpha1,
                           double alpha2, const BonusTable& bonus) {
  Eigen::VectorXd v(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    double acc = 0.0;
    for (int a = 0; a < mdp.num_actions; ++a) {
      double p = pi(s, a);
      if (p == 0.0) continue;
      acc += p * (q(s, a) - alpha1 * std::log(p) + alpha2 * bonus(s, a));
    }
    v(s) = acc;
  }
  return v;
}

Eigen::MatrixXd soft_bellman_apply(const FiniteMdp& mdp,
                                   const TabularPolicy& pi,
                                   const Eigen::MatrixXd& q, double alpha1,
                                   double alpha2, const BonusTable& bonus) {
  Eigen::VectorXd v = soft_value(mdp, pi, q, alpha1, alpha2, bonus);
  Eigen::MatrixXd out(mdp.num_states, mdp.num_actions);
  for (int s = 0; s < mdp.num_states; ++s) {
    out.row(s) = mdp.r.row(s) + mdp.gamma * (mdp.P[s] * v).transpose();
  }
  return out;
}

namespace {

Eigen::MatrixXd evaluate_from(const FiniteMdp& mdp, const TabularPolicy& pi,
                              double alpha1, double alpha2,
                              const BonusTable& bonus, double tol,
                              Eigen::MatrixXd q) {
  for (long long sweep = 0; sweep < 10000000; ++sweep) {
    Eigen::MatrixXd next = soft_bellman_apply(mdp, pi, q, alpha1, alpha2, bonus);
    double delta = (next - q).cwiseAbs().maxCoeff();
    q = std::move(next);
    if (delta < tol) return q;
  }
  throw std::runtime_error("tabular: evaluation did not converge");
}

}  // namespace

Eigen::MatrixXd soft_policy_evaluate(const FiniteMdp& mdp,
                                     const TabularPolicy& pi, double alpha1,
                                     double alpha2, const BonusTable& bonus,
                                     double tol) {
  if (tol <= 0.0) throw std::invalid_argument("tabular: tol must be > 0");
  return evaluate_from(mdp, pi, alpha1, alpha2, bonus, tol,
                       Eigen::MatrixXd::Zero(mdp.num_states, mdp.num_actions));
}

TabularPolicy soft_policy_improve(const FiniteMdp& mdp,
                                  const Eigen::MatrixXd& q, double alpha1,
                                  double alpha2, const BonusTable& bonus) {
  if (alpha1 <= 0.0) {
    throw std::invalid_argument("tabular: improvement needs alpha1 > 0");
  }
  Eigen::MatrixXd logits = (q + alpha2 * bonus) / alpha1;
  TabularPolicy pi(mdp.num_states, mdp.num_actions);
  for (int s = 0; s < mdp.num_states; ++s) {
    Eigen::ArrayXd shifted =
        logits.row(s).array() - logits.row(s).maxCoeff();
    Eigen::ArrayXd weights = shifted.exp();
    pi.row(s) = (weights / weights.sum()).transpose();
  }
  return pi;
}

PolicyIterationResult soft_policy_iteration(const FiniteMdp& mdp,
                                            double alpha1, double alpha2,
                                            const BonusTable& bonus,
                                            double tol) {
  validate_mdp(mdp);
  if (tol <= 0.0) throw std::invalid_argument("tabular: tol must be > 0");
  double eval_tol = std::min(tol, kEvalTol);

  PolicyIterationResult result;
  TabularPolicy pi = TabularPolicy::Constant(mdp.num_states, mdp.num_actions,
                                             1.0 / mdp.num_actions);
  Eigen::MatrixXd q =
      Eigen::MatrixXd::Zero(mdp.num_states, mdp.num_actions);
  while (true) {
    q = evaluate_from(mdp, pi, alpha1, alpha2, bonus, eval_tol, q);
    result.trace.push_back(q);
    TabularPolicy next = soft_policy_improve(mdp, q, alpha1, alpha2, bonus);
    ++result.iterations;
    double change = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
      change = std::max(change, 0.5 * (next.row(s) - pi.row(s)).cwiseAbs().sum());
    }
    pi = std::move(next);
    if (change < tol) break;
  }
  result.policy = pi;
  result.q = result.trace.back();
  return result;
}

FiniteMdp random_mdp(int num_states, int num_actions, double gamma, Rng& rng) {
  FiniteMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.gamma = gamma;
  mdp.P.reserve(num_states);
  for (int s = 0; s < num_states; ++s) {
    Eigen::MatrixXd ps(num_actions, num_states);
    for (int a = 0; a < num_actions; ++a) {
      for (int t = 0; t < num_states; ++t) {
        ps(a, t) = -std::log(1.0 - uniform(rng, 0.0, 1.0));
      }
      ps.row(a) /= ps.row(a).sum();
    }
    mdp.P.push_back(std::move(ps));
  }
  mdp.r.resize(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      mdp.r(s, a) = uniform(rng, -0.5, 0.5);
    }
  }
  validate_mdp(mdp);
  return mdp;
}

BonusTable random_bonus(int num_states, int num_actions, double scale,
                        Rng& rng) {
  BonusTable bonus(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      bonus(s, a) = uniform(rng, 0.0, scale);
    }
  }
  return bonus;
}

}  // namespace maxinfo
