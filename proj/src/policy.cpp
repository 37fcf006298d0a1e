#include "maxinfo/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace maxinfo {

namespace {

constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;
constexpr double kTanhGuard = 1e-6;
constexpr double kTanhCap = 1.0 - 1e-12;
constexpr double kHalfLog2Pi = 0.91893853320467274178;

}  // namespace

SquashedGaussianPolicy make_policy(int obs_dim, int action_dim,
                                   const std::vector<int>& hidden,
                                   const Eigen::VectorXd& action_low,
                                   const Eigen::VectorXd& action_high,
                                   Rng& rng) {
  if (action_low.size() != action_dim || action_high.size() != action_dim) {
    throw std::invalid_argument("policy: bound sizes must match action_dim");
  }
  if (((action_high - action_low).array() <= 0.0).any()) {
    throw std::invalid_argument("policy: action_low must be < action_high");
  }
  SquashedGaussianPolicy policy;
  policy.spec.layer_widths.push_back(obs_dim);
  for (int w : hidden) policy.spec.layer_widths.push_back(w);
  policy.spec.layer_widths.push_back(2 * action_dim);
  policy.spec.activation = Activation::relu;
  policy.spec.output_activation = OutputActivation::none;
  policy.params = init_params(policy.spec, rng);
  policy.bias = 0.5 * (action_high + action_low);
  policy.scale = 0.5 * (action_high - action_low);
  policy.action_dim = action_dim;
  return policy;
}

PolicyBatchSample evaluate_with_z(const SquashedGaussianPolicy& policy,
                                  const Eigen::MatrixXd& obs,
                                  const Eigen::MatrixXd& z) {
  int da = policy.action_dim;
  PolicyBatchSample out;
  out.heads = forward(policy.spec, policy.params, obs);
  out.mean = out.heads.leftCols(da);
  out.log_std = out.heads.rightCols(da).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  out.z = z;
  out.pre_tanh = out.mean + out.log_std.array().exp().matrix().cwiseProduct(z);
  out.tanh_u = out.pre_tanh.array().tanh().cwiseMax(-kTanhCap).cwiseMin(kTanhCap);
  out.action = (out.tanh_u * policy.scale.asDiagonal()).rowwise() +
               policy.bias.transpose();

  int rows = static_cast<int>(obs.rows());
  out.log_prob.resize(rows);
  for (int b = 0; b < rows; ++b) {
    double lp = 0.0;
    for (int i = 0; i < da; ++i) {
      double t = out.tanh_u(b, i);
      lp += -kHalfLog2Pi - out.log_std(b, i) - 0.5 * z(b, i) * z(b, i);
      lp -= std::log(1.0 - t * t + kTanhGuard) + std::log(policy.scale(i));
    }
    out.log_prob(b) = lp;
  }
  return out;
}

PolicyBatchSample sample_action_batch(const SquashedGaussianPolicy& policy,
                                      const Eigen::MatrixXd& obs, Rng& rng,
                                      bool deterministic) {
  Eigen::MatrixXd z(obs.rows(), policy.action_dim);
  if (deterministic) {
    z.setZero();
  } else {
    for (int b = 0; b < z.rows(); ++b) {
      for (int i = 0; i < z.cols(); ++i) z(b, i) = normal(rng);
    }
  }
  return evaluate_with_z(policy, obs, z);
}

std::pair<Eigen::VectorXd, double> sample_action(
    const SquashedGaussianPolicy& policy, const Eigen::VectorXd& obs, Rng& rng,
    bool deterministic) {
  PolicyBatchSample sample =
      sample_action_batch(policy, obs.transpose(), rng, deterministic);
  return {sample.action.row(0), sample.log_prob(0)};
}

Eigen::MatrixXd head_cotangent(const SquashedGaussianPolicy& policy,
                               const PolicyBatchSample& sample,
                               const Eigen::MatrixXd& action_cot,
                               const Eigen::VectorXd& logp_cot) {
  int rows = static_cast<int>(sample.heads.rows());
  int da = policy.action_dim;
  if (action_cot.rows() != rows || action_cot.cols() != da ||
      logp_cot.size() != rows) {
    throw std::invalid_argument("policy: cotangent shape mismatch");
  }
  Eigen::MatrixXd cot = Eigen::MatrixXd::Zero(rows, 2 * da);
  for (int b = 0; b < rows; ++b) {
    for (int i = 0; i < da; ++i) {
      double t = sample.tanh_u(b, i);
      double one_minus_t2 = 1.0 - t * t;
      double denom = one_minus_t2 + kTanhGuard;
      double sigma_z = std::exp(sample.log_std(b, i)) * sample.z(b, i);
      double da_du = policy.scale(i) * one_minus_t2;
      double dlp_du = 2.0 * t * one_minus_t2 / denom;

      cot(b, i) = action_cot(b, i) * da_du + logp_cot(b) * dlp_du;

      double raw = sample.heads(b, da + i);
      if (raw >= kLogStdMin && raw <= kLogStdMax) {
        cot(b, da + i) = action_cot(b, i) * da_du * sigma_z +
                         logp_cot(b) * (-1.0 + dlp_du * sigma_z);
      }
    }
  }
  return cot;
}

}  // namespace maxinfo
