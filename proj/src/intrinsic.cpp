#include "maxinfo/intrinsic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maxinfo {

namespace {

MlpSpec member_spec(int obs_dim, int action_dim, const std::vector<int>& hidden,
                    int out_dim) {
  MlpSpec spec;
  spec.layer_widths.push_back(obs_dim + action_dim);
  for (int w : hidden) spec.layer_widths.push_back(w);
  spec.layer_widths.push_back(out_dim);
  spec.activation = Activation::relu;
  spec.output_activation = OutputActivation::none;
  return spec;
}

std::vector<Eigen::VectorXd> init_members(const MlpSpec& spec, int members,
                                          Rng& rng) {
  if (members < 2) {
    throw std::invalid_argument("intrinsic: ensemble needs at least 2 members");
  }
  std::vector<Eigen::VectorXd> params;
  params.reserve(members);
  for (int i = 0; i < members; ++i) params.push_back(init_params(spec, rng));
  return params;
}

double train_members(DynamicsEnsemble& ens, const Eigen::MatrixXd& input,
                     const Eigen::MatrixXd& target, double lr) {
  int rows = static_cast<int>(input.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < ens.params.size(); ++i) {
    Eigen::MatrixXd pred = forward(ens.spec, ens.params[i], input);
    Eigen::MatrixXd diff = pred - target;
    total += diff.squaredNorm() / rows;
    Eigen::MatrixXd cotangent = (2.0 / rows) * diff;
    Gradients g = backward(ens.spec, ens.params[i], input, cotangent);
    adam_step(ens.params[i], ens.opt[i], g.params, lr);
  }
  return total / static_cast<double>(ens.params.size());
}

}  // namespace

const char* intrinsic_name(IntrinsicKind kind) {
  switch (kind) {
    case IntrinsicKind::info_gain: return "info_gain";
    case IntrinsicKind::curiosity: return "curiosity";
    case IntrinsicKind::rnd: return "rnd";
  }
  throw std::invalid_argument("intrinsic: unknown kind");
}

IntrinsicKind intrinsic_from_name(const std::string& name) {
  if (name == "info_gain") return IntrinsicKind::info_gain;
  if (name == "curiosity") return IntrinsicKind::curiosity;
  if (name == "rnd") return IntrinsicKind::rnd;
  throw std::invalid_argument("intrinsic: unknown kind '" + name + "'");
}

DynamicsEnsemble make_ensemble(int obs_dim, int action_dim, int members,
                               const std::vector<int>& hidden,
                               double sigma_noise, Rng& rng) {
  if (sigma_noise <= 0.0) {
    throw std::invalid_argument("intrinsic: sigma_noise must be > 0");
  }
  DynamicsEnsemble ens;
  ens.spec = member_spec(obs_dim, action_dim, hidden, obs_dim + 1);
  ens.params = init_members(ens.spec, members, rng);
  ens.opt.assign(members, make_adam_state(param_count(ens.spec)));
  ens.sigma_noise = sigma_noise;
  return ens;
}

Eigen::MatrixXd ensemble_input(const Eigen::MatrixXd& s,
                               const Eigen::MatrixXd& a) {
  Eigen::MatrixXd input(s.rows(), s.cols() + a.cols());
  input << s, a;
  return input;
}

Eigen::MatrixXd ensemble_target(const Batch& batch) {
  Eigen::MatrixXd target(batch.s.rows(), batch.s.cols() + 1);
  target.leftCols(batch.s.cols()) = batch.s_next - batch.s;
  target.rightCols(1) = batch.r;
  return target;
}

double train_ensemble(DynamicsEnsemble& ens, const Batch& batch, double lr) {
  if (batch.size() == 0) {
    throw std::invalid_argument("intrinsic: empty batch");
  }
  return train_members(ens, ensemble_input(batch.s, batch.a),
                       ensemble_target(batch), lr);
}

std::vector<Eigen::MatrixXd> member_predictions(const DynamicsEnsemble& ens,
                                                const Eigen::MatrixXd& s,
                                                const Eigen::MatrixXd& a) {
  Eigen::MatrixXd input = ensemble_input(s, a);
  std::vector<Eigen::MatrixXd> preds;
  preds.reserve(ens.params.size());
  for (const Eigen::VectorXd& p : ens.params) {
    preds.push_back(forward(ens.spec, p, input));
  }
  return preds;
}

Eigen::MatrixXd disagreement_batch(const DynamicsEnsemble& ens,
                                   const Eigen::MatrixXd& s,
                                   const Eigen::MatrixXd& a) {
  std::vector<Eigen::MatrixXd> preds = member_predictions(ens, s, a);
  double count = static_cast<double>(preds.size());
  // Running mean keeps identical members at exactly zero variance.
  Eigen::MatrixXd mean = preds[0];
  for (std::size_t i = 1; i < preds.size(); ++i) {
    mean += (preds[i] - mean) / static_cast<double>(i + 1);
  }
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
  for (const Eigen::MatrixXd& p : preds) {
    var.array() += (p - mean).array().square();
  }
  return var / count;
}

Eigen::VectorXd disagreement(const DynamicsEnsemble& ens,
                             const Eigen::VectorXd& s,
                             const Eigen::VectorXd& a) {
  Eigen::MatrixXd var =
      disagreement_batch(ens, s.transpose(), a.transpose());
  return var.row(0);
}

double info_gain_upper(const Eigen::VectorXd& var, double sigma_noise) {
  if (sigma_noise <= 0.0) {
    throw std::invalid_argument("intrinsic: sigma_noise must be > 0");
  }
  double sn2 = sigma_noise * sigma_noise;
  double total = 0.0;
  for (int j = 0; j < var.size(); ++j) {
    total += std::log1p(var(j) / sn2);
  }
  return total;
}

Eigen::VectorXd info_gain_upper_rows(const Eigen::MatrixXd& var,
                                     double sigma_noise) {
  Eigen::VectorXd out(var.rows());
  for (int b = 0; b < var.rows(); ++b) {
    out(b) = info_gain_upper(var.row(b), sigma_noise);
  }
  return out;
}

void RunningNormalizer::update(double value) {
  ++count;
  double delta = value - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (value - mean);
}

double RunningNormalizer::std() const {
  if (count == 0) return 0.0;
  return std::sqrt(m2 / static_cast<double>(count));
}

double normalize(RunningNormalizer& norm, double value) {
  norm.update(value);
  return value / (std::max(norm.std(), 1e-3) + 1e-8);
}

RndPair make_rnd(int obs_dim, int action_dim, int members,
                 const std::vector<int>& hidden, int target_dim,
                 double sigma_noise, Rng& rng) {
  if (target_dim < 1) {
    throw std::invalid_argument("intrinsic: target_dim must be >= 1");
  }
  RndPair rnd;
  rnd.target_spec = member_spec(obs_dim, action_dim, hidden, target_dim);
  rnd.target_params = init_params(rnd.target_spec, rng);
  rnd.predictor.spec = rnd.target_spec;
  rnd.predictor.params = init_members(rnd.predictor.spec, members, rng);
  rnd.predictor.opt.assign(members, make_adam_state(param_count(rnd.predictor.spec)));
  rnd.predictor.sigma_noise = sigma_noise;
  return rnd;
}

double train_rnd(RndPair& rnd, const Batch& batch, double lr) {
  if (batch.size() == 0) {
    throw std::invalid_argument("intrinsic: empty batch");
  }
  Eigen::MatrixXd input = ensemble_input(batch.s, batch.a);
  Eigen::MatrixXd target = forward(rnd.target_spec, rnd.target_params, input);
  return train_members(rnd.predictor, input, target, lr);
}

double intrinsic_reward(IntrinsicKind kind, const DynamicsEnsemble& ens,
                        const RndPair* rnd, const Eigen::VectorXd& s,
                        const Eigen::VectorXd& a, const Eigen::VectorXd& s_next,
                        double r) {
  switch (kind) {
    case IntrinsicKind::info_gain:
      return info_gain_upper(disagreement(ens, s, a), ens.sigma_noise);
    case IntrinsicKind::curiosity: {
      Eigen::VectorXd y(s.size() + 1);
      y.head(s.size()) = s_next - s;
      y(s.size()) = r;
      Eigen::MatrixXd input = ensemble_input(s.transpose(), a.transpose());
      double total = 0.0;
      for (const Eigen::VectorXd& p : ens.params) {
        Eigen::MatrixXd pred = forward(ens.spec, p, input);
        total += (pred.row(0).transpose() - y).squaredNorm() /
                 static_cast<double>(y.size());
      }
      return total / static_cast<double>(ens.params.size());
    }
    case IntrinsicKind::rnd: {
      if (rnd == nullptr) {
        throw std::invalid_argument("intrinsic: rnd kind needs an RndPair");
      }
      return info_gain_upper(disagreement(rnd->predictor, s, a),
                             rnd->predictor.sigma_noise);
    }
  }
  throw std::invalid_argument("intrinsic: unknown kind");
}

Eigen::VectorXd curiosity_rows(const DynamicsEnsemble& ens, const Batch& batch) {
  Eigen::MatrixXd input = ensemble_input(batch.s, batch.a);
  Eigen::MatrixXd target = ensemble_target(batch);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(batch.size());
  for (const Eigen::VectorXd& p : ens.params) {
    Eigen::MatrixXd diff = forward(ens.spec, p, input) - target;
    out += diff.array().square().matrix().rowwise().sum();
  }
  return out / (static_cast<double>(ens.params.size()) * target.cols());
}

double target_info_gain(const DynamicsEnsemble& ens,
                        const ActionSampler& target_policy,
                        const Eigen::VectorXd& s, int m, Rng& rng) {
  if (m < 1) {
    throw std::invalid_argument("intrinsic: sample count must be >= 1");
  }
  double mean = 0.0;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd a = target_policy(s, rng);
    double g = info_gain_upper(disagreement(ens, s, a), ens.sigma_noise);
    mean += (g - mean) / static_cast<double>(i + 1);
  }
  return mean;
}

}  // namespace maxinfo
