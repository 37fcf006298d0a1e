#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "maxinfo/mlp.hpp"
#include "maxinfo/replay.hpp"
#include "maxinfo/rng.hpp"

namespace maxinfo {

// Ensemble of deterministic networks mapping (s, a) to (s' - s, r).
struct DynamicsEnsemble {
  MlpSpec spec;
  std::vector<Eigen::VectorXd> params;
  std::vector<AdamState> opt;
  double sigma_noise = 1e-3;
};

enum class IntrinsicKind { info_gain, curiosity, rnd };

const char* intrinsic_name(IntrinsicKind kind);
IntrinsicKind intrinsic_from_name(const std::string& name);

DynamicsEnsemble make_ensemble(int obs_dim, int action_dim, int members,
                               const std::vector<int>& hidden,
                               double sigma_noise, Rng& rng);

// Side-by-side (s, a) rows and the regression target [(s' - s), r] rows.
Eigen::MatrixXd ensemble_input(const Eigen::MatrixXd& s, const Eigen::MatrixXd& a);
Eigen::MatrixXd ensemble_target(const Batch& batch);

// One Adam step per member on its own mean squared-norm error against the
// batch target; returns the loss averaged over members.
double train_ensemble(DynamicsEnsemble& ens, const Batch& batch, double lr);

std::vector<Eigen::MatrixXd> member_predictions(const DynamicsEnsemble& ens,
                                                const Eigen::MatrixXd& s,
                                                const Eigen::MatrixXd& a);

// Population variance of member predictions, per output dimension.
Eigen::VectorXd disagreement(const DynamicsEnsemble& ens,
                             const Eigen::VectorXd& s, const Eigen::VectorXd& a);
Eigen::MatrixXd disagreement_batch(const DynamicsEnsemble& ens,
                                   const Eigen::MatrixXd& s,
                                   const Eigen::MatrixXd& a);

// Information-gain upper bound: sum_j log(1 + var_j / sigma_noise^2).
double info_gain_upper(const Eigen::VectorXd& var, double sigma_noise);
Eigen::VectorXd info_gain_upper_rows(const Eigen::MatrixXd& var, double sigma_noise);

// Welford accumulator with population variance.
struct RunningNormalizer {
  long long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void update(double value);
  double std() const;
};

// Updates the accumulator with value, then divides by the floored std.
double normalize(RunningNormalizer& norm, double value);

// Frozen random target network plus a trained predictor ensemble.
struct RndPair {
  MlpSpec target_spec;
  Eigen::VectorXd target_params;
  DynamicsEnsemble predictor;
};

RndPair make_rnd(int obs_dim, int action_dim, int members,
                 const std::vector<int>& hidden, int target_dim,
                 double sigma_noise, Rng& rng);

double train_rnd(RndPair& rnd, const Batch& batch, double lr);

double intrinsic_reward(IntrinsicKind kind, const DynamicsEnsemble& ens,
                        const RndPair* rnd, const Eigen::VectorXd& s,
                        const Eigen::VectorXd& a, const Eigen::VectorXd& s_next,
                        double r);

// Batched curiosity: per-row mean over members of the per-dimension MSE.
Eigen::VectorXd curiosity_rows(const DynamicsEnsemble& ens, const Batch& batch);

using ActionSampler =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& s, Rng& rng)>;

// Monte-Carlo average of the info-gain bound over m target-policy actions.
double target_info_gain(const DynamicsEnsemble& ens,
                        const ActionSampler& target_policy,
                        const Eigen::VectorXd& s, int m, Rng& rng);

}  // namespace maxinfo
