#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "maxinfo/rng.hpp"

namespace maxinfo {

enum class Activation { relu, tanh };
enum class OutputActivation { none, tanh };

/// Fully connected network shape. layer_widths includes the input and
/// output widths, so a (256, 256) policy body for 3 inputs and 2 outputs
/// is {3, 256, 256, 2}.
struct MlpSpec {
  std::vector<int> layer_widths;
  Activation activation = Activation::relu;
  OutputActivation output_activation = OutputActivation::none;
};

/// Flat parameter count. Parameters are ordered layer by layer, each
/// layer storing its weight matrix row-major followed by its bias.
Eigen::Index param_count(const MlpSpec& spec);

void validate_spec(const MlpSpec& spec);

/// Uniform in +-sqrt(6/(fan_in+fan_out)) per layer, zero biases.
Eigen::VectorXd init_params(const MlpSpec& spec, Rng& rng);

/// Batched evaluation, one sample per row.
Eigen::MatrixXd forward(const MlpSpec& spec, const Eigen::VectorXd& params,
                        const Eigen::MatrixXd& input);
Eigen::VectorXd forward(const MlpSpec& spec, const Eigen::VectorXd& params,
                        const Eigen::VectorXd& input);

struct Gradients {
  Eigen::VectorXd params;
  Eigen::MatrixXd input;
};

/// Reverse accumulation for loss = sum over rows of <cotangent, output>.
/// Returns both the parameter gradient and the input gradient.
Gradients backward(const MlpSpec& spec, const Eigen::VectorXd& params,
                   const Eigen::MatrixXd& input,
                   const Eigen::MatrixXd& output_cotangent);
Eigen::VectorXd backward(const MlpSpec& spec, const Eigen::VectorXd& params,
                         const Eigen::VectorXd& input,
                         const Eigen::VectorXd& output_cotangent);

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  std::int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_num = 1e-8;
};

AdamState make_adam_state(Eigen::Index n);

/// Bias-corrected adaptive-moment descent step, in place.
void adam_step(Eigen::VectorXd& params, AdamState& state,
               const Eigen::VectorXd& grad, double lr);

/// target <- tau * online + (1 - tau) * target, element-wise.
void polyak(Eigen::VectorXd& target, const Eigen::VectorXd& online, double tau);

}  // namespace maxinfo
