#include "maxinfo/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace maxinfo {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LayerView {
  Eigen::Index w_offset = 0;
  Eigen::Index b_offset = 0;
  Eigen::Index in = 0;
  Eigen::Index out = 0;
};

std::vector<LayerView> layer_views(const MlpSpec& spec) {
  std::vector<LayerView> views;
  views.reserve(spec.layer_widths.size() - 1);
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
    LayerView v;
    v.in = spec.layer_widths[l];
    v.out = spec.layer_widths[l + 1];
    v.w_offset = offset;
    v.b_offset = offset + v.in * v.out;
    offset = v.b_offset + v.out;
    views.push_back(v);
  }
  return views;
}

void check_params(const MlpSpec& spec, const Eigen::VectorXd& params) {
  if (params.size() != param_count(spec))
    throw std::invalid_argument("mlp: parameter vector length mismatch");
}

// Activations of every layer, input included. Index l holds the input to
// layer l; back() is the network output.
std::vector<Eigen::MatrixXd> forward_trace(const MlpSpec& spec,
                                           const Eigen::VectorXd& params,
                                           const Eigen::MatrixXd& input) {
  const auto views = layer_views(spec);
  std::vector<Eigen::MatrixXd> h;
  h.reserve(views.size() + 1);
  h.push_back(input);
  for (std::size_t l = 0; l < views.size(); ++l) {
    const auto& v = views[l];
    Eigen::Map<const RowMat> w(params.data() + v.w_offset, v.out, v.in);
    Eigen::Map<const Eigen::VectorXd> b(params.data() + v.b_offset, v.out);
    Eigen::MatrixXd z = h.back() * w.transpose();
    z.rowwise() += b.transpose();
    const bool last = (l + 1 == views.size());
    if (last) {
      if (spec.output_activation == OutputActivation::tanh)
        z = z.array().tanh();
    } else if (spec.activation == Activation::relu) {
      z = z.cwiseMax(0.0);
    } else {
      z = z.array().tanh();
    }
    h.push_back(std::move(z));
  }
  return h;
}

}  // namespace

void validate_spec(const MlpSpec& spec) {
  if (spec.layer_widths.size() < 2)
    throw std::invalid_argument("mlp: spec needs at least 2 layers");
  for (int w : spec.layer_widths)
    if (w < 1) throw std::invalid_argument("mlp: layer widths must be >= 1");
}

Eigen::Index param_count(const MlpSpec& spec) {
  validate_spec(spec);
  Eigen::Index n = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
    const Eigen::Index in = spec.layer_widths[l];
    const Eigen::Index out = spec.layer_widths[l + 1];
    n += out * (in + 1);
  }
  return n;
}

Eigen::VectorXd init_params(const MlpSpec& spec, Rng& rng) {
  Eigen::VectorXd params(param_count(spec));
  for (const auto& v : layer_views(spec)) {
    const double r = std::sqrt(6.0 / static_cast<double>(v.in + v.out));
    for (Eigen::Index i = 0; i < v.in * v.out; ++i)
      params[v.w_offset + i] = uniform(rng, -r, r);
    params.segment(v.b_offset, v.out).setZero();
  }
  return params;
}

Eigen::MatrixXd forward(const MlpSpec& spec, const Eigen::VectorXd& params,
                        const Eigen::MatrixXd& input) {
  check_params(spec, params);
  if (input.cols() != spec.layer_widths.front())
    throw std::invalid_argument("mlp: input width mismatch");
  return forward_trace(spec, params, input).back();
}

Eigen::VectorXd forward(const MlpSpec& spec, const Eigen::VectorXd& params,
                        const Eigen::VectorXd& input) {
  return forward(spec, params, Eigen::MatrixXd(input.transpose()))
      .row(0)
      .transpose();
}

Gradients backward(const MlpSpec& spec, const Eigen::VectorXd& params,
                   const Eigen::MatrixXd& input,
                   const Eigen::MatrixXd& output_cotangent) {
  check_params(spec, params);
  if (input.cols() != spec.layer_widths.front())
    throw std::invalid_argument("mlp: input width mismatch");
  if (output_cotangent.rows() != input.rows() ||
      output_cotangent.cols() != spec.layer_widths.back())
    throw std::invalid_argument("mlp: cotangent shape mismatch");

  const auto views = layer_views(spec);
  const auto h = forward_trace(spec, params, input);

  Gradients g;
  g.params = Eigen::VectorXd::Zero(params.size());
  Eigen::MatrixXd dh = output_cotangent;
  for (std::size_t li = views.size(); li-- > 0;) {
    const auto& v = views[li];
    const bool last = (li + 1 == views.size());
    // Activation derivative recovered from the post-activation value.
    if (last) {
      if (spec.output_activation == OutputActivation::tanh)
        dh.array() *= 1.0 - h[li + 1].array().square();
    } else if (spec.activation == Activation::relu) {
      dh.array() *= (h[li + 1].array() > 0.0).cast<double>();
    } else {
      dh.array() *= 1.0 - h[li + 1].array().square();
    }
    Eigen::Map<RowMat> gw(g.params.data() + v.w_offset, v.out, v.in);
    Eigen::Map<Eigen::VectorXd> gb(g.params.data() + v.b_offset, v.out);
    gw.noalias() = dh.transpose() * h[li];
    gb = dh.colwise().sum().transpose();
    Eigen::Map<const RowMat> w(params.data() + v.w_offset, v.out, v.in);
    dh = dh * w;
  }
  g.input = std::move(dh);
  return g;
}

Eigen::VectorXd backward(const MlpSpec& spec, const Eigen::VectorXd& params,
                         const Eigen::VectorXd& input,
                         const Eigen::VectorXd& output_cotangent) {
  return backward(spec, params, Eigen::MatrixXd(input.transpose()),
                  Eigen::MatrixXd(output_cotangent.transpose()))
      .params;
}

AdamState make_adam_state(Eigen::Index n) {
  AdamState s;
  s.first_moment = Eigen::VectorXd::Zero(n);
  s.second_moment = Eigen::VectorXd::Zero(n);
  return s;
}

void adam_step(Eigen::VectorXd& params, AdamState& state,
               const Eigen::VectorXd& grad, double lr) {
  if (params.size() != grad.size() ||
      params.size() != state.first_moment.size())
    throw std::invalid_argument("adam: length mismatch");
  if (!grad.allFinite())
    throw std::invalid_argument("adam: non-finite gradient");
  if (!(lr > 0.0)) throw std::invalid_argument("adam: lr must be positive");

  state.step_count += 1;
  state.first_moment = state.beta1 * state.first_moment +
                       (1.0 - state.beta1) * grad;
  state.second_moment =
      state.beta2 * state.second_moment +
      (1.0 - state.beta2) * grad.array().square().matrix();
  const double c1 =
      1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double c2 =
      1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  params.array() -= lr * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + state.eps_num);
}

void polyak(Eigen::VectorXd& target, const Eigen::VectorXd& online,
            double tau) {
  if (target.size() != online.size())
    throw std::invalid_argument("polyak: length mismatch");
  if (tau < 0.0 || tau > 1.0)
    throw std::invalid_argument("polyak: tau outside [0,1]");
  target = tau * online + (1.0 - tau) * target;
}

}  // namespace maxinfo
