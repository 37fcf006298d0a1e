#include "maxinfo/bandit.hpp"

#include <cmath>
#include <stdexcept>

namespace maxinfo {

double kernel_eval(const Kernel& kernel, double a, double b) {
  if (kernel.lengthscale <= 0.0) {
    throw std::invalid_argument("bandit: lengthscale must be > 0");
  }
  double d = a - b;
  return std::exp(-d * d / (2.0 * kernel.lengthscale * kernel.lengthscale));
}

Eigen::VectorXd kernel_row(const Kernel& kernel, const Eigen::VectorXd& xs,
                           double b) {
  Eigen::VectorXd out(xs.size());
  for (int i = 0; i < xs.size(); ++i) out(i) = kernel_eval(kernel, xs(i), b);
  return out;
}

Eigen::VectorXd uniform_grid(int points) {
  if (points < 2) throw std::invalid_argument("bandit: grid needs >= 2 points");
  Eigen::VectorXd grid(points);
  for (int i = 0; i < points; ++i) {
    grid(i) = static_cast<double>(i) / (points - 1);
  }
  return grid;
}

GpPosterior gp_fit(const Eigen::VectorXd& X, const Eigen::VectorXd& y,
                   const Kernel& kernel, double noise_var) {
  if (noise_var <= 0.0) {
    throw std::invalid_argument("bandit: noise variance must be > 0");
  }
  if (X.size() != y.size()) {
    throw std::invalid_argument("bandit: X and y sizes disagree");
  }
  GpPosterior post;
  post.X = X;
  post.y = y;
  post.noise_var = noise_var;
  int n = static_cast<int>(X.size());
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = kernel_eval(kernel, X(i), X(j));
    A(i, i) += noise_var;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (n > 0 && llt.info() != Eigen::Success) {
    throw std::runtime_error("bandit: factorization failed");
  }
  post.L = llt.matrixL();
  return post;
}

GpPrediction gp_predict(const GpPosterior& post, const Kernel& kernel,
                        const Eigen::VectorXd& query) {
  int n = static_cast<int>(post.X.size());
  int m = static_cast<int>(query.size());
  GpPrediction pred;
  pred.mean = Eigen::VectorXd::Zero(m);
  pred.var = Eigen::VectorXd::Ones(m);
  if (n == 0) return pred;
  auto lower = post.L.triangularView<Eigen::Lower>();
  Eigen::VectorXd z = lower.solve(post.y);
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd l = lower.solve(kernel_row(kernel, post.X, query(j)));
    pred.mean(j) = l.dot(z);
    pred.var(j) = std::max(1.0 - l.squaredNorm(), 0.0);
  }
  return pred;
}

IncrementalGp make_incremental_gp(const Kernel& kernel, double noise_var,
                                  const Eigen::VectorXd& grid) {
  if (noise_var <= 0.0) {
    throw std::invalid_argument("bandit: noise variance must be > 0");
  }
  if (grid.size() < 1) throw std::invalid_argument("bandit: empty grid");
  IncrementalGp gp;
  gp.kernel = kernel;
  gp.noise_var = noise_var;
  gp.grid = grid;
  gp.mean_acc = Eigen::VectorXd::Zero(grid.size());
  gp.var_acc = Eigen::VectorXd::Ones(grid.size());
  return gp;
}

namespace {

void reserve_one_more(IncrementalGp& gp) {
  int cap = static_cast<int>(gp.L.rows());
  if (gp.count < cap) return;
  int next = std::max(2 * cap, 64);
  gp.L.conservativeResize(next, next);
  gp.W.conservativeResize(next, gp.grid.size());
  gp.X.conservativeResize(next);
  gp.y.conservativeResize(next);
  gp.z.conservativeResize(next);
}

}  // namespace

void gp_observe(IncrementalGp& gp, double x, double value) {
  reserve_one_more(gp);
  int n = gp.count;
  Eigen::VectorXd l(n);
  if (n > 0) {
    Eigen::VectorXd kx = kernel_row(gp.kernel, gp.X.head(n), x);
    l = gp.L.topLeftCorner(n, n).triangularView<Eigen::Lower>().solve(kx);
  }
  double lam2 = 1.0 + gp.noise_var - l.squaredNorm();
  if (lam2 <= 0.0) throw std::runtime_error("bandit: factorization failed");
  double lam = std::sqrt(lam2);

  gp.L.row(n).head(n) = l.transpose();
  gp.L(n, n) = lam;
  Eigen::RowVectorXd w =
      (kernel_row(gp.kernel, gp.grid, x).transpose() -
       l.transpose() * gp.W.topRows(n)) /
      lam;
  gp.W.row(n) = w;
  double zn = (value - l.dot(gp.z.head(n))) / lam;
  gp.z(n) = zn;
  gp.X(n) = x;
  gp.y(n) = value;
  gp.mean_acc += zn * w.transpose();
  gp.var_acc -= w.cwiseProduct(w).transpose();
  ++gp.count;
}

GpPrediction gp_grid_posterior(const IncrementalGp& gp) {
  GpPrediction pred;
  pred.mean = gp.mean_acc;
  pred.var = gp.var_acc.cwiseMax(0.0);
  return pred;
}

double eps_schedule(long long t, double alpha) {
  if (t < 1) throw std::invalid_argument("bandit: rounds start at t = 1");
  if (alpha <= 0.25 || alpha >= 0.5) {
    throw std::invalid_argument("bandit: alpha must lie in (1/4, 1/2)");
  }
  return std::pow(static_cast<double>(t), 2.0 * alpha - 1.0);
}

namespace {

int lowest_argmax(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

}  // namespace

Selection eps_greedy_select(const GpPrediction& pred,
                            const Eigen::VectorXd& grid, long long t,
                            double alpha, Rng& rng) {
  double eps = eps_schedule(t, alpha);
  Selection sel;
  sel.explored = uniform(rng, 0.0, 1.0) < eps;
  sel.index = lowest_argmax(sel.explored ? pred.var : pred.mean);
  sel.theta = grid(sel.index);
  return sel;
}

Selection eps_greedy_select(const GpPosterior& post, const Kernel& kernel,
                            const Eigen::VectorXd& grid, long long t,
                            double alpha, Rng& rng) {
  return eps_greedy_select(gp_predict(post, kernel, grid), grid, t, alpha, rng);
}

RegretTrace run_bandit(const Eigen::VectorXd& objective_on_grid,
                       long long horizon, double alpha, double noise_var,
                       const Kernel& kernel, std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("bandit: horizon must be >= 1");
  Eigen::VectorXd grid =
      uniform_grid(static_cast<int>(objective_on_grid.size()));
  double jmax = objective_on_grid.maxCoeff();
  double sigma = std::sqrt(noise_var);

  RegretTrace trace;
  trace.instant.resize(horizon);
  trace.cumulative.resize(horizon);
  trace.arm.reserve(horizon);
  trace.explored.reserve(horizon);

  Rng rng = make_rng(seed, 0);
  IncrementalGp gp = make_incremental_gp(kernel, noise_var, grid);
  double running = 0.0;
  for (long long t = 1; t <= horizon; ++t) {
    Selection sel = eps_greedy_select(gp_grid_posterior(gp), grid, t, alpha, rng);
    double observed = objective_on_grid(sel.index) + sigma * normal(rng);
    gp_observe(gp, sel.theta, observed);
    double regret = jmax - objective_on_grid(sel.index);
    trace.instant(t - 1) = regret;
    running += regret;
    trace.cumulative(t - 1) = running;
    trace.arm.push_back(sel.index);
    trace.explored.push_back(sel.explored);
  }
  return trace;
}

Eigen::VectorXd standard_objective(const Kernel& kernel,
                                   const Eigen::VectorXd& grid) {
  Eigen::VectorXd j(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    j(i) = 0.8 * kernel_eval(kernel, grid(i), 0.23) +
           0.6 * kernel_eval(kernel, grid(i), 0.61) -
           0.4 * kernel_eval(kernel, grid(i), 0.85);
  }
  return j;
}

}  // namespace maxinfo
