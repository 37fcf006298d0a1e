#pragma once

#include <Eigen/Dense>

#include <vector>

#include "maxinfo/rng.hpp"

namespace maxinfo {

enum class KernelKind { rbf };

struct Kernel {
  KernelKind kind = KernelKind::rbf;
  double lengthscale = 0.08;
};

double kernel_eval(const Kernel& kernel, double a, double b);
Eigen::VectorXd kernel_row(const Kernel& kernel, const Eigen::VectorXd& xs,
                           double b);

// points uniformly spaced on [0, 1], endpoints included.
Eigen::VectorXd uniform_grid(int points);

struct GpPosterior {
  Eigen::VectorXd X, y;
  double noise_var = 0.0;
  Eigen::MatrixXd L;  // lower factor of K(X, X) + noise_var I
};

GpPosterior gp_fit(const Eigen::VectorXd& X, const Eigen::VectorXd& y,
                   const Kernel& kernel, double noise_var);

struct GpPrediction {
  Eigen::VectorXd mean, var;
};

GpPrediction gp_predict(const GpPosterior& post, const Kernel& kernel,
                        const Eigen::VectorXd& query);

// Rank-growing refit over a fixed query grid: each observation appends one
// row to the factor and updates the grid posterior in O(n * grid) time.
struct IncrementalGp {
  Kernel kernel;
  double noise_var = 0.0;
  Eigen::VectorXd grid;
  int count = 0;
  Eigen::VectorXd X, y, z;        // z = L^{-1} y
  Eigen::MatrixXd L, W;           // W = L^{-1} K(X, grid)
  Eigen::VectorXd mean_acc;       // W^T z, maintained incrementally
  Eigen::VectorXd var_acc;        // 1 - column squared norms of W
};

IncrementalGp make_incremental_gp(const Kernel& kernel, double noise_var,
                                  const Eigen::VectorXd& grid);
void gp_observe(IncrementalGp& gp, double x, double value);
GpPrediction gp_grid_posterior(const IncrementalGp& gp);

// t^(2 alpha - 1) for t >= 1 and alpha in (1/4, 1/2); equals 1 at t = 1.
double eps_schedule(long long t, double alpha);

struct Selection {
  int index = 0;
  double theta = 0.0;
  bool explored = false;
};

// With probability eps_t pick the most uncertain grid point, otherwise the
// highest posterior mean; ties go to the lowest index.
Selection eps_greedy_select(const GpPrediction& pred,
                            const Eigen::VectorXd& grid, long long t,
                            double alpha, Rng& rng);
Selection eps_greedy_select(const GpPosterior& post, const Kernel& kernel,
                            const Eigen::VectorXd& grid, long long t,
                            double alpha, Rng& rng);

struct RegretTrace {
  Eigen::VectorXd instant, cumulative;
  std::vector<int> arm;
  std::vector<bool> explored;
};

RegretTrace run_bandit(const Eigen::VectorXd& objective_on_grid,
                       long long horizon, double alpha, double noise_var,
                       const Kernel& kernel, std::uint64_t seed);

// 0.8 k(theta, 0.23) + 0.6 k(theta, 0.61) - 0.4 k(theta, 0.85).
Eigen::VectorXd standard_objective(const Kernel& kernel,
                                   const Eigen::VectorXd& grid);

}  // namespace maxinfo
