#pragma once

#include <Eigen/Dense>

#include <vector>

#include "maxinfo/rng.hpp"

namespace maxinfo {

struct Transition {
  Eigen::VectorXd s;
  Eigen::VectorXd a;
  double r = 0.0;
  Eigen::VectorXd s_next;
  bool done = false;
};

// Row-per-sample views of a sampled minibatch.
struct Batch {
  Eigen::MatrixXd s;
  Eigen::MatrixXd a;
  Eigen::VectorXd r;
  Eigen::MatrixXd s_next;
  Eigen::VectorXd done;

  int size() const { return static_cast<int>(s.rows()); }
};

class ReplayBuffer {
 public:
  ReplayBuffer(int capacity, Rng rng);

  void push(const Transition& t);
  Batch sample(int batch_size);
  int size() const { return filled_; }
  int capacity() const { return capacity_; }

 private:
  std::vector<Transition> slots_;
  int capacity_;
  int cursor_ = 0;
  int filled_ = 0;
  Rng rng_;
};

}  // namespace maxinfo
