#include "maxinfo/replay.hpp"

#include <stdexcept>

namespace maxinfo {

ReplayBuffer::ReplayBuffer(int capacity, Rng rng)
    : capacity_(capacity), rng_(rng) {
  if (capacity < 1) {
    throw std::invalid_argument("replay: capacity must be >= 1");
  }
  slots_.resize(capacity);
}

void ReplayBuffer::push(const Transition& t) {
  slots_[cursor_] = t;
  cursor_ = (cursor_ + 1) % capacity_;
  if (filled_ < capacity_) ++filled_;
}

Batch ReplayBuffer::sample(int batch_size) {
  if (filled_ == 0) {
    throw std::logic_error("replay: cannot sample from an empty buffer");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("replay: batch_size must be >= 1");
  }
  int ds = static_cast<int>(slots_[0].s.size());
  int da = static_cast<int>(slots_[0].a.size());
  Batch batch;
  batch.s.resize(batch_size, ds);
  batch.a.resize(batch_size, da);
  batch.r.resize(batch_size);
  batch.s_next.resize(batch_size, ds);
  batch.done.resize(batch_size);
  for (int b = 0; b < batch_size; ++b) {
    const Transition& t = slots_[uniform_int(rng_, 0, filled_ - 1)];
    batch.s.row(b) = t.s;
    batch.a.row(b) = t.a;
    batch.r(b) = t.r;
    batch.s_next.row(b) = t.s_next;
    batch.done(b) = t.done ? 1.0 : 0.0;
  }
  return batch;
}

}  // namespace maxinfo
