#pragma once

#include <algorithm>
#include <atomic>
#include <barrier>
#include <bit>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "asyspcd/errors.hpp"
#include "asyspcd/problem.hpp"
#include "asyspcd/serial.hpp"

namespace asyspcd {

static_assert(std::atomic<std::uint64_t>::is_always_lock_free,
              "component cells require lock-free 64-bit atomics");

// Lock-free shared iterate. Each component is an individually atomic 64-bit
// cell holding the bit pattern of a double; there is no ordering between
// different components. The update counter counts completed component writes.
class SharedIterate {
 public:
  static constexpr std::size_t kNoOwner = std::numeric_limits<std::size_t>::max();

  explicit SharedIterate(std::span<const double> init)
      : n_(init.size()),
        cells_(std::make_unique<std::atomic<std::uint64_t>[]>(init.size())) {
    for (std::size_t i = 0; i < n_; ++i)
      cells_[i].store(std::bit_cast<std::uint64_t>(init[i]),
                      std::memory_order_relaxed);
  }

  std::size_t size() const noexcept { return n_; }

  double load(std::size_t i) const noexcept {
    return std::bit_cast<double>(cells_[i].load(std::memory_order_relaxed));
  }

  void store(std::size_t i, double v) noexcept {
    cells_[i].store(std::bit_cast<std::uint64_t>(v), std::memory_order_relaxed);
  }

  std::uint64_t counter() const noexcept {
    return counter_.load(std::memory_order_acquire);
  }

  // Returns the post-increment value.
  std::uint64_t bump() noexcept {
    return counter_.fetch_add(1, std::memory_order_acq_rel) + 1;
  }

  // Debug-only ownership table: owner[i] is the worker allowed to write i.
  void set_owners(std::vector<std::size_t> owner) { owner_ = std::move(owner); }

  bool may_write(std::size_t i, std::size_t worker) const noexcept {
    return worker == kNoOwner || owner_.empty() || owner_[i] == worker;
  }

 private:
  std::size_t n_;
  std::unique_ptr<std::atomic<std::uint64_t>[]> cells_;
  alignas(64) std::atomic<std::uint64_t> counter_{0};
  std::vector<std::size_t> owner_;
};

struct Snapshot {
  std::vector<double> x;
  std::uint64_t counter_before = 0;
};

// Reads the counter, then every component in index order without locking.
// With concurrent writers the result may mix versions.
inline std::uint64_t snapshot_read_into(const SharedIterate& shared,
                                        std::span<double> out) {
  const std::uint64_t before = shared.counter();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = shared.load(i);
  return before;
}

inline Snapshot snapshot_read(const SharedIterate& shared) {
  Snapshot s;
  s.x.resize(shared.size());
  s.counter_before = snapshot_read_into(shared, s.x);
  return s;
}

// Stores the value, then bumps the counter. Returns the post-increment count.
inline std::uint64_t apply_update(SharedIterate& shared, std::size_t i,
                                  double value,
                                  std::size_t worker = SharedIterate::kNoOwner) {
  assert(i < shared.size());
  assert(shared.may_write(i, worker) && "coordinate written by a non-owner");
  (void)worker;
  shared.store(i, value);
  return shared.bump();
}

// Contiguous ownership slices of ceil(n / threads) coordinates; the last one
// may be short (or empty when threads does not divide evenly).
struct Slice {
  std::size_t begin = 0;
  std::size_t end = 0;
};

inline std::vector<Slice> partition_slices(std::size_t n, std::size_t threads) {
  if (threads == 0 || threads > n)
    throw std::invalid_argument("thread count must lie in [1, n]");
  const std::size_t block = (n + threads - 1) / threads;
  std::vector<Slice> slices(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    slices[w].begin = std::min(n, w * block);
    slices[w].end = std::min(n, (w + 1) * block);
  }
  return slices;
}

struct AsyncOptions {
  // Staleness above this is flagged on the record; 0 means 8 * threads.
  std::uint64_t tau_cap = 0;
  EpochObserver observer;
};

// Lock-free asynchronous proximal coordinate descent. Workers own contiguous
// coordinate slices, sweep them in a fresh random order each epoch, and meet
// only at epoch barriers where the objective is recorded.
inline RunRecord solve_async(const CompositeProblem& p,
                             std::span<const double> x0, double gamma,
                             std::size_t epochs, std::size_t threads,
                             std::uint64_t seed, const AsyncOptions& opts = {}) {
  detail::require_dim(p, x0);
  detail::check_gamma(gamma);
  const std::size_t n = p.dim();
  const auto slices = partition_slices(n, threads);
  const double step = gamma / compute_lipschitz_info(p).l_max;
  const auto c = p.linear();
  const Regularizer reg = p.regularizer();

  RunRecord rec;
  rec.seed = seed;
  rec.threads = threads;
  rec.gamma = gamma;
  rec.sampling = Sampling::ShuffledEpochs;
  rec.tau_cap = opts.tau_cap ? opts.tau_cap : 8 * threads;

  SharedIterate shared(x0);
#ifndef NDEBUG
  {
    std::vector<std::size_t> owner(n);
    for (std::size_t w = 0; w < threads; ++w)
      for (std::size_t i = slices[w].begin; i < slices[w].end; ++i) owner[i] = w;
    shared.set_owners(std::move(owner));
  }
#endif

  using clock = std::chrono::steady_clock;
  clock::time_point start;
  double barrier_total = 0.0;
  std::size_t completed = 0;
  bool stop = false;
  std::size_t diverged_at = 0;
  std::exception_ptr observer_error;
  std::vector<double> quiescent(n);
  bool started = false;

  // Runs on one thread while all others wait: memory is quiescent here.
  auto on_epoch = [&]() noexcept {
    const auto b0 = clock::now();
    if (!started) {
      started = true;
      start = b0;
      return;
    }
    ++completed;
    rec.epoch_wall_seconds.push_back(
        std::chrono::duration<double>(b0 - start).count() - barrier_total);
    snapshot_read_into(shared, quiescent);
    double f = std::numeric_limits<double>::quiet_NaN();
    try {
      f = evaluate_objective(p, quiescent);
      if (std::isfinite(f) && opts.observer) opts.observer(completed, quiescent);
    } catch (...) {
      observer_error = std::current_exception();
      stop = true;
    }
    if (!std::isfinite(f)) {
      diverged_at = completed;
      stop = true;
    } else {
      rec.objective_by_epoch.push_back(f);
      rec.epochs_run = completed;
    }
    barrier_total += std::chrono::duration<double>(clock::now() - b0).count();
  };

  std::barrier sync(static_cast<std::ptrdiff_t>(threads), on_epoch);
  std::vector<std::uint64_t> staleness(threads, 0);

  auto worker = [&](std::size_t w) {
    IndexStream stream(seed, w, slices[w].begin, slices[w].end);
    std::uint64_t worst = 0;
    sync.arrive_and_wait();
    for (std::size_t e = 0; e < epochs && !stop; ++e) {
      for (std::size_t i : stream.next_epoch()) {
        // Inconsistent read of x fused with the row dot product: components
        // are loaded once each, in index order, exactly as a snapshot would.
        const std::uint64_t before = shared.counter();
        const auto row = p.row(i);
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += row[k] * shared.load(k);
        const double grad = dot - c[i];
        const double next =
            detail::coordinate_update(reg, shared.load(i), grad, step);
        const std::uint64_t after = apply_update(shared, i, next, w);
        worst = std::max(worst, after - 1 - before);
      }
      sync.arrive_and_wait();
    }
    staleness[w] = worst;
  };

  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(worker, w);
  worker(0);
  pool.clear();

  if (observer_error) std::rethrow_exception(observer_error);
  if (diverged_at) throw Diverged(diverged_at);

  rec.final_x.resize(n);
  snapshot_read_into(shared, rec.final_x);
  rec.observed_tau = *std::max_element(staleness.begin(), staleness.end());
  rec.staleness_flagged = rec.observed_tau > rec.tau_cap;
  rec.barrier_seconds = barrier_total;
  rec.wall_seconds =
      rec.epoch_wall_seconds.empty() ? 0.0 : rec.epoch_wall_seconds.back();
  return rec;
}

}  // namespace asyspcd
