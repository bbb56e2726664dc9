#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asyspcd/errors.hpp"
#include "asyspcd/problem.hpp"
#include "asyspcd/prox.hpp"

namespace asyspcd {

enum class Sampling { WithReplacement, ShuffledEpochs };

inline const char* to_string(Sampling s) {
  return s == Sampling::WithReplacement ? "with_replacement" : "shuffled_epochs";
}

inline Sampling parse_sampling(const std::string& s) {
  if (s == "with_replacement") return Sampling::WithReplacement;
  if (s == "shuffled_epochs") return Sampling::ShuffledEpochs;
  throw std::invalid_argument("unknown sampling '" + s + "'");
}

// Trajectory of one solver run.
struct RunRecord {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  double gamma = 0.0;
  std::size_t epochs_run = 0;
  std::vector<double> objective_by_epoch;  // F after each epoch
  std::vector<double> final_x;
  double wall_seconds = 0.0;  // worker loop only
  std::uint64_t observed_tau = 0;
  Sampling sampling = Sampling::ShuffledEpochs;

  // Cumulative worker-loop seconds at the end of each epoch.
  std::vector<double> epoch_wall_seconds;
  // Time spent at epoch barriers (objective evaluation), not in wall_seconds.
  double barrier_seconds = 0.0;
  std::uint64_t tau_cap = 0;
  bool staleness_flagged = false;
  // ||x_epoch - x*||^2, filled only when a reference solution is known.
  std::vector<double> dist_sq_by_epoch;
};

// Called after each completed epoch (1-based) with a quiescent iterate.
using EpochObserver = std::function<void(std::size_t, std::span<const double>)>;

// Per-worker coordinate order over the slice [begin, end). Worker 0 over the
// full range reproduces the serial solver's order.
class IndexStream {
 public:
  IndexStream(std::uint64_t seed, std::size_t worker, std::size_t begin,
              std::size_t end)
      : engine_(make_seed(seed, worker)), order_(end - begin), begin_(begin) {
    std::iota(order_.begin(), order_.end(), begin);
  }

  // Fresh uniform permutation of the slice.
  std::span<const std::size_t> next_epoch() {
    std::shuffle(order_.begin(), order_.end(), engine_);
    return order_;
  }

  std::size_t draw() {
    std::uniform_int_distribution<std::size_t> pick(begin_,
                                                    begin_ + order_.size() - 1);
    return pick(engine_);
  }

 private:
  static std::mt19937_64 make_seed(std::uint64_t seed, std::size_t worker) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(worker)};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
  std::vector<std::size_t> order_;
  std::size_t begin_;
};

namespace detail {

// prox_i(x_i - step * grad_i, step) from a gradient already in hand.
inline double coordinate_update(const Regularizer& reg, double xi, double grad,
                                double step) {
  return prox_coordinate(reg, xi - step * grad, step);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

inline void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("gamma must be finite and > 0");
}

}  // namespace detail

// One proximal coordinate step on coordinate i using the current x.
inline std::vector<double> spcd_step(const CompositeProblem& p,
                                     std::span<const double> x, std::size_t i,
                                     double gamma, double l_max) {
  detail::check_gamma(gamma);
  const double step = gamma / l_max;
  std::vector<double> out(x.begin(), x.end());
  out[i] = detail::coordinate_update(p.regularizer(), x[i],
                                     gradient_coordinate(p, x, i), step);
  return out;
}

inline std::vector<double> spcd_step(const CompositeProblem& p,
                                     std::span<const double> x, std::size_t i,
                                     double gamma) {
  return spcd_step(p, x, i, gamma, compute_lipschitz_info(p).l_max);
}

// Full proximal-gradient step with steplength gamma / L_max.
inline std::vector<double> expected_step(const CompositeProblem& p,
                                         std::span<const double> x,
                                         double gamma, double l_max) {
  detail::check_gamma(gamma);
  const double step = gamma / l_max;
  const auto g = full_gradient(p, x);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - step * g[i];
  return prox_full(p.regularizer(), y, step);
}

inline std::vector<double> expected_step(const CompositeProblem& p,
                                         std::span<const double> x,
                                         double gamma) {
  return expected_step(p, x, gamma, compute_lipschitz_info(p).l_max);
}

inline RunRecord solve_serial(const CompositeProblem& p,
                              std::span<const double> x0, double gamma,
                              std::size_t epochs, std::uint64_t seed,
                              Sampling sampling,
                              const EpochObserver& observer = {}) {
  detail::require_dim(p, x0);
  detail::check_gamma(gamma);
  const std::size_t n = p.dim();
  const double step = gamma / compute_lipschitz_info(p).l_max;
  const auto c = p.linear();
  const Regularizer reg = p.regularizer();

  RunRecord rec;
  rec.seed = seed;
  rec.threads = 1;
  rec.gamma = gamma;
  rec.sampling = sampling;
  rec.final_x.assign(x0.begin(), x0.end());
  std::span<double> x(rec.final_x);

  IndexStream stream(seed, 0, 0, n);
  auto update = [&](std::size_t i) {
    const double grad = detail::dot(p.row(i), x) - c[i];
    x[i] = detail::coordinate_update(reg, x[i], grad, step);
  };

  double loop_seconds = 0.0;
  for (std::size_t e = 0; e < epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    if (sampling == Sampling::ShuffledEpochs) {
      for (std::size_t i : stream.next_epoch()) update(i);
    } else {
      for (std::size_t k = 0; k < n; ++k) update(stream.draw());
    }
    loop_seconds += detail::seconds_since(t0);

    const auto b0 = std::chrono::steady_clock::now();
    const double f = evaluate_objective(p, x);
    if (!std::isfinite(f)) throw Diverged(e + 1);
    rec.objective_by_epoch.push_back(f);
    rec.epoch_wall_seconds.push_back(loop_seconds);
    ++rec.epochs_run;
    if (observer) observer(e + 1, x);
    rec.barrier_seconds += detail::seconds_since(b0);
  }
  rec.wall_seconds = loop_seconds;
  return rec;
}

struct OracleResult {
  std::vector<double> x_star;
  double f_star = 0.0;
  std::size_t iterations = 0;
  double lipschitz = 0.0;  // global L used for the step 1/L
};

namespace detail {

using RowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// 50 power-iteration steps with a fixed start, inflated by 5% and capped by
// the always-valid bound sqrt(n) * L_res.
inline double global_lipschitz_estimate(const CompositeProblem& p) {
  const auto n = static_cast<Eigen::Index>(p.dim());
  const RowMajorMap q(p.matrix().data(), n, n);
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd w = q * v;
    est = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) break;
    v = w / norm;
  }
  const double cap =
      std::sqrt(static_cast<double>(p.dim())) * compute_lipschitz_info(p).l_res;
  return std::min(1.05 * est, cap) > 0.0 ? std::min(1.05 * est, cap) : cap;
}

}  // namespace detail

// Reference minimizer by full proximal gradient with step 1/L. Independent of
// the coordinate-descent code paths it is used to check.
inline OracleResult solve_oracle(const CompositeProblem& p, double tol,
                                 std::size_t max_iterations = 10'000'000) {
  if (!(tol > 0.0)) throw std::invalid_argument("oracle tolerance must be > 0");
  const auto n = static_cast<Eigen::Index>(p.dim());
  const detail::RowMajorMap q(p.matrix().data(), n, n);
  const Eigen::Map<const Eigen::VectorXd> c(p.linear().data(), n);
  const Regularizer reg = p.regularizer();

  OracleResult out;
  out.lipschitz = detail::global_lipschitz_estimate(p);
  const double step = 1.0 / out.lipschitz;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd next(n);
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    next = x - step * (q * x - c);
    double change = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      next[i] = prox_coordinate(reg, next[i], step);
      change = std::max(change, std::abs(next[i] - x[i]));
    }
    x.swap(next);
    if (change <= tol) {
      out.iterations = it;
      out.x_star.assign(x.data(), x.data() + n);
      out.f_star = evaluate_objective(p, out.x_star);
      return out;
    }
    if (!std::isfinite(change))
      throw NoConvergence("oracle diverged at iteration " + std::to_string(it));
  }
  throw NoConvergence("oracle did not converge within " +
                      std::to_string(max_iterations) + " iterations");
}

}  // namespace asyspcd
