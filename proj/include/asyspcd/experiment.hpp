#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "asyspcd/async.hpp"
#include "asyspcd/instance.hpp"
#include "asyspcd/problem.hpp"
#include "asyspcd/serial.hpp"

namespace asyspcd {

struct SpeedupRow {
  std::size_t threads = 1;
  double wall_seconds = 0.0;  // median over seeds
  double speedup = 1.0;       // vs the 1-thread median
};

struct RunFailure {
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  std::string message;
};

struct ExperimentReport {
  std::string instance_digest;
  std::optional<InstanceSpec> spec;
  std::size_t n = 0;
  double l_max = 0.0;
  double lambda_ratio = 1.0;
  double f_star = 0.0;
  double f0 = 0.0;     // F(x0), x0 = 0
  double d0_sq = 0.0;  // ||x0 - x*||^2
  std::vector<RunRecord> runs;
  std::vector<RunFailure> failures;
  std::vector<SpeedupRow> speedup_table;
  // threads -> per-epoch median objective over seeds
  std::map<std::size_t, std::vector<double>> epoch_curves;
  std::optional<bool> support_recovered;
};

struct ExperimentConfig {
  std::vector<std::size_t> thread_counts{1};
  double gamma = 1.0;
  std::size_t epochs = 50;
  std::vector<std::uint64_t> seeds{1};
  double oracle_tol = 1e-10;
  bool run_oracle = true;
};

// FNV-1a over n, the header encoding, and the raw bytes of Q and c.
inline std::string problem_digest(const CompositeProblem& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int k = 0; k < 8; ++k) {
      h ^= (word >> (8 * k)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (char ch : instance_header(p)) mix(static_cast<unsigned char>(ch));
  for (double v : p.matrix()) mix(std::bit_cast<std::uint64_t>(v));
  for (double v : p.linear()) mix(std::bit_cast<std::uint64_t>(v));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Fills speedup_table and epoch_curves from report.runs.
inline void summarize(ExperimentReport& report) {
  std::map<std::size_t, std::vector<const RunRecord*>> by_threads;
  for (const auto& r : report.runs) by_threads[r.threads].push_back(&r);

  report.epoch_curves.clear();
  report.speedup_table.clear();
  std::map<std::size_t, double> wall;
  for (const auto& [t, runs] : by_threads) {
    std::vector<double> w;
    std::size_t epochs = runs.front()->objective_by_epoch.size();
    for (const auto* r : runs) {
      w.push_back(r->wall_seconds);
      epochs = std::min(epochs, r->objective_by_epoch.size());
    }
    wall[t] = median(w);
    std::vector<double> curve(epochs);
    for (std::size_t e = 0; e < epochs; ++e) {
      std::vector<double> at;
      for (const auto* r : runs) at.push_back(r->objective_by_epoch[e]);
      curve[e] = median(at);
    }
    report.epoch_curves[t] = std::move(curve);
  }
  const auto base = wall.find(1);
  if (base == wall.end()) return;
  for (const auto& [t, w] : wall) {
    double s = 1.0;
    if (t != 1) s = w > 0.0 ? base->second / w : 0.0;
    report.speedup_table.push_back({t, w, s});
  }
}

// Runs every (threads, seed) cell on one problem from x0 = 0. Run errors are
// recorded per cell; the experiment continues.
inline ExperimentReport run_experiment(
    const CompositeProblem& problem, const ExperimentConfig& cfg,
    std::optional<std::span<const double>> x_true = std::nullopt) {
  for (std::size_t t : cfg.thread_counts)
    if (t == 0) throw std::invalid_argument("thread counts must be >= 1");

  ExperimentReport report;
  report.instance_digest = problem_digest(problem);
  report.n = problem.dim();
  const auto lip = compute_lipschitz_info(problem);
  report.l_max = lip.l_max;
  report.lambda_ratio = lip.lambda_ratio;

  const std::vector<double> x0(problem.dim(), 0.0);
  report.f0 = evaluate_objective(problem, x0);

  std::vector<double> x_star;
  if (cfg.run_oracle) {
    auto oracle = solve_oracle(problem, cfg.oracle_tol);
    x_star = std::move(oracle.x_star);
    report.f_star = oracle.f_star;
    report.d0_sq = squared_distance(x0, x_star);
  }

  for (std::size_t t : cfg.thread_counts) {
    for (std::uint64_t seed : cfg.seeds) {
      std::vector<double> dist;
      AsyncOptions opts;
      if (!x_star.empty())
        opts.observer = [&](std::size_t, std::span<const double> x) {
          dist.push_back(squared_distance(x, x_star));
        };
      try {
        auto rec = solve_async(problem, x0, cfg.gamma, cfg.epochs, t, seed, opts);
        rec.dist_sq_by_epoch = std::move(dist);
        report.runs.push_back(std::move(rec));
      } catch (const std::exception& e) {
        report.failures.push_back({t, seed, e.what()});
      }
    }
  }
  summarize(report);

  if (x_true && !report.runs.empty()) {
    const auto best = std::min_element(
        report.runs.begin(), report.runs.end(), [](const auto& a, const auto& b) {
          const double fa = a.objective_by_epoch.empty()
                                ? INFINITY
                                : a.objective_by_epoch.back();
          const double fb = b.objective_by_epoch.empty()
                                ? INFINITY
                                : b.objective_by_epoch.back();
          return fa < fb;
        });
    const double lambda = problem.regularizer().kind == Regularizer::Kind::L1
                              ? problem.regularizer().lambda
                              : 0.0;
    const double threshold = 1e-6 * lambda / lip.l_max;
    report.support_recovered =
        support_of(best->final_x, threshold) == support_of(*x_true);
  }
  return report;
}

inline ExperimentReport run_experiment(const InstanceSpec& spec,
                                       const ExperimentConfig& cfg) {
  const auto inst = generate_instance(spec);
  auto report = run_experiment(inst.problem, cfg,
                               std::span<const double>(inst.x_true));
  report.spec = spec;
  return report;
}

}  // namespace asyspcd
