#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include "asyspcd/errors.hpp"
#include "asyspcd/problem.hpp"

namespace asyspcd {

// Step-size plan for asynchronous proximal coordinate descent.
//
// rho bounds the growth of the expected squared step between consecutive
// iterates; theta, theta_prime and psi are the derived geometric quantities
// and gamma is the steplength multiplier applied to 1/L_max.
enum class PlanSource { Theorem41, Corollary42, Manual };

inline const char* to_string(PlanSource s) {
  switch (s) {
    case PlanSource::Theorem41: return "Theorem41";
    case PlanSource::Corollary42: return "Corollary42";
    case PlanSource::Manual: return "Manual";
  }
  return "Manual";
}

struct StepPlan {
  std::size_t n = 0;
  double lambda_ratio = 1.0;
  double rho = 0.0;
  std::uint64_t tau = 0;
  double theta = 0.0;
  double theta_prime = 0.0;
  double psi = 1.0;
  double gamma = 0.0;
  double gamma_psi = 0.0;
  double gamma_rho = 0.0;
  bool feasible = false;
  PlanSource source = PlanSource::Manual;
};

struct GeometricConstants {
  double theta = 0.0;        // sum_{t=1}^{tau} rho^{t/2}
  double theta_prime = 0.0;  // sum_{t=1}^{tau} rho^t
};

struct GammaBounds {
  double gamma_psi = 0.0;
  double gamma_rho = 0.0;

  double limit() const noexcept { return std::min(gamma_psi, gamma_rho); }
};

inline GeometricConstants geometric_constants(double rho, std::uint64_t tau) {
  if (!(rho > 1.0)) throw std::invalid_argument("rho must be > 1");
  const double t = static_cast<double>(tau);
  const double sr = std::sqrt(rho);
  return {(std::pow(rho, (t + 1.0) / 2.0) - sr) / (sr - 1.0),
          (std::pow(rho, t + 1.0) - rho) / (rho - 1.0)};
}

inline double psi_value(double rho, std::uint64_t tau, std::size_t n,
                        double lambda_ratio) {
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  if (!(lambda_ratio >= 1.0))
    throw std::invalid_argument("lambda ratio must be >= 1");
  const auto g = geometric_constants(rho, tau);
  const double dn = static_cast<double>(n);
  return 1.0 + static_cast<double>(tau) * g.theta_prime / dn +
         2.0 * lambda_ratio * g.theta / std::sqrt(dn);
}

// gamma_rho <= 0 signals that n is too small for this rho; no exception.
inline GammaBounds gamma_bounds(double rho, std::uint64_t tau, std::size_t n,
                                double lambda_ratio) {
  const auto g = geometric_constants(rho, tau);
  const double sn = std::sqrt(static_cast<double>(n));
  return {1.0 / psi_value(rho, tau, n, lambda_ratio),
          (sn * (1.0 - 1.0 / rho) - 4.0) / (4.0 * (1.0 + g.theta) * lambda_ratio)};
}

inline double delay_bound_lhs(std::uint64_t tau, double lambda_ratio) {
  const double t1 = static_cast<double>(tau) + 1.0;
  return 4.0 * std::numbers::e * lambda_ratio * t1 * t1;
}

// 4 e Lambda (tau+1)^2 <= sqrt(n), compared without slack.
inline bool check_delay_bound(std::size_t n, std::uint64_t tau,
                              double lambda_ratio) {
  return delay_bound_lhs(tau, lambda_ratio) <=
         std::sqrt(static_cast<double>(n));
}

namespace detail {

inline void fill_plan(StepPlan& plan) {
  const auto g = geometric_constants(plan.rho, plan.tau);
  plan.theta = g.theta;
  plan.theta_prime = g.theta_prime;
  plan.psi = psi_value(plan.rho, plan.tau, plan.n, plan.lambda_ratio);
  const auto b = gamma_bounds(plan.rho, plan.tau, plan.n, plan.lambda_ratio);
  plan.gamma_psi = b.gamma_psi;
  plan.gamma_rho = b.gamma_rho;
  const double rho_floor = 1.0 + 4.0 / std::sqrt(static_cast<double>(plan.n));
  plan.feasible = plan.rho > rho_floor && plan.gamma > 0.0 &&
                  plan.gamma <= b.gamma_psi && plan.gamma <= b.gamma_rho;
}

}  // namespace detail

// rho = (1 + 4 e Lambda (tau+1) / sqrt(n))^2 with gamma = 1/2.
inline StepPlan corollary_plan(std::size_t n, std::uint64_t tau,
                               double lambda_ratio) {
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  if (!(lambda_ratio >= 1.0))
    throw std::invalid_argument("lambda ratio must be >= 1");
  const double sn = std::sqrt(static_cast<double>(n));
  if (!check_delay_bound(n, tau, lambda_ratio))
    throw DelayBoundViolated(delay_bound_lhs(tau, lambda_ratio), sn);

  StepPlan plan;
  plan.n = n;
  plan.lambda_ratio = lambda_ratio;
  plan.tau = tau;
  const double a = 1.0 + 4.0 * std::numbers::e * lambda_ratio *
                             (static_cast<double>(tau) + 1.0) / sn;
  plan.rho = a * a;
  plan.gamma = 0.5;
  plan.source = PlanSource::Corollary42;
  detail::fill_plan(plan);

  const double growth = std::pow(plan.rho, (static_cast<double>(tau) + 1.0) / 2.0);
  if (growth > std::numbers::e * (1.0 + 1e-12) || plan.psi > 2.0 ||
      !plan.feasible)
    throw std::logic_error("corollary plan failed its own guarantees");
  return plan;
}

// User-chosen rho and gamma; feasibility is computed, not required.
inline StepPlan manual_plan(std::size_t n, std::uint64_t tau,
                            double lambda_ratio, double rho, double gamma) {
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  if (!(lambda_ratio >= 1.0))
    throw std::invalid_argument("lambda ratio must be >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  StepPlan plan;
  plan.n = n;
  plan.lambda_ratio = lambda_ratio;
  plan.tau = tau;
  plan.rho = rho;
  plan.gamma = gamma;
  plan.source = PlanSource::Manual;
  detail::fill_plan(plan);
  return plan;
}

// Same as manual_plan but requires rho > 1 + 4/sqrt(n).
inline StepPlan theorem_plan(std::size_t n, std::uint64_t tau,
                             double lambda_ratio, double rho, double gamma) {
  if (!(rho > 1.0 + 4.0 / std::sqrt(static_cast<double>(n))))
    throw std::invalid_argument("rho must exceed 1 + 4/sqrt(n)");
  StepPlan plan = manual_plan(n, tau, lambda_ratio, rho, gamma);
  plan.source = PlanSource::Theorem41;
  return plan;
}

// Per-iteration contraction of the expected composite potential.
inline double linear_rate_factor(std::size_t n, double l, double l_max,
                                 double gamma) {
  const double lg = l * gamma;
  return 1.0 - lg / (static_cast<double>(n) * (lg + l_max));
}

inline double sublinear_bound(std::size_t n, double l_max, double gamma,
                              double d0_sq, double f0_gap, double j) {
  const double dn = static_cast<double>(n);
  return dn * (d0_sq * l_max + 2.0 * gamma * f0_gap) / (2.0 * gamma * (dn + j));
}

enum class RateMode { LinearOSC, SublinearConvex };

inline const char* to_string(RateMode m) {
  return m == RateMode::LinearOSC ? "osc" : "convex";
}

// Iterations after which P(F(x_j) - F* <= epsilon) >= 1 - eta, with gamma = 1/2.
inline std::uint64_t high_prob_iterations(RateMode mode, std::size_t n, double l,
                                          double l_max, double d0_sq,
                                          double f0_gap, double epsilon,
                                          double eta) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("eta must lie in (0, 1)");
  const double dn = static_cast<double>(n);
  const double s0 = l_max * d0_sq + f0_gap;
  double j = 0.0;
  if (mode == RateMode::LinearOSC) {
    if (!(l > 0.0))
      throw std::invalid_argument("linear mode requires l > 0");
    j = dn * (l + 2.0 * l_max) / l * std::abs(std::log(s0 / (epsilon * eta)));
  } else {
    j = dn * s0 / (epsilon * eta) - dn;
  }
  if (!(j > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::ceil(j));
}

// ||x - x*||^2 + (2 gamma / L_max)(F(x) - F*)
inline double composite_potential(std::span<const double> x,
                                  std::span<const double> x_star, double f_star,
                                  double gamma, double l_max,
                                  const CompositeProblem& problem) {
  detail::require_dim(problem, x);
  detail::require_dim(problem, x_star);
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = x[i] - x_star[i];
    d += e * e;
  }
  return d + 2.0 * gamma / l_max * (evaluate_objective(problem, x) - f_star);
}

// Predicted envelope for E[potential] (LinearOSC) or E[F - F*] (convex).
struct RateEnvelope {
  RateMode mode = RateMode::SublinearConvex;
  std::size_t n = 1;
  double l = 0.0;
  double l_max = 1.0;
  double gamma = 0.5;
  double d0_sq = 0.0;
  double f0_gap = 0.0;

  double factor() const { return linear_rate_factor(n, l, l_max, gamma); }

  double initial_potential() const {
    return d0_sq + 2.0 * gamma / l_max * f0_gap;
  }

  double bound(double j) const {
    if (mode == RateMode::LinearOSC)
      return initial_potential() * std::pow(factor(), j);
    return sublinear_bound(n, l_max, gamma, d0_sq, f0_gap, j);
  }
};

}  // namespace asyspcd
