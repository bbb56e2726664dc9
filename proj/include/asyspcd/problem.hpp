#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "asyspcd/errors.hpp"
#include "asyspcd/prox.hpp"

namespace asyspcd {

// F(x) = 1/2 x'Qx - c'x + constant + g(x), Q dense row-major.
//
// Immutable after construction, so one instance can be shared by every
// worker thread without synchronization.
class CompositeProblem {
 public:
  CompositeProblem(std::size_t n, std::vector<double> q, std::vector<double> c,
                   double constant, Regularizer reg)
      : n_(n),
        q_(std::move(q)),
        c_(std::move(c)),
        constant_(constant),
        reg_(reg) {
    validate();
  }

  std::size_t dim() const noexcept { return n_; }
  const Regularizer& regularizer() const noexcept { return reg_; }
  double constant() const noexcept { return constant_; }
  std::span<const double> linear() const noexcept { return c_; }
  std::span<const double> matrix() const noexcept { return q_; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {q_.data() + i * n_, n_};
  }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    return q_[i * n_ + j];
  }

 private:
  void validate() const {
    if (n_ == 0) throw std::invalid_argument("problem dimension must be > 0");
    if (q_.size() != n_ * n_)
      throw std::invalid_argument("Q must hold n*n entries");
    if (c_.size() != n_) throw std::invalid_argument("c must hold n entries");
    if (!std::isfinite(constant_))
      throw std::invalid_argument("constant must be finite");
    for (double v : q_)
      if (!std::isfinite(v)) throw std::invalid_argument("Q has non-finite entry");
    for (double v : c_)
      if (!std::isfinite(v)) throw std::invalid_argument("c has non-finite entry");
    for (std::size_t i = 0; i < n_; ++i) {
      if (q_[i * n_ + i] < 0.0)
        throw std::invalid_argument("Q has a negative diagonal entry at " +
                                    std::to_string(i));
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double a = q_[i * n_ + j];
        const double b = q_[j * n_ + i];
        if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b)))
          throw std::invalid_argument("Q is not symmetric at (" +
                                      std::to_string(i) + "," +
                                      std::to_string(j) + ")");
      }
    }
  }

  std::size_t n_;
  std::vector<double> q_;
  std::vector<double> c_;
  double constant_;
  Regularizer reg_;
};

struct LipschitzInfo {
  double l_max = 0.0;
  double l_res = 0.0;
  double lambda_ratio = 0.0;  // l_res / l_max
};

namespace detail {

inline void require_dim(const CompositeProblem& p, std::span<const double> x) {
  if (x.size() != p.dim())
    throw std::invalid_argument("vector has length " + std::to_string(x.size()) +
                                ", problem dimension is " +
                                std::to_string(p.dim()));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace detail

inline double smooth_value(const CompositeProblem& p, std::span<const double> x) {
  detail::require_dim(p, x);
  const auto c = p.linear();
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    quad += x[i] * detail::dot(p.row(i), x);
    lin += c[i] * x[i];
  }
  return 0.5 * quad - lin + p.constant();
}

inline double regularizer_value(const Regularizer& reg,
                                std::span<const double> x) {
  double s = 0.0;
  for (double v : x) {
    const double g = reg.value(v);
    if (std::isinf(g)) return g;
    s += g;
  }
  return s;
}

// +inf when x leaves the feasible set of a box regularizer.
inline double evaluate_objective(const CompositeProblem& p,
                                 std::span<const double> x) {
  const double g = regularizer_value(p.regularizer(), x);
  if (std::isinf(g)) return g;
  return smooth_value(p, x) + g;
}

// Q_i. snapshot - c_i
inline double gradient_coordinate(const CompositeProblem& p,
                                  std::span<const double> snapshot,
                                  std::size_t i) {
  detail::require_dim(p, snapshot);
  if (i >= p.dim())
    throw std::out_of_range("coordinate " + std::to_string(i) +
                            " out of range for n = " + std::to_string(p.dim()));
  return detail::dot(p.row(i), snapshot) - p.linear()[i];
}

inline std::vector<double> full_gradient(const CompositeProblem& p,
                                         std::span<const double> x) {
  detail::require_dim(p, x);
  std::vector<double> g(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i)
    g[i] = detail::dot(p.row(i), x) - p.linear()[i];
  return g;
}

inline LipschitzInfo compute_lipschitz_info(const CompositeProblem& p) {
  const std::size_t n = p.dim();
  double l_max = 0.0;
  std::vector<double> col_sq(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = p.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      l_max = std::max(l_max, std::abs(r[j]));
      col_sq[j] += r[j] * r[j];
    }
  }
  if (l_max == 0.0)
    throw std::invalid_argument("Q is zero: steplengths are undefined");
  double l_res = 0.0;
  for (double s : col_sq) l_res = std::max(l_res, std::sqrt(s));
  return {l_max, l_res, l_res / l_max};
}

// A-priori Lambda for Q = A'A with A an m x n standard Gaussian matrix.
inline double gaussian_lambda_estimate(std::size_t m, std::size_t n) {
  if (m == 0 || n == 0)
    throw std::invalid_argument("m and n must be positive");
  return 1.0 + std::sqrt(static_cast<double>(n) / static_cast<double>(m));
}

// Smallest eigenvalue of Q for the strongly convex quadratic case.
inline double osc_parameter_quadratic(const CompositeProblem& p) {
  if (p.regularizer().kind == Regularizer::Kind::L1)
    throw OscUnavailable(
        "OSC modulus unavailable: only zero or box regularizers are supported");
  const auto n = static_cast<Eigen::Index>(p.dim());
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
      q(p.matrix().data(), n, n);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      q, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw OscUnavailable("OSC modulus unavailable: eigen solver failed");
  const double l = eig.eigenvalues().minCoeff();
  const double l_max = compute_lipschitz_info(p).l_max;
  if (l <= 1e-10 * l_max)
    throw OscUnavailable("OSC modulus unavailable: Q is singular to tolerance");
  return l;
}

}  // namespace asyspcd
