#pragma once

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace asyspcd {

// Separable convex regularizer g(x) = sum_i g_i(x_i), with the same g_i for
// every coordinate.
struct Regularizer {
  enum class Kind { Zero, L1, Box };

  Kind kind = Kind::Zero;
  double lambda = 0.0;  // L1 weight
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Regularizer zero() { return {}; }

  static Regularizer l1(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("L1 weight must be finite and >= 0");
    Regularizer r;
    r.kind = Kind::L1;
    r.lambda = lambda;
    return r;
  }

  static Regularizer box(double lo, double hi) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi)
      throw std::invalid_argument("box bounds must satisfy lo <= hi");
    Regularizer r;
    r.kind = Kind::Box;
    r.lo = lo;
    r.hi = hi;
    return r;
  }

  // g_i(u); +inf outside the box for indicators.
  double value(double u) const {
    switch (kind) {
      case Kind::Zero:
        return 0.0;
      case Kind::L1:
        return lambda * std::abs(u);
      case Kind::Box:
        return (u < lo || u > hi) ? std::numeric_limits<double>::infinity()
                                  : 0.0;
    }
    return 0.0;
  }

  friend bool operator==(const Regularizer&, const Regularizer&) = default;
};

// Soft-threshold. |v| == t maps to 0.
inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// argmin_u 1/2 (u - v)^2 + kappa * g_i(u)
inline double prox_coordinate(const Regularizer& reg, double v, double kappa) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("prox: kappa must be >= 0");
  switch (reg.kind) {
    case Regularizer::Kind::Zero:
      return v;
    case Regularizer::Kind::L1:
      return soft_threshold(v, kappa * reg.lambda);
    case Regularizer::Kind::Box:
      return std::clamp(v, reg.lo, reg.hi);
  }
  return v;
}

inline std::vector<double> prox_full(const Regularizer& reg,
                                     std::span<const double> y, double kappa) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("prox: kappa must be >= 0");
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = prox_coordinate(reg, y[i], kappa);
  return out;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty())
    throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

}  // namespace detail

// Header encoding used by the instance file: zero | l1:LAMBDA | box:LO:HI.
inline std::string format_regularizer(const Regularizer& reg) {
  switch (reg.kind) {
    case Regularizer::Kind::Zero:
      return "zero";
    case Regularizer::Kind::L1:
      return "l1:" + detail::format_double(reg.lambda);
    case Regularizer::Kind::Box:
      return "box:" + detail::format_double(reg.lo) + ":" +
             detail::format_double(reg.hi);
  }
  return "zero";
}

inline Regularizer parse_regularizer(const std::string& text) {
  if (text == "zero") return Regularizer::zero();
  if (text.rfind("l1:", 0) == 0)
    return Regularizer::l1(detail::parse_double(text.substr(3)));
  if (text.rfind("box:", 0) == 0) {
    const std::string rest = text.substr(4);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("box regularizer needs box:LO:HI");
    return Regularizer::box(detail::parse_double(rest.substr(0, colon)),
                            detail::parse_double(rest.substr(colon + 1)));
  }
  throw std::invalid_argument("unknown regularizer '" + text + "'");
}

}  // namespace asyspcd
