#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asyspcd/problem.hpp"
#include "asyspcd/prox.hpp"

namespace asyspcd {

// Synthetic l2-l1 instance: A is m x n standard normal, x_true has s nonzeros
// drawn from N(0, 1), b = A x_true + noise with noise ~ N(0, sigma^2).
struct InstanceSpec {
  enum class LambdaRule { Scaled, Explicit };  // Scaled: 20 sqrt(m ln n) sigma

  std::size_t m = 600;
  std::size_t n = 1000;
  std::size_t s = 10;
  double sigma = 0.01;
  std::uint64_t seed = 7;
  LambdaRule lambda_rule = LambdaRule::Scaled;
  double lambda_value = 0.0;  // used by LambdaRule::Explicit
  std::uint64_t max_bytes = std::uint64_t{4} << 30;

  static InstanceSpec desk() { return {}; }
  static InstanceSpec n10k() { return {6000, 10000, 10, 0.01, 7}; }
  static InstanceSpec n20k() { return {12000, 20000, 20, 0.01, 7}; }
};

struct GeneratedInstance {
  CompositeProblem problem;
  std::vector<double> x_true;
  double lambda = 0.0;
};

inline double scaled_lambda(std::size_t m, std::size_t n, double sigma) {
  return 20.0 * std::sqrt(static_cast<double>(m) * std::log(static_cast<double>(n))) *
         sigma;
}

// Peak bytes held while generating: A, Q, and the vectors.
inline std::uint64_t instance_bytes(std::size_t m, std::size_t n) {
  const std::uint64_t mm = m;
  const std::uint64_t nn = n;
  return 8 * (mm * nn + nn * nn + 2 * mm + 3 * nn);
}

inline std::vector<std::size_t> support_of(std::span<const double> x,
                                           double threshold = 0.0) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > threshold) out.push_back(i);
  return out;
}

inline GeneratedInstance generate_instance(const InstanceSpec& spec) {
  if (spec.m == 0 || spec.n == 0)
    throw std::invalid_argument("instance needs m >= 1 and n >= 1");
  if (spec.s > spec.n) throw std::invalid_argument("support size s exceeds n");
  if (!(spec.sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (const auto need = instance_bytes(spec.m, spec.n); need > spec.max_bytes)
    throw std::invalid_argument("instance needs " + std::to_string(need) +
                                " bytes, limit is " +
                                std::to_string(spec.max_bytes));

  const auto m = static_cast<Eigen::Index>(spec.m);
  const auto n = static_cast<Eigen::Index>(spec.n);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd a(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) a(i, j) = normal(rng);

  std::vector<std::size_t> idx(spec.n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(spec.s);
  std::sort(idx.begin(), idx.end());
  std::vector<double> x_true(spec.n, 0.0);
  for (std::size_t i : idx) x_true[i] = normal(rng);

  const Eigen::Map<const Eigen::VectorXd> xt(x_true.data(), n);
  Eigen::VectorXd b = a * xt;
  if (spec.sigma > 0.0)
    for (Eigen::Index i = 0; i < m; ++i) b[i] += spec.sigma * normal(rng);

  // Q = A'A formed in place, then mirrored so it is exactly symmetric.
  std::vector<double> q(spec.n * spec.n, 0.0);
  Eigen::Map<Eigen::MatrixXd> qm(q.data(), n, n);
  qm.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) qm(j, i) = qm(i, j);

  std::vector<double> c(spec.n);
  Eigen::Map<Eigen::VectorXd>(c.data(), n) = a.transpose() * b;
  const double constant = 0.5 * b.squaredNorm();

  const double lambda = spec.lambda_rule == InstanceSpec::LambdaRule::Scaled
                            ? scaled_lambda(spec.m, spec.n, spec.sigma)
                            : spec.lambda_value;
  return {CompositeProblem(spec.n, std::move(q), std::move(c), constant,
                           Regularizer::l1(lambda)),
          std::move(x_true), lambda};
}

// Instance file (v1):
//   ASYSPCD1 n=<int> reg=<zero|l1:LAMBDA|box:LO:HI> const=<float>\n
// followed by n*n little-endian doubles (Q row-major) and n doubles (c).
namespace detail {

inline void put_le(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
  out.write(bytes, 8);
}

inline double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= std::uint64_t{p[k]} << (8 * k);
  return std::bit_cast<double>(bits);
}

}  // namespace detail

inline std::string instance_header(const CompositeProblem& p) {
  return "ASYSPCD1 n=" + std::to_string(p.dim()) +
         " reg=" + format_regularizer(p.regularizer()) +
         " const=" + detail::format_double(p.constant()) + "\n";
}

inline void write_instance(const std::string& path, const CompositeProblem& p) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << instance_header(p);
  for (double v : p.matrix()) detail::put_le(out, v);
  for (double v : p.linear()) detail::put_le(out, v);
  out.flush();
  if (!out) throw std::runtime_error(path + ": write failed");
}

inline CompositeProblem read_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error(path + ": missing header line");

  std::istringstream tokens(header);
  std::string magic, n_tok, reg_tok, const_tok, extra;
  tokens >> magic >> n_tok >> reg_tok >> const_tok;
  if (magic != "ASYSPCD1" || n_tok.rfind("n=", 0) != 0 ||
      reg_tok.rfind("reg=", 0) != 0 || const_tok.rfind("const=", 0) != 0 ||
      (tokens >> extra))
    throw std::runtime_error(path + ": malformed header '" + header + "'");

  std::size_t n = 0;
  Regularizer reg;
  double constant = 0.0;
  try {
    const std::string digits = n_tok.substr(2);
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad n");
    n = std::stoull(digits);
    reg = parse_regularizer(reg_tok.substr(4));
    constant = detail::parse_double(const_tok.substr(6));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": malformed header: " + e.what());
  }
  if (n == 0) throw std::runtime_error(path + ": n must be positive");

  const std::size_t count = n * n + n;
  std::vector<unsigned char> raw(count * 8);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw std::runtime_error(path + ": truncated payload");
  if (in.peek() != std::char_traits<char>::eof())
    throw std::runtime_error(path + ": trailing bytes after payload");

  std::vector<double> q(n * n);
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n * n; ++k) q[k] = detail::get_le(&raw[8 * k]);
  for (std::size_t k = 0; k < n; ++k) c[k] = detail::get_le(&raw[8 * (n * n + k)]);
  try {
    return CompositeProblem(n, std::move(q), std::move(c), constant, reg);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace asyspcd
