#pragma once

// Closed forms and a dense solver written independently of the library, used
// as reference values in the tests.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

/// M/M/1: mean number in system.
inline double mm1_mean_n(double rho) { return rho / (1.0 - rho); }

/// Erlang-C probability of waiting for M/M/k with offered load a = lambda/mu.
inline double erlang_c(int k, double a) {
  // Erlang-B by the stable recursion, then convert.
  double b = 1.0;
  for (int j = 1; j <= k; ++j) b = a * b / (j + a * b);
  const double rho = a / k;
  return b / (1.0 - rho * (1.0 - b));
}

/// M/M/k mean number in system.
inline double mmk_mean_n(int k, double lambda, double mu) {
  const double a = lambda / mu;
  const double rho = a / k;
  return erlang_c(k, a) * rho / (1.0 - rho) + a;
}

/// M/M/k stationary Pr(N >= n).
inline double mmk_tail(int k, double lambda, double mu, long n) {
  const double a = lambda / mu;
  const double rho = a / k;
  // p_j proportional to a^j/j! for j <= k and to a^k/k! rho^(j-k) beyond.
  double sum_head = 0.0;
  double term = 1.0;
  for (int j = 0; j < k; ++j) {
    sum_head += term;
    term *= a / (j + 1);
  }
  const double at_k = term;  // a^k/k!
  const double z = sum_head + at_k / (1.0 - rho);
  if (n <= 0) return 1.0;
  if (n >= k) return at_k * std::pow(rho, static_cast<double>(n - k)) / (1.0 - rho) / z;
  // Sum the tail itself; 1 - head/z cancels to zero once the tail is tiny.
  double tail = at_k / (1.0 - rho);
  term = 1.0;
  for (long j = 0; j < k; ++j) {
    if (j >= n) tail += term;
    term *= a / static_cast<double>(j + 1);
  }
  return tail / z;
}

/// Pollaczek-Khinchine mean number in an M/G/1 FCFS queue, from the first two
/// moments of the service time.
inline double pk_mean_n(double lambda, double es, double es2) {
  const double rho = lambda * es;
  return rho + lambda * lambda * es2 / (2.0 * (1.0 - rho));
}

/// Preemptive-resume priority M/M/1, classes given highest priority first.
/// Mean response time per class from the completion-time decomposition:
/// the class-i job sees the residual work of classes <= i and is interrupted by
/// classes < i.
inline std::vector<double> preemptive_priority_t(const std::vector<double>& lambda,
                                                 const std::vector<double>& service_rate) {
  std::vector<double> out;
  double sigma_prev = 0.0;
  double residual = 0.0;  // sum lambda_j E[S_j^2] / 2
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double es = 1.0 / service_rate[i];
    residual += lambda[i] * 2.0 * es * es / 2.0;
    const double sigma = sigma_prev + lambda[i] * es;
    out.push_back(es / (1.0 - sigma_prev) + residual / ((1.0 - sigma_prev) * (1.0 - sigma)));
    sigma_prev = sigma;
  }
  return out;
}

/// Stationary distribution of a small CTMC by dense Gaussian elimination with
/// partial pivoting; q(i, j) gives the i -> j rate for i != j.
inline std::vector<double> dense_stationary(std::size_t n, const std::function<double(std::size_t, std::size_t)>& q) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double out = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = q(i, j);
      m[j][i] += r;  // row j of Q^T
      out += r;
    }
    m[i][i] -= out;
  }
  for (std::size_t j = 0; j <= n; ++j) m[0][j] = 1.0;  // normalization replaces row 0
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    }
    if (std::abs(m[piv][col]) < 1e-300) throw std::runtime_error("singular");
    std::swap(m[piv], m[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = m[i][n] / m[i][i];
  return pi;
}

}  // namespace oracle
