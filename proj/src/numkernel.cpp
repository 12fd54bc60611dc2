#include "precipgen/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace precipgen::numkernel {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // ln(2*pi)/2
constexpr double kAsymptoticThreshold = 8.0;
}  // namespace

double digamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("digamma: requires x > 0");
  double acc = 0.0;
  while (x < kAsymptoticThreshold) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum_n B_{2n} / (2n x^{2n})
  const double inv = 1.0 / x;
  const double t = inv * inv;
  const double series =
      t * (1.0 / 12.0 -
           t * (1.0 / 120.0 -
                t * (1.0 / 252.0 -
                     t * (1.0 / 240.0 -
                          t * (1.0 / 132.0 - t * (691.0 / 32760.0 - t * (1.0 / 12.0)))))));
  return std::log(x) - 0.5 * inv - series + acc;
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("log_gamma: requires x > 0");
  double acc = 0.0;
  while (x < kAsymptoticThreshold) {
    acc -= std::log(x);
    x += 1.0;
  }
  // Stirling: (x - 1/2) ln x - x + ln(2 pi)/2 + sum_n B_{2n} / (2n(2n-1) x^{2n-1})
  const double inv = 1.0 / x;
  const double t = inv * inv;
  const double series =
      inv * (1.0 / 12.0 -
             t * (1.0 / 360.0 -
                  t * (1.0 / 1260.0 -
                       t * (1.0 / 1680.0 -
                            t * (1.0 / 1188.0 - t * (691.0 / 360360.0 - t * (1.0 / 156.0)))))));
  return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + series + acc;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  double vmax = -std::numeric_limits<double>::infinity();
  for (double x : v) vmax = std::max(vmax, x);
  if (!std::isfinite(vmax)) return vmax;  // all -inf (or a stray +inf/NaN propagates)
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - vmax);
  return vmax + std::log(sum);
}

double log_sum_exp2(double a, double b) {
  if (a < b) std::swap(a, b);
  if (!std::isfinite(a)) return a;
  return a + std::log1p(std::exp(b - a));
}

double kl_dirichlet(std::span<const double> q, std::span<const double> p) {
  if (q.empty() || q.size() != p.size())
    throw std::invalid_argument("kl_dirichlet: length mismatch or empty input");
  double q_total = 0.0, p_total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] > 0.0) || !(p[i] > 0.0))
      throw std::invalid_argument("kl_dirichlet: parameters must be > 0");
    q_total += q[i];
    p_total += p[i];
  }
  const double psi_total = digamma(q_total);
  double kl = log_gamma(q_total) - log_gamma(p_total);
  for (std::size_t i = 0; i < q.size(); ++i) {
    kl -= log_gamma(q[i]) - log_gamma(p[i]);
    kl += (q[i] - p[i]) * (digamma(q[i]) - psi_total);
  }
  return std::max(kl, 0.0);
}

double kl_gamma(double shape_q, double rate_q, double shape_p, double rate_p) {
  if (!(shape_q > 0.0) || !(rate_q > 0.0) || !(shape_p > 0.0) || !(rate_p > 0.0))
    throw std::invalid_argument("kl_gamma: parameters must be > 0");
  const double kl = (shape_q - shape_p) * digamma(shape_q) - log_gamma(shape_q) +
                    log_gamma(shape_p) + shape_p * (std::log(rate_q) - std::log(rate_p)) +
                    shape_q * (rate_p - rate_q) / rate_q;
  return std::max(kl, 0.0);
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 64) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace precipgen::numkernel
