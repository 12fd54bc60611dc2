#include "precipgen/forward_backward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "precipgen/errors.hpp"

namespace precipgen {

namespace {

// exp of the starred transition parameters; strictly positive.
Matrix exp_matrix(const Matrix& logm) {
  Matrix out(logm.rows, logm.cols);
  for (std::size_t i = 0; i < logm.v.size(); ++i) out.v[i] = std::exp(logm.v[i]);
  return out;
}

double row_max(const double* p, std::size_t n) {
  double m = p[0];
  for (std::size_t i = 1; i < n; ++i)
    if (p[i] > m) m = p[i];
  return m;
}

}  // namespace

ForwardResult forward(const EmissionScores& scores, const ExpectedParams& params) {
  const Matrix& logb = scores.log_b_star;
  const auto T = logb.rows;
  const auto K = static_cast<std::size_t>(params.K);
  if (logb.cols != K) throw std::invalid_argument("forward: score/state count mismatch");
  if (T == 0) throw std::invalid_argument("forward: empty chain");

  ForwardResult r;
  r.f_tilde = Matrix(T, K);
  r.log_c.resize(T);

  const Matrix a_star = exp_matrix(params.log_a_star);
  std::vector<double> a1_star(K);
  for (std::size_t j = 0; j < K; ++j) a1_star[j] = std::exp(params.log_a1_star[j]);

  std::vector<double> bhat(K);
  for (std::size_t t = 0; t < T; ++t) {
    const double* lb = logb.row(t);
    const double shift = row_max(lb, K);
    for (std::size_t j = 0; j < K; ++j) bhat[j] = std::exp(lb[j] - shift);

    double* f = r.f_tilde.row(t);
    double total = 0.0;
    if (t == 0) {
      for (std::size_t j = 0; j < K; ++j) {
        f[j] = a1_star[j] * bhat[j];
        total += f[j];
      }
    } else {
      const double* fprev = r.f_tilde.row(t - 1);
      for (std::size_t k = 0; k < K; ++k) {
        double pred = 0.0;
        for (std::size_t j = 0; j < K; ++j) pred += fprev[j] * a_star(j, k);
        f[k] = pred * bhat[k];
        total += f[k];
      }
    }
    if (!(total > 0.0) || !std::isfinite(total))
      throw DegeneracyError("forward pass degenerate: all states have zero weight at time index " +
                            std::to_string(t));
    const double inv = 1.0 / total;
    for (std::size_t j = 0; j < K; ++j) f[j] *= inv;
    // True scaling factor c_t = 1 / sum_j F_tj with F = exp(shift) * Fhat.
    r.log_c[t] = -(shift + std::log(total));
    r.log_lik -= r.log_c[t];
  }
  return r;
}

Matrix backward(const EmissionScores& scores, const ExpectedParams& params,
                const std::vector<double>& log_c) {
  const Matrix& logb = scores.log_b_star;
  const auto T = logb.rows;
  const auto K = static_cast<std::size_t>(params.K);
  if (logb.cols != K) throw std::invalid_argument("backward: score/state count mismatch");
  if (log_c.size() != T) throw std::invalid_argument("backward: log_c length mismatch");
  if (T == 0) throw std::invalid_argument("backward: empty chain");

  const Matrix a_star = exp_matrix(params.log_a_star);
  Matrix b_tilde(T, K);

  // Shifted-space scaling factor chat_t = exp(log_c[t] + shift_t) = 1/S_t is
  // O(1) even when the raw c_t would overflow.
  const double shift_last = row_max(logb.row(T - 1), K);
  const double chat_last = std::exp(log_c[T - 1] + shift_last);
  for (std::size_t j = 0; j < K; ++j) b_tilde(T - 1, j) = chat_last;

  std::vector<double> bhat_next(K);
  for (std::size_t t = T - 1; t-- > 0;) {
    const double* lb_next = logb.row(t + 1);
    const double shift_next = row_max(lb_next, K);
    for (std::size_t k = 0; k < K; ++k) bhat_next[k] = std::exp(lb_next[k] - shift_next);

    const double shift = row_max(logb.row(t), K);
    const double chat = std::exp(log_c[t] + shift);
    for (std::size_t j = 0; j < K; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k)
        acc += a_star(j, k) * bhat_next[k] * b_tilde(t + 1, k);
      b_tilde(t, j) = chat * acc;
    }
  }
  return b_tilde;
}

LatentMarginals marginals(const Matrix& f_tilde, const Matrix& b_tilde,
                          const EmissionScores& scores, const ExpectedParams& params) {
  const auto T = f_tilde.rows;
  const auto K = static_cast<std::size_t>(params.K);
  if (!f_tilde.same_shape(b_tilde) || f_tilde.cols != K ||
      !scores.log_b_star.same_shape(f_tilde))
    throw std::invalid_argument("marginals: shape mismatch");
  if (T == 0) throw std::invalid_argument("marginals: empty chain");

  const Matrix a_star = exp_matrix(params.log_a_star);
  LatentMarginals m;
  m.q_t = Matrix(T, K);
  m.q_trans = Matrix(K, K);
  m.q1.assign(K, 0.0);

  for (std::size_t t = 0; t < T; ++t) {
    double total = 0.0;
    double* q = m.q_t.row(t);
    for (std::size_t j = 0; j < K; ++j) {
      q[j] = f_tilde(t, j) * b_tilde(t, j);
      total += q[j];
    }
    if (!(total > 0.0) || !std::isfinite(total))
      throw DegeneracyError("posterior marginals degenerate at time index " + std::to_string(t));
    const double inv = 1.0 / total;
    for (std::size_t j = 0; j < K; ++j) q[j] *= inv;
  }
  for (std::size_t j = 0; j < K; ++j) m.q1[j] = m.q_t(0, j);

  std::vector<double> bhat_next(K);
  Matrix xi(K, K);
  for (std::size_t t = 0; t + 1 < T; ++t) {
    const double* lb_next = scores.log_b_star.row(t + 1);
    const double shift_next = row_max(lb_next, K);
    for (std::size_t k = 0; k < K; ++k) bhat_next[k] = std::exp(lb_next[k] - shift_next);

    double total = 0.0;
    for (std::size_t j = 0; j < K; ++j)
      for (std::size_t k = 0; k < K; ++k) {
        xi(j, k) = f_tilde(t, j) * a_star(j, k) * bhat_next[k] * b_tilde(t + 1, k);
        total += xi(j, k);
      }
    if (!(total > 0.0) || !std::isfinite(total))
      throw DegeneracyError("transition marginals degenerate at time index " + std::to_string(t));
    const double inv = 1.0 / total;
    for (std::size_t j = 0; j < K; ++j)
      for (std::size_t k = 0; k < K; ++k) m.q_trans(j, k) += xi(j, k) * inv;
  }
  return m;
}

}  // namespace precipgen
