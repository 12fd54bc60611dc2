#include "precipgen/viterbi.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace precipgen {

StatePath decode_chain(const EmissionScores& scores, const std::vector<double>& log_a1,
                       const Matrix& log_a) {
  const Matrix& logb = scores.log_b_star;
  const auto T = logb.rows;
  const auto K = log_a1.size();
  if (T == 0) throw std::invalid_argument("decode_chain: empty chain");
  if (logb.cols != K || log_a.rows != K || log_a.cols != K)
    throw std::invalid_argument("decode_chain: shape mismatch");

  Matrix delta(T, K);
  std::vector<int> back(T * K, 0);
  for (std::size_t j = 0; j < K; ++j) delta(0, j) = log_a1[j] + logb(0, j);

  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t k = 0; k < K; ++k) {
      // strict > keeps the first (lowest-index) argmax on ties
      int best = 0;
      double best_score = delta(t - 1, 0) + log_a(0, k);
      for (std::size_t j = 1; j < K; ++j) {
        const double score = delta(t - 1, j) + log_a(j, k);
        if (score > best_score) {
          best_score = score;
          best = static_cast<int>(j);
        }
      }
      delta(t, k) = best_score + logb(t, k);
      back[t * K + k] = best;
    }

  StatePath path;
  path.states.resize(T);
  int cur = 0;
  double best_final = delta(T - 1, 0);
  for (std::size_t j = 1; j < K; ++j)
    if (delta(T - 1, j) > best_final) {
      best_final = delta(T - 1, j);
      cur = static_cast<int>(j);
    }
  path.log_score = best_final;
  for (std::size_t t = T; t-- > 0;) {
    path.states[t] = cur + 1;
    if (t > 0) cur = back[t * K + cur];
  }
  return path;
}

namespace {

// Point parameters expressed as the same starred/log structure the decoder
// core consumes, so both parameter choices share one code path.
ExpectedParams as_expected(const PointParams& p) {
  ExpectedParams e;
  e.K = p.K;
  e.L = p.L;
  e.M = p.M;
  e.log_a1_star.resize(p.K);
  e.log_a_star = Matrix(p.K, p.K);
  e.log_c_star = Array3(p.K, p.L, p.M + 1);
  e.log_lambda_star = Array3(p.K, p.L, p.M);
  e.lambda_hat = p.Lambda;
  for (int j = 0; j < p.K; ++j) e.log_a1_star[j] = std::log(p.pi1[j]);
  for (std::size_t i = 0; i < e.log_a_star.v.size(); ++i) e.log_a_star.v[i] = std::log(p.A.v[i]);
  for (std::size_t i = 0; i < e.log_c_star.v.size(); ++i) e.log_c_star.v[i] = std::log(p.C.v[i]);
  for (std::size_t i = 0; i < e.log_lambda_star.v.size(); ++i)
    e.log_lambda_star.v[i] = std::log(p.Lambda.v[i]);
  return e;
}

}  // namespace

StatePath decode(const Matrix& data, const ChainLayout& chains, const Hyperparameters& posterior,
                 bool use_posterior_means, int threads) {
  posterior.validate();
  const ExpectedParams ep =
      use_posterior_means ? as_expected(posterior_means(posterior)) : expected_params(posterior);
  const EmissionScores scores = log_emission_matrix(data, ep, threads);

  StatePath out;
  out.states.resize(data.rows);
  for (const BlockRange& b : chains.blocks) {
    EmissionScores chunk;
    chunk.log_b_star = Matrix(b.length, scores.log_b_star.cols);
    std::memcpy(chunk.log_b_star.v.data(), scores.log_b_star.row(b.begin),
                b.length * scores.log_b_star.cols * sizeof(double));
    const StatePath p = decode_chain(chunk, ep.log_a1_star, ep.log_a_star);
    std::memcpy(out.states.data() + b.begin, p.states.data(), b.length * sizeof(int));
    out.log_score += p.log_score;
  }
  return out;
}

}  // namespace precipgen
