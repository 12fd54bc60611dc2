#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "precipgen/emissions.hpp"
#include "precipgen/model.hpp"
#include "precipgen/tensor.hpp"

namespace precipgen {

// Contiguous row ranges of the data matrix treated as independent chains.
struct BlockRange {
  int label = 0;  // year or synthetic index, carried through to outputs
  std::size_t begin = 0;
  std::size_t length = 0;
};

struct ChainLayout {
  std::vector<BlockRange> blocks;
  bool blocked = false;  // true when the dataset carries explicit block structure

  static ChainLayout single(std::size_t T) { return {{BlockRange{0, 0, T}}, false}; }
  static ChainLayout uniform(int N, int D) {
    ChainLayout c;
    c.blocked = true;
    for (int i = 0; i < N; ++i)
      c.blocks.push_back({i, static_cast<std::size_t>(i) * D, static_cast<std::size_t>(D)});
    return c;
  }
  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& b : blocks) t += b.length;
    return t;
  }
};

struct ForwardResult {
  Matrix f_tilde;             // [T][K], each row sums to 1
  std::vector<double> log_c;  // [T], log of the Rabiner scaling factors
  double log_lik = 0.0;       // = -sum(log_c)
};

// Scaled forward pass. Emissions enter as exp(log_b[t][j] - max_j log_b[t][.]),
// with the row max folded into log_c, so arbitrarily small emission densities
// neither overflow nor underflow.
ForwardResult forward(const EmissionScores& scores, const ExpectedParams& params);

// Scaled backward pass, run in the same shifted emission space (the shift
// cancels from every posterior quantity). Needs the forward pass's log_c.
Matrix backward(const EmissionScores& scores, const ExpectedParams& params,
                const std::vector<double>& log_c);

// Posterior state marginals q_t, summed transition marginals q_trans, and the
// first-step marginals q1, for a single chain. Responsibility statistics are
// attached by the fitting layer, not here.
struct LatentMarginals {
  Matrix q_t;                  // [T][K], rows sum to 1
  Matrix q_trans;              // [K][K], summed over t (and chains)
  std::vector<double> q1;      // [K], summed over chains
  RespSuffStats suff;          // filled by the E-step
  std::optional<Responsibilities> resp;  // materialized on request only
};

LatentMarginals marginals(const Matrix& f_tilde, const Matrix& b_tilde,
                          const EmissionScores& scores, const ExpectedParams& params);

}  // namespace precipgen
