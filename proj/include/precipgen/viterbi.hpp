#pragma once

#include <vector>

#include "precipgen/forward_backward.hpp"
#include "precipgen/model.hpp"

namespace precipgen {

struct StatePath {
  std::vector<int> states;  // 1-based labels, one per time step
  double log_score = 0.0;   // joint log score of the decoded path
};

// Max-product decoding in log space. By default the same exp(E[log .])
// surrogate parameters the E-step uses; with use_posterior_means, the
// normalized posterior-mean parameters instead. Ties break toward the lower
// state index. Each block restarts from the initial distribution; log_score
// sums over blocks.
StatePath decode(const Matrix& data, const ChainLayout& chains, const Hyperparameters& posterior,
                 bool use_posterior_means = false, int threads = 1);

// Single-chain core on precomputed scores (also used by tests).
StatePath decode_chain(const EmissionScores& scores, const std::vector<double>& log_a1,
                       const Matrix& log_a);

}  // namespace precipgen
