#pragma once

#include <utility>

#include "precipgen/rng.hpp"
#include "precipgen/vbem.hpp"

namespace precipgen {

// Robbins-Monro step size tau_i = (1 + i)^(-kappa); kappa must lie in
// (0.5, 1] so that sum(tau) diverges while sum(tau^2) converges.
double step_size(int i, double kappa);

struct Minibatch {
  int block_index = 0;  // position within the layout
  Matrix data;          // the block's rows
};

// Uniform block draw with replacement; requires explicit block structure.
Minibatch sample_minibatch(const Matrix& data, const ChainLayout& chains, Rng& rng);

// Natural-gradient blend: new = (1 - tau) * prev + tau * (prior + n_blocks *
// batch statistic) for every family except the initial distribution, whose
// target stays unscaled unless scale_initial_update is set (a chain start is
// observed once per block, not once per day).
Hyperparameters svb_m_step(const Hyperparameters& prev, const LatentMarginals& batch_marginals,
                           const Hyperparameters& prior, double tau, int n_blocks,
                           bool scale_initial_update = false);

// Stochastic pass (cfg.svb.iterations minibatch steps) followed by
// cfg.svb.polish_cavi_iterations of full-data coordinate ascent. The trace
// marks stochastic rows 's' (ELBO estimates) and polish rows 'c' (exact).
std::pair<Hyperparameters, FitTrace> fit_svb(const Matrix& data, const ChainLayout& chains,
                                             const Hyperparameters& prior, const FitConfig& cfg,
                                             const ProgressFn& progress = nullptr);

}  // namespace precipgen
