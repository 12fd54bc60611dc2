#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "precipgen/forward_backward.hpp"
#include "precipgen/model.hpp"

namespace precipgen {

struct SvbConfig {
  int iterations = 500;
  double step_exponent = 0.9;  // kappa in (0.5, 1]
  int polish_cavi_iterations = 50;
  int batch_size = 1;  // blocks per stochastic step; statistics are averaged
  // When true, the initial-distribution update target is scaled by the block
  // count like the other families; by default a minibatch contributes its
  // single observed chain start unscaled.
  bool scale_initial_update = false;
};

struct FitConfig {
  int max_iterations = 1000;
  double elbo_rel_tolerance = 1e-9;
  std::uint64_t seed = 0;
  double init_jitter = 0.0;  // lognormal sd applied to the Gamma shapes at start
  int threads = 1;
  int progress_every = 0;  // iterations between progress callbacks; 0 = never
  SvbConfig svb;
};

struct TraceRow {
  int iteration = 0;
  char phase = 'c';    // 'c' = full-data pass, 's' = stochastic pass
  double elbo = 0.0;   // exact for 'c'; an unbiased-style estimate for 's'
  double delta = 0.0;  // change from the previous row (0 for the first)
  double step = 0.0;   // step size (stochastic phase only)
};

struct FitTrace {
  std::vector<double> elbo;   // convenience copy of rows[i].elbo
  std::vector<TraceRow> rows;
  bool converged = false;
  int iterations_run = 0;
};

using ProgressFn = std::function<void(const TraceRow&)>;

struct VbeResult {
  LatentMarginals marginals;
  double log_lik = 0.0;
};

// One E-step: expected parameters -> emission scores -> per-chain
// forward/backward -> stacked q_t, summed q_trans/q1, streamed responsibility
// statistics. Set materialize_resp only for small problems.
VbeResult vbe_step(const Matrix& data, const ChainLayout& chains,
                   const Hyperparameters& posterior, int threads = 1,
                   bool materialize_resp = false);

// One M-step: prior plus expected sufficient statistics.
Hyperparameters vbm_step(const LatentMarginals& marginals, const Hyperparameters& prior);

// Evidence lower bound: log_lik minus the KL of every variational factor from
// its prior. Exact at the point where log_lik came from a fresh E-step under
// `posterior`.
double elbo(double log_lik, const Hyperparameters& posterior, const Hyperparameters& prior);

// Full-data coordinate ascent from a posterior initialized at the prior.
// Stops when |elbo_i - elbo_{i-1}| / (|elbo_i| + 1) < elbo_rel_tolerance.
std::pair<Hyperparameters, FitTrace> fit_cavi(const Matrix& data, const ChainLayout& chains,
                                              const Hyperparameters& prior, const FitConfig& cfg,
                                              const ProgressFn& progress = nullptr);

// Jittered starting point: multiplies the Gamma shapes by exp(sd * normal).
Hyperparameters jitter_start(const Hyperparameters& prior, double sd, std::uint64_t seed);

}  // namespace precipgen
