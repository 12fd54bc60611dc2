#include "precipgen/svb.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "precipgen/errors.hpp"

namespace precipgen {

double step_size(int i, double kappa) {
  if (i < 1) throw std::invalid_argument("step_size: iteration index starts at 1");
  if (!(kappa > 0.5) || !(kappa <= 1.0))
    throw ConfigError("step exponent must lie in (0.5, 1]");
  return std::pow(1.0 + static_cast<double>(i), -kappa);
}

Minibatch sample_minibatch(const Matrix& data, const ChainLayout& chains, Rng& rng) {
  if (!chains.blocked)
    throw ConfigError("stochastic fitting requires a dataset with block structure");
  const std::size_t n = chains.blocks.size();
  const std::size_t pick = rng.uniform_index(n);
  const BlockRange& b = chains.blocks[pick];

  Minibatch mb;
  mb.block_index = static_cast<int>(pick);
  mb.data = Matrix(b.length, data.cols);
  std::memcpy(mb.data.v.data(), data.row(b.begin), b.length * data.cols * sizeof(double));
  return mb;
}

Hyperparameters svb_m_step(const Hyperparameters& prev, const LatentMarginals& m,
                           const Hyperparameters& prior, double tau, int n_blocks,
                           bool scale_initial_update) {
  if (!(tau > 0.0) || !(tau <= 1.0))
    throw std::invalid_argument("svb_m_step: tau must lie in (0, 1]");
  if (n_blocks < 1) throw std::invalid_argument("svb_m_step: n_blocks must be >= 1");
  if (prev.K != prior.K || prev.L != prior.L || prev.M != prior.M)
    throw std::invalid_argument("svb_m_step: shape mismatch");
  const double n = static_cast<double>(n_blocks);
  const double keep = 1.0 - tau;
  const int K = prior.K, L = prior.L, M = prior.M;

  Hyperparameters h = prev;
  const double xi_scale = scale_initial_update ? n : 1.0;
  for (int j = 0; j < K; ++j)
    h.xi[j] = keep * prev.xi[j] + tau * (prior.xi[j] + xi_scale * m.q1[j]);
  for (int j = 0; j < K; ++j)
    for (int k = 0; k < K; ++k)
      h.alpha(j, k) = keep * prev.alpha(j, k) + tau * (prior.alpha(j, k) + n * m.q_trans(j, k));
  for (int j = 0; j < K; ++j)
    for (int l = 0; l < L; ++l) {
      h.zeta(j, l, 0) =
          keep * prev.zeta(j, l, 0) + tau * (prior.zeta(j, l, 0) + n * m.suff.dry(j, l));
      for (int mm = 0; mm < M; ++mm) {
        h.zeta(j, l, mm + 1) = keep * prev.zeta(j, l, mm + 1) +
                               tau * (prior.zeta(j, l, mm + 1) + n * m.suff.wet_count(j, mm, l));
        h.gamma_shape(j, l, mm) =
            keep * prev.gamma_shape(j, l, mm) +
            tau * (prior.gamma_shape(j, l, mm) + n * m.suff.wet_count(j, mm, l));
        h.delta_rate(j, l, mm) = keep * prev.delta_rate(j, l, mm) +
                                 tau * (prior.delta_rate(j, l, mm) + n * m.suff.wet_sum(j, mm, l));
      }
    }
  return h;
}

namespace {

// Averages q1 / q_trans / suff statistics across the minibatch draws.
LatentMarginals average_marginals(std::vector<LatentMarginals>&& parts) {
  LatentMarginals out = std::move(parts.front());
  const double inv = 1.0 / static_cast<double>(parts.size());
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const LatentMarginals& p = parts[i];
    for (std::size_t k = 0; k < out.q1.size(); ++k) out.q1[k] += p.q1[k];
    for (std::size_t k = 0; k < out.q_trans.v.size(); ++k) out.q_trans.v[k] += p.q_trans.v[k];
    for (std::size_t k = 0; k < out.suff.dry0.size(); ++k) out.suff.dry0[k] += p.suff.dry0[k];
    for (std::size_t k = 0; k < out.suff.s1.size(); ++k) out.suff.s1[k] += p.suff.s1[k];
    for (std::size_t k = 0; k < out.suff.sy.size(); ++k) out.suff.sy[k] += p.suff.sy[k];
  }
  if (parts.size() > 1) {
    for (double& x : out.q1) x *= inv;
    for (double& x : out.q_trans.v) x *= inv;
    for (double& x : out.suff.dry0) x *= inv;
    for (double& x : out.suff.s1) x *= inv;
    for (double& x : out.suff.sy) x *= inv;
  }
  return out;
}

}  // namespace

std::pair<Hyperparameters, FitTrace> fit_svb(const Matrix& data, const ChainLayout& chains,
                                             const Hyperparameters& prior, const FitConfig& cfg,
                                             const ProgressFn& progress) {
  prior.validate();
  const SvbConfig& s = cfg.svb;
  if (s.iterations < 0) throw std::invalid_argument("fit_svb: iterations must be >= 0");
  if (s.polish_cavi_iterations < 1)
    throw std::invalid_argument("fit_svb: polish_cavi_iterations must be >= 1");
  if (s.batch_size < 1) throw std::invalid_argument("fit_svb: batch_size must be >= 1");
  if (s.iterations > 0) {
    step_size(1, s.step_exponent);  // validates the exponent up front
    if (!chains.blocked)
      throw ConfigError("stochastic fitting requires a dataset with block structure");
  }

  const int n_blocks = static_cast<int>(chains.blocks.size());
  Hyperparameters posterior = jitter_start(prior, cfg.init_jitter, cfg.seed);
  Rng rng(cfg.seed);
  FitTrace trace;
  double prev_estimate = 0.0;

  for (int i = 1; i <= s.iterations; ++i) {
    const double tau = step_size(i, s.step_exponent);

    std::vector<LatentMarginals> batch;
    double mean_ll = 0.0;
    batch.reserve(s.batch_size);
    for (int b = 0; b < s.batch_size; ++b) {
      Minibatch mb = sample_minibatch(data, chains, rng);
      VbeResult e = vbe_step(mb.data, ChainLayout::single(mb.data.rows), posterior, cfg.threads);
      mean_ll += e.log_lik;
      batch.push_back(std::move(e.marginals));
    }
    mean_ll /= static_cast<double>(s.batch_size);
    const LatentMarginals avg = average_marginals(std::move(batch));

    // ELBO estimate: the sampled block's likelihood scaled up to the full
    // dataset, minus the exact KL terms at the current posterior.
    const double estimate = elbo(static_cast<double>(n_blocks) * mean_ll, posterior, prior);
    TraceRow row{i, 's', estimate, i == 1 ? 0.0 : estimate - prev_estimate, tau};
    trace.rows.push_back(row);
    trace.elbo.push_back(estimate);
    trace.iterations_run = i;
    prev_estimate = estimate;
    if (progress && cfg.progress_every > 0 && i % cfg.progress_every == 0) progress(row);

    posterior = svb_m_step(posterior, avg, prior, tau, n_blocks, s.scale_initial_update);
  }

  // Full-data polish: plain coordinate ascent warm-started at the stochastic
  // solution (the CAVI driver restarts from the prior, so inline the loop).
  double prev_bound = 0.0;
  for (int it = 1; it <= s.polish_cavi_iterations; ++it) {
    const VbeResult e = vbe_step(data, chains, posterior, cfg.threads);
    const double bound = elbo(e.log_lik, posterior, prior);

    TraceRow row{s.iterations + it, 'c', bound, it == 1 ? 0.0 : bound - prev_bound, 0.0};
    trace.rows.push_back(row);
    trace.elbo.push_back(bound);
    trace.iterations_run = s.iterations + it;
    if (progress && cfg.progress_every > 0 && (s.iterations + it) % cfg.progress_every == 0)
      progress(row);

    if (it > 1 &&
        std::abs(bound - prev_bound) / (std::abs(bound) + 1.0) < cfg.elbo_rel_tolerance) {
      trace.converged = true;
      break;
    }
    prev_bound = bound;
    posterior = vbm_step(e.marginals, prior);
  }
  return {std::move(posterior), std::move(trace)};
}

}  // namespace precipgen
