#include "precipgen/vbem.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "precipgen/numkernel.hpp"
#include "precipgen/rng.hpp"

namespace precipgen {

namespace {

void check_layout(const Matrix& data, const ChainLayout& chains) {
  if (chains.blocks.empty()) throw std::invalid_argument("chain layout has no blocks");
  std::size_t expect = 0;
  for (const auto& b : chains.blocks) {
    if (b.begin != expect || b.length == 0)
      throw std::invalid_argument("chain layout blocks must be contiguous and non-empty");
    expect += b.length;
  }
  if (expect != data.rows)
    throw std::invalid_argument("chain layout does not cover the data rows");
}

Matrix copy_rows(const Matrix& src, std::size_t begin, std::size_t len) {
  Matrix out(len, src.cols);
  std::memcpy(out.v.data(), src.row(begin), len * src.cols * sizeof(double));
  return out;
}

}  // namespace

VbeResult vbe_step(const Matrix& data, const ChainLayout& chains,
                   const Hyperparameters& posterior, int threads, bool materialize_resp) {
  check_layout(data, chains);
  const ExpectedParams ep = expected_params(posterior);
  const EmissionKernelPack pack(ep);
  const EmissionScores scores = log_emission_matrix(data, pack, threads);

  VbeResult r;
  r.marginals.q_t = Matrix(data.rows, posterior.K);
  r.marginals.q_trans = Matrix(posterior.K, posterior.K);
  r.marginals.q1.assign(posterior.K, 0.0);

  for (const BlockRange& b : chains.blocks) {
    EmissionScores chain_scores;
    chain_scores.log_b_star = copy_rows(scores.log_b_star, b.begin, b.length);
    const ForwardResult fwd = forward(chain_scores, ep);
    const Matrix bwd = backward(chain_scores, ep, fwd.log_c);
    const LatentMarginals m = marginals(fwd.f_tilde, bwd, chain_scores, ep);

    std::memcpy(r.marginals.q_t.row(b.begin), m.q_t.v.data(),
                m.q_t.v.size() * sizeof(double));
    for (std::size_t i = 0; i < m.q_trans.v.size(); ++i)
      r.marginals.q_trans.v[i] += m.q_trans.v[i];
    for (int j = 0; j < posterior.K; ++j) r.marginals.q1[j] += m.q1[j];
    r.log_lik += fwd.log_lik;
  }

  r.marginals.suff = accumulate_suffstats(data, pack, r.marginals.q_t, threads);
  if (materialize_resp) r.marginals.resp = responsibilities(data, ep);
  return r;
}

Hyperparameters vbm_step(const LatentMarginals& m, const Hyperparameters& prior) {
  const int K = prior.K, L = prior.L, M = prior.M;
  if (m.q_trans.rows != static_cast<std::size_t>(K) ||
      m.q1.size() != static_cast<std::size_t>(K) || m.suff.K != K || m.suff.L != L ||
      m.suff.M != M)
    throw std::invalid_argument("vbm_step: marginal/prior shape mismatch");

  Hyperparameters h = prior;
  for (int j = 0; j < K; ++j) h.xi[j] = prior.xi[j] + m.q1[j];
  for (int j = 0; j < K; ++j)
    for (int k = 0; k < K; ++k) h.alpha(j, k) = prior.alpha(j, k) + m.q_trans(j, k);
  for (int j = 0; j < K; ++j)
    for (int l = 0; l < L; ++l) {
      h.zeta(j, l, 0) = prior.zeta(j, l, 0) + m.suff.dry(j, l);
      for (int mm = 0; mm < M; ++mm) {
        h.zeta(j, l, mm + 1) = prior.zeta(j, l, mm + 1) + m.suff.wet_count(j, mm, l);
        h.gamma_shape(j, l, mm) = prior.gamma_shape(j, l, mm) + m.suff.wet_count(j, mm, l);
        h.delta_rate(j, l, mm) = prior.delta_rate(j, l, mm) + m.suff.wet_sum(j, mm, l);
      }
    }
  return h;
}

double elbo(double log_lik, const Hyperparameters& q, const Hyperparameters& p) {
  if (q.K != p.K || q.L != p.L || q.M != p.M)
    throw std::invalid_argument("elbo: posterior/prior shape mismatch");
  using numkernel::kl_dirichlet;
  using numkernel::kl_gamma;

  double kl = kl_dirichlet(q.xi, p.xi);
  for (int j = 0; j < q.K; ++j)
    kl += kl_dirichlet({q.alpha.row(j), q.alpha.cols}, {p.alpha.row(j), p.alpha.cols});
  for (int j = 0; j < q.K; ++j)
    for (int l = 0; l < q.L; ++l) {
      kl += kl_dirichlet({q.zeta.slice(j, l), static_cast<std::size_t>(q.M + 1)},
                         {p.zeta.slice(j, l), static_cast<std::size_t>(q.M + 1)});
      for (int m = 0; m < q.M; ++m)
        kl += kl_gamma(q.gamma_shape(j, l, m), q.delta_rate(j, l, m), p.gamma_shape(j, l, m),
                       p.delta_rate(j, l, m));
    }
  return log_lik - kl;
}

Hyperparameters jitter_start(const Hyperparameters& prior, double sd, std::uint64_t seed) {
  if (!(sd >= 0.0)) throw std::invalid_argument("jitter_start: sd must be >= 0");
  if (sd == 0.0) return prior;
  Hyperparameters h = prior;
  Rng rng(splitmix64(seed ^ 0x6a09e667f3bcc908ULL));
  for (double& g : h.gamma_shape.v) g *= std::exp(sd * rng.normal01());
  return h;
}

std::pair<Hyperparameters, FitTrace> fit_cavi(const Matrix& data, const ChainLayout& chains,
                                              const Hyperparameters& prior, const FitConfig& cfg,
                                              const ProgressFn& progress) {
  prior.validate();
  if (cfg.max_iterations < 1) throw std::invalid_argument("fit_cavi: max_iterations must be >= 1");
  // tolerance 0 is allowed: the loop then always runs the full budget
  if (!(cfg.elbo_rel_tolerance >= 0.0))
    throw std::invalid_argument("fit_cavi: tolerance must be >= 0");

  Hyperparameters posterior = jitter_start(prior, cfg.init_jitter, cfg.seed);
  FitTrace trace;
  double prev = 0.0;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const VbeResult e = vbe_step(data, chains, posterior, cfg.threads);
    const double bound = elbo(e.log_lik, posterior, prior);

    TraceRow row{it, 'c', bound, it == 1 ? 0.0 : bound - prev, 0.0};
    trace.rows.push_back(row);
    trace.elbo.push_back(bound);
    trace.iterations_run = it;
    if (progress && cfg.progress_every > 0 && it % cfg.progress_every == 0) progress(row);

    if (it > 1 && std::abs(bound - prev) / (std::abs(bound) + 1.0) < cfg.elbo_rel_tolerance) {
      trace.converged = true;
      break;  // posterior already reflects the converged M-step
    }
    prev = bound;
    posterior = vbm_step(e.marginals, prior);
  }
  return {std::move(posterior), std::move(trace)};
}

}  // namespace precipgen
