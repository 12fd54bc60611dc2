#include "precipgen/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "precipgen/errors.hpp"
#include "precipgen/kernels.hpp"
#include "precipgen/numkernel.hpp"

namespace precipgen {

void ModelDims::validate() const {
  if (K < 1 || L < 1 || M < 1) throw ConfigError("dims: K, L, M must all be >= 1");
  if (M + 1 > static_cast<int>(kernels::kMaxComponents))
    throw ConfigError("dims: M exceeds the supported component cap of " +
                                std::to_string(kernels::kMaxComponents - 1));
  if (T < 0 || N < 0 || D < 0) throw ConfigError("dims: T, N, D must be >= 0");
  if (N > 0 && D > 0 && static_cast<long>(N) * D != T)
    throw ConfigError("dims: blocked data requires N * D == T");
}

namespace {

void check_positive(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x))
      throw ConfigError(std::string(what) + ": entries must be finite and > 0");
}

}  // namespace

void Hyperparameters::validate() const {
  ModelDims d;
  d.K = K;
  d.L = L;
  d.M = M;
  d.validate();
  const auto su = static_cast<std::size_t>(K);
  if (xi.size() != su || alpha.rows != su || alpha.cols != su)
    throw ConfigError("hyperparameters: xi/alpha shape mismatch");
  if (zeta.n1 != su || zeta.n2 != static_cast<std::size_t>(L) ||
      zeta.n3 != static_cast<std::size_t>(M + 1))
    throw ConfigError("hyperparameters: zeta shape mismatch");
  if (!gamma_shape.same_shape(Array3(su, L, M)) || !delta_rate.same_shape(Array3(su, L, M)))
    throw ConfigError("hyperparameters: gamma/delta shape mismatch");
  check_positive(xi, "xi");
  check_positive(alpha.v, "alpha");
  check_positive(zeta.v, "zeta");
  check_positive(gamma_shape.v, "gamma_shape");
  check_positive(delta_rate.v, "delta_rate");
}

void PointParams::validate() const {
  ModelDims d;
  d.K = K;
  d.L = L;
  d.M = M;
  d.validate();
  const auto su = static_cast<std::size_t>(K);
  if (pi1.size() != su || A.rows != su || A.cols != su ||
      !C.same_shape(Array3(su, L, M + 1)) || !Lambda.same_shape(Array3(su, L, M)))
    throw ConfigError("point params: shape mismatch");
  auto check_simplex = [](const double* p, std::size_t n, const char* what) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(p[i] >= 0.0)) throw ConfigError(std::string(what) + ": negative entry");
      s += p[i];
    }
    if (std::abs(s - 1.0) > 1e-8)
      throw ConfigError(std::string(what) + ": row does not sum to 1");
  };
  check_simplex(pi1.data(), pi1.size(), "pi1");
  for (int j = 0; j < K; ++j) check_simplex(A.row(j), A.cols, "A");
  for (int j = 0; j < K; ++j)
    for (int l = 0; l < L; ++l) check_simplex(C.slice(j, l), M + 1, "C");
  check_positive(Lambda.v, "Lambda");
}

Hyperparameters default_priors(const ModelDims& dims, double pi_concentration,
                               double row_concentration, const Matrix& zeta_template,
                               const Matrix& gamma_template, const Matrix& delta_template) {
  dims.validate();
  if (!(pi_concentration > 0.0) || !(row_concentration > 0.0))
    throw ConfigError("default_priors: concentrations must be > 0");
  const auto K = static_cast<std::size_t>(dims.K);
  const auto L = static_cast<std::size_t>(dims.L);
  const auto M = static_cast<std::size_t>(dims.M);
  if (zeta_template.rows != K || zeta_template.cols != M + 1 || gamma_template.rows != K ||
      gamma_template.cols != M || delta_template.rows != K || delta_template.cols != M)
    throw ConfigError("default_priors: template shape mismatch");

  Hyperparameters h;
  h.K = dims.K;
  h.L = dims.L;
  h.M = dims.M;
  h.xi.assign(K, pi_concentration / static_cast<double>(K));
  h.alpha = Matrix(K, K, row_concentration / static_cast<double>(K));
  h.zeta = Array3(K, L, M + 1);
  h.gamma_shape = Array3(K, L, M);
  h.delta_rate = Array3(K, L, M);
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t m = 0; m <= M; ++m) h.zeta(j, l, m) = zeta_template(j, m);
      for (std::size_t m = 0; m < M; ++m) {
        h.gamma_shape(j, l, m) = gamma_template(j, m);
        h.delta_rate(j, l, m) = delta_template(j, m);
      }
    }
  h.validate();
  return h;
}

void default_prior_templates(int K, int M, Matrix& zeta_template, Matrix& gamma_template,
                             Matrix& delta_template) {
  if (K < 1 || M < 1) throw ConfigError("default_prior_templates: K, M must be >= 1");
  zeta_template = Matrix(K, M + 1);
  gamma_template = Matrix(K, M);
  delta_template = Matrix(K, M);
  if (K == 3 && M == 2) {
    // Bundled three-state setup: mildly informative wet/dry split per state
    // and rate priors whose means step from heavy to light rain.
    const double zeta_rows[3][3] = {{3.0, 4.0, 3.0}, {3.0, 3.5, 3.5}, {4.0, 3.0, 3.0}};
    const double gamma_rows[3][2] = {{0.5, 2.0}, {1.5, 9.0}, {2.0, 16.0}};
    for (int j = 0; j < 3; ++j) {
      for (int m = 0; m <= 2; ++m) zeta_template(j, m) = zeta_rows[j][m];
      for (int m = 0; m < 2; ++m) {
        gamma_template(j, m) = gamma_rows[j][m];
        delta_template(j, m) = 2.0;
      }
    }
    return;
  }
  // Generic fallback: flat mixture weights; rate-prior means climb a
  // geometric ladder in m (heavier rain first) and in j (drier states later).
  for (int j = 0; j < K; ++j) {
    for (int m = 0; m <= M; ++m) zeta_template(j, m) = 3.0;
    for (int m = 0; m < M; ++m) {
      gamma_template(j, m) = 2.0;
      delta_template(j, m) = 2.0 / ((1.0 + m) * (1.0 + 0.5 * j));
    }
  }
}

ExpectedParams expected_params(const Hyperparameters& h) {
  h.validate();
  using numkernel::digamma;
  const auto K = static_cast<std::size_t>(h.K);
  const auto L = static_cast<std::size_t>(h.L);
  const auto M = static_cast<std::size_t>(h.M);

  ExpectedParams e;
  e.K = h.K;
  e.L = h.L;
  e.M = h.M;
  e.log_a1_star.resize(K);
  e.log_a_star = Matrix(K, K);
  e.log_c_star = Array3(K, L, M + 1);
  e.log_lambda_star = Array3(K, L, M);
  e.lambda_hat = Array3(K, L, M);

  double xi_total = 0.0;
  for (double x : h.xi) xi_total += x;
  const double psi_xi_total = digamma(xi_total);
  for (std::size_t j = 0; j < K; ++j) e.log_a1_star[j] = digamma(h.xi[j]) - psi_xi_total;

  for (std::size_t j = 0; j < K; ++j) {
    double row_total = 0.0;
    for (std::size_t k = 0; k < K; ++k) row_total += h.alpha(j, k);
    const double psi_row = digamma(row_total);
    for (std::size_t k = 0; k < K; ++k) e.log_a_star(j, k) = digamma(h.alpha(j, k)) - psi_row;
  }

  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t l = 0; l < L; ++l) {
      double zeta_total = 0.0;
      for (std::size_t m = 0; m <= M; ++m) zeta_total += h.zeta(j, l, m);
      const double psi_zeta = digamma(zeta_total);
      for (std::size_t m = 0; m <= M; ++m)
        e.log_c_star(j, l, m) = digamma(h.zeta(j, l, m)) - psi_zeta;
      for (std::size_t m = 0; m < M; ++m) {
        e.log_lambda_star(j, l, m) =
            digamma(h.gamma_shape(j, l, m)) - std::log(h.delta_rate(j, l, m));
        e.lambda_hat(j, l, m) = h.gamma_shape(j, l, m) / h.delta_rate(j, l, m);
      }
    }
  return e;
}

PointParams posterior_means(const Hyperparameters& h) {
  h.validate();
  const auto K = static_cast<std::size_t>(h.K);
  const auto L = static_cast<std::size_t>(h.L);
  const auto M = static_cast<std::size_t>(h.M);

  PointParams p;
  p.K = h.K;
  p.L = h.L;
  p.M = h.M;
  p.pi1.resize(K);
  p.A = Matrix(K, K);
  p.C = Array3(K, L, M + 1);
  p.Lambda = Array3(K, L, M);

  double xi_total = 0.0;
  for (double x : h.xi) xi_total += x;
  for (std::size_t j = 0; j < K; ++j) p.pi1[j] = h.xi[j] / xi_total;

  for (std::size_t j = 0; j < K; ++j) {
    double row_total = 0.0;
    for (std::size_t k = 0; k < K; ++k) row_total += h.alpha(j, k);
    for (std::size_t k = 0; k < K; ++k) p.A(j, k) = h.alpha(j, k) / row_total;
  }

  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t l = 0; l < L; ++l) {
      double zeta_total = 0.0;
      for (std::size_t m = 0; m <= M; ++m) zeta_total += h.zeta(j, l, m);
      for (std::size_t m = 0; m <= M; ++m) p.C(j, l, m) = h.zeta(j, l, m) / zeta_total;
      for (std::size_t m = 0; m < M; ++m)
        p.Lambda(j, l, m) = h.gamma_shape(j, l, m) / h.delta_rate(j, l, m);
    }
  return p;
}

}  // namespace precipgen
