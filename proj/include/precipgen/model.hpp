#pragma once

#include <cstdint>
#include <vector>

#include "precipgen/tensor.hpp"

namespace precipgen {

// Shape of a model and (optionally) the dataset it was fitted on.
// T/N/D are zero when unknown or when the data is a single unblocked chain.
struct ModelDims {
  int K = 0;      // hidden states
  int L = 0;      // locations
  int M = 0;      // wet mixture components per location (plus the dry point mass)
  long T = 0;     // total observed time steps
  int N = 0;      // blocks (e.g. seasons/years)
  int D = 0;      // days per block
  void validate() const;
};

// Natural parameters of the variational (or prior) distribution over the
// model parameters: Dirichlet over the initial distribution and each
// transition row, Dirichlet over each location's mixture weights, and a
// shape/rate Gamma over each wet component's rate.
struct Hyperparameters {
  int K = 0, L = 0, M = 0;
  std::vector<double> xi;  // [K]        initial-distribution Dirichlet
  Matrix alpha;            // [K][K]     transition-row Dirichlets
  Array3 zeta;             // [K][L][M+1] mixture-weight Dirichlets (index 0 = dry)
  Array3 gamma_shape;      // [K][L][M]  Gamma shapes
  Array3 delta_rate;       // [K][L][M]  Gamma rates
  void validate() const;
};

// Deterministic transforms of the hyperparameters used by the E-step and the
// decoder: exp(E[log .]) "starred" values (sub-normalized by Jensen) and the
// posterior mean rates.
struct ExpectedParams {
  int K = 0, L = 0, M = 0;
  std::vector<double> log_a1_star;  // [K]
  Matrix log_a_star;                // [K][K]
  Array3 log_c_star;                // [K][L][M+1]
  Array3 log_lambda_star;           // [K][L][M]
  Array3 lambda_hat;                // [K][L][M]  gamma/delta
};

// Ordinary (normalized) parameter values: posterior means or ground truth.
struct PointParams {
  int K = 0, L = 0, M = 0;
  std::vector<double> pi1;  // [K]
  Matrix A;                 // [K][K]
  Array3 C;                 // [K][L][M+1]
  Array3 Lambda;            // [K][L][M]
  void validate() const;
};

// Builds a prior by replicating per-state templates across locations:
// xi_j = pi_concentration / K, alpha_jk = row_concentration / K,
// zeta[j][l][:] = zeta_template row j, and likewise for the Gamma shape/rate.
Hyperparameters default_priors(const ModelDims& dims, double pi_concentration,
                               double row_concentration, const Matrix& zeta_template,
                               const Matrix& gamma_template, const Matrix& delta_template);

// Built-in prior templates: the bundled three-state, two-component setup,
// generalized to other K/M by a geometric rate ladder.
void default_prior_templates(int K, int M, Matrix& zeta_template, Matrix& gamma_template,
                             Matrix& delta_template);

ExpectedParams expected_params(const Hyperparameters& posterior);
PointParams posterior_means(const Hyperparameters& posterior);

}  // namespace precipgen
