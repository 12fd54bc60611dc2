#pragma once

#include <cstddef>
#include <vector>

#include "precipgen/kernels.hpp"
#include "precipgen/model.hpp"
#include "precipgen/tensor.hpp"

namespace precipgen {

// Per-state kernel-layout copies of the emission parameters (location index
// contiguous), rebuilt once per E-step.
struct EmissionKernelPack {
  int K = 0, L = 0, M = 0;
  std::vector<double> log_c0;      // [K][L]
  std::vector<double> wet_weight;  // [K][M][L]  log_c_star + log_lambda_star
  std::vector<double> rate;        // [K][M][L]  lambda_hat

  explicit EmissionKernelPack(const ExpectedParams& e);
  kernels::StateEmissionView state(int j) const;
};

struct EmissionScores {
  Matrix log_b_star;  // [T][K]
};

// Mixture-component responsibilities per (t, state, location): index 0 is the
// dry component. Materialized form: O(T*K*L*(M+1)) memory, intended for small
// problems and as the reference for the streaming path.
struct Responsibilities {
  long T = 0;
  int K = 0, L = 0, M = 0;
  std::vector<double> q;

  Responsibilities() = default;
  Responsibilities(long t, int k, int l, int m)
      : T(t), K(k), L(l), M(m), q(static_cast<std::size_t>(t) * k * l * (m + 1), 0.0) {}
  double& at(long t, int j, int l, int m) {
    return q[((static_cast<std::size_t>(t) * K + j) * L + l) * (M + 1) + m];
  }
  double at(long t, int j, int l, int m) const {
    return q[((static_cast<std::size_t>(t) * K + j) * L + l) * (M + 1) + m];
  }
};

// State-weighted responsibility sums, the only statistics the M-step needs:
//   dry0[j][l]  = sum_t q_t(j) * r_t(j,l,0)
//   s1[j][m][l] = sum_t q_t(j) * r_t(j,l,m)          (m >= 1)
//   sy[j][m][l] = sum_t q_t(j) * r_t(j,l,m) * y[t][l]
// Streaming over t keeps memory at O(K*M*L) regardless of T.
struct RespSuffStats {
  int K = 0, L = 0, M = 0;
  std::vector<double> dry0;  // [K][L]
  std::vector<double> s1;    // [K][M][L]
  std::vector<double> sy;    // [K][M][L]

  RespSuffStats() = default;
  RespSuffStats(int k, int l, int m)
      : K(k),
        L(l),
        M(m),
        dry0(static_cast<std::size_t>(k) * l, 0.0),
        s1(static_cast<std::size_t>(k) * m * l, 0.0),
        sy(static_cast<std::size_t>(k) * m * l, 0.0) {}
  double dry(int j, int l) const { return dry0[static_cast<std::size_t>(j) * L + l]; }
  double wet_count(int j, int m, int l) const {
    return s1[(static_cast<std::size_t>(j) * M + m) * L + l];
  }
  double wet_sum(int j, int m, int l) const {
    return sy[(static_cast<std::size_t>(j) * M + m) * L + l];
  }
};

// log b*[t][j] = sum over locations of the per-site log score. All arithmetic
// stays in log space; rows are finite for any nonnegative data.
EmissionScores log_emission_matrix(const Matrix& data, const EmissionKernelPack& pack,
                                   int threads = 1);
EmissionScores log_emission_matrix(const Matrix& data, const ExpectedParams& params,
                                   int threads = 1);

// Materialized per-site responsibilities (dry sites: (1, 0, ..., 0); wet
// sites: softmax over the wet components).
Responsibilities responsibilities(const Matrix& data, const ExpectedParams& params);

// Streaming accumulation of the M-step statistics given state marginals q_t.
RespSuffStats accumulate_suffstats(const Matrix& data, const EmissionKernelPack& pack,
                                   const Matrix& q_t, int threads = 1);

// Reference route: the same statistics from materialized responsibilities.
RespSuffStats suffstats_from_responsibilities(const Matrix& data, const Responsibilities& r,
                                              const Matrix& q_t);

// Throws std::invalid_argument naming the first offending cell if any value
// is negative or non-finite.
void validate_data(const Matrix& data);

}  // namespace precipgen
