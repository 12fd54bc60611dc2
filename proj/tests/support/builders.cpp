#include "builders.hpp"

namespace precipgen::testsupport {

Hyperparameters random_hyperparameters(int K, int L, int M, Rng& rng) {
  Hyperparameters h;
  h.K = K;
  h.L = L;
  h.M = M;
  h.xi.resize(K);
  h.alpha = Matrix(K, K);
  h.zeta = Array3(K, L, M + 1);
  h.gamma_shape = Array3(K, L, M);
  h.delta_rate = Array3(K, L, M);
  for (int j = 0; j < K; ++j) {
    h.xi[j] = 0.5 + 5.0 * rng.uniform01();
    for (int k = 0; k < K; ++k) h.alpha(j, k) = 0.5 + 8.0 * rng.uniform01();
    for (int l = 0; l < L; ++l) {
      for (int m = 0; m <= M; ++m) h.zeta(j, l, m) = 0.6 + 6.0 * rng.uniform01();
      for (int m = 0; m < M; ++m) {
        h.gamma_shape(j, l, m) = 0.8 + 30.0 * rng.uniform01();
        h.delta_rate(j, l, m) = 0.2 + 10.0 * rng.uniform01();
      }
    }
  }
  h.validate();
  return h;
}

PointParams random_point_params(int K, int L, int M, Rng& rng) {
  PointParams p;
  p.K = K;
  p.L = L;
  p.M = M;
  p.pi1.resize(K);
  p.A = Matrix(K, K);
  p.C = Array3(K, L, M + 1);
  p.Lambda = Array3(K, L, M);
  auto simplex = [&](double* v, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      v[i] = 0.05 + rng.uniform01();
      s += v[i];
    }
    for (int i = 0; i < n; ++i) v[i] /= s;
  };
  simplex(p.pi1.data(), K);
  for (int j = 0; j < K; ++j) {
    simplex(&p.A(j, 0), K);
    for (int l = 0; l < L; ++l) {
      simplex(&p.C(j, l, 0), M + 1);
      for (int m = 0; m < M; ++m) p.Lambda(j, l, m) = 0.05 + 4.0 * rng.uniform01();
    }
  }
  p.validate();
  return p;
}

Matrix random_data(long T, int L, double dry_fraction, double wet_mean, Rng& rng) {
  Matrix y(T, L);
  for (long t = 0; t < T; ++t)
    for (int l = 0; l < L; ++l)
      y(t, l) = rng.uniform01() < dry_fraction ? 0.0 : rng.exponential(1.0 / wet_mean);
  return y;
}

}  // namespace precipgen::testsupport
