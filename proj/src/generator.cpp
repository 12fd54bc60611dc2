#include "precipgen/generator.hpp"

#include <span>
#include <stdexcept>
#include <string>

#include "precipgen/errors.hpp"

namespace precipgen {

SyntheticRun simulate(const PointParams& p, const ChainLayout& chains, Rng& rng) {
  p.validate();
  if (chains.blocks.empty()) throw std::invalid_argument("simulate: empty chain layout");
  const std::size_t T = chains.total();
  const auto L = static_cast<std::size_t>(p.L);

  SyntheticRun run;
  run.seed = rng.seed();
  run.data = Matrix(T, L);
  run.states.resize(T);
  run.components.assign(T * L, 0);

  for (const BlockRange& b : chains.blocks) {
    int state = -1;
    for (std::size_t step = 0; step < b.length; ++step) {
      const std::size_t t = b.begin + step;
      state = static_cast<int>(
          step == 0 ? rng.categorical(std::span<const double>(p.pi1))
                    : rng.categorical(std::span<const double>(p.A.row(state), p.A.cols)));
      run.states[t] = state + 1;
      for (std::size_t l = 0; l < L; ++l) {
        const std::size_t m =
            rng.categorical(std::span<const double>(p.C.slice(state, l), p.M + 1));
        run.components[t * L + l] = static_cast<int>(m);
        if (m >= 1) run.data(t, l) = rng.exponential(p.Lambda(state, l, m - 1));
      }
    }
  }
  return run;
}

SyntheticRun simulate(const PointParams& p, long T, Rng& rng) {
  if (T < 1) throw std::invalid_argument("simulate: T must be >= 1");
  return simulate(p, ChainLayout::single(static_cast<std::size_t>(T)), rng);
}

SyntheticRun simulate_from_posterior(const Hyperparameters& posterior, const ChainLayout& chains,
                                     Rng& rng) {
  return simulate(posterior_means(posterior), chains, rng);
}

PointParams preset_params(std::string_view name) {
  if (name != "paper" && name != "demo")
    throw ConfigError("unknown preset: " + std::string(name));

  PointParams p;
  p.K = 3;
  p.L = 3;
  p.M = 2;
  p.pi1 = {0.38, 0.34, 0.28};
  p.A = Matrix(3, 3);
  const double a[3][3] = {{0.60, 0.30, 0.10}, {0.20, 0.50, 0.30}, {0.30, 0.20, 0.50}};
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) p.A(j, k) = a[j][k];

  // c[l][j][m]: per-location mixture weights (dry, light-ish, heavy-ish)
  const double c[3][3][3] = {
      {{0.10, 0.60, 0.30}, {0.20, 0.40, 0.40}, {0.30, 0.40, 0.30}},
      {{0.20, 0.70, 0.10}, {0.40, 0.20, 0.40}, {0.50, 0.20, 0.30}},
      {{0.20, 0.60, 0.20}, {0.50, 0.30, 0.20}, {0.60, 0.20, 0.20}},
  };
  // lam[l][j][m]: exponential rates for the wet components
  const double lam[3][3][2] = {
      {{0.08, 1.0}, {0.60, 5.0}, {1.00, 8.0}},
      {{0.05, 1.0}, {0.50, 4.0}, {1.00, 10.0}},
      {{0.10, 1.0}, {0.10, 5.0}, {0.90, 6.0}},
  };
  p.C = Array3(3, 3, 3);
  p.Lambda = Array3(3, 3, 2);
  for (int l = 0; l < 3; ++l)
    for (int j = 0; j < 3; ++j) {
      for (int m = 0; m < 3; ++m) p.C(j, l, m) = c[l][j][m];
      for (int m = 0; m < 2; ++m) p.Lambda(j, l, m) = lam[l][j][m];
    }
  p.validate();
  return p;
}

}  // namespace precipgen
