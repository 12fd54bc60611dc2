#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "precipgen/forward_backward.hpp"
#include "precipgen/model.hpp"
#include "precipgen/rng.hpp"
#include "precipgen/tensor.hpp"

namespace precipgen {

struct SyntheticRun {
  Matrix data;                 // [T][L] precipitation amounts (0 = dry)
  std::vector<int> states;     // [T] 1-based hidden states
  std::vector<int> components; // [T*L] mixture component per site, 0 = dry
  std::uint64_t seed = 0;

  int component(long t, int l) const {
    return components[static_cast<std::size_t>(t) * static_cast<std::size_t>(data.cols) + l];
  }
};

// Samples states along the chain layout (each block restarts from pi1), then
// per site a mixture component and, when wet, an exponential amount.
// data(t,l) > 0 exactly when component(t,l) >= 1.
SyntheticRun simulate(const PointParams& params, const ChainLayout& chains, Rng& rng);
SyntheticRun simulate(const PointParams& params, long T, Rng& rng);  // single chain

// Generation from a fitted model uses the posterior-mean parameters.
SyntheticRun simulate_from_posterior(const Hyperparameters& posterior, const ChainLayout& chains,
                                     Rng& rng);

// Named built-in parameter sets; "paper" is the bundled three-state,
// three-location, two-component benchmark configuration.
PointParams preset_params(std::string_view name);

}  // namespace precipgen
