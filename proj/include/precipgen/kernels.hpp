#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace precipgen::kernels {

// Hard cap on mixture components so kernels can use fixed stack scratch.
inline constexpr std::size_t kMaxComponents = 32;

// Emission parameters for one hidden state in kernel layout: one
// location-contiguous row of length L per mixture component.
struct StateEmissionView {
  const double* log_c0;      // [L]    log weight of the dry (zero) component
  const double* wet_weight;  // [M][L] log mixture weight + log rate, wet components
  const double* rate;        // [M][L] posterior mean rate
  std::size_t L;
  std::size_t M;
};

// Sum over locations of the per-site log score for one (time step, state):
// dry sites contribute log_c0[l]; wet sites contribute
// logsumexp_m(wet_weight[m][l] - y[l] * rate[m][l]).
using SiteScoreSumFn = double (*)(const double* y, const StateEmissionView& p);

// Accumulates responsibility-weighted sufficient statistics for one
// (time step, state) with state weight w:
//   y[l] == 0 : dry0[l]    += w
//   y[l]  > 0 : s1[m][l]   += w * r_m(l)          (r = softmax over wet components)
//               sy[m][l]   += w * r_m(l) * y[l]
using RespAccumFn = void (*)(const double* y, const StateEmissionView& p, double w, double* dry0,
                             double* s1, double* sy);

struct KernelTable {
  const char* name;
  SiteScoreSumFn site_score_sum;
  RespAccumFn resp_accumulate;
};

const KernelTable& scalar_kernels();
// Null when this build or this CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels_or_null();

std::vector<std::string> available_kernels();

// Runtime-selected table: best supported variant, honoring the
// PRECIPGEN_KERNELS=scalar|avx2 environment override at first use.
const KernelTable& active();

// Programmatic override; throws ConfigError on unknown or unsupported names.
void select(std::string_view name);

}  // namespace precipgen::kernels
