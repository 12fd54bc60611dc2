#include <cmath>
#include <limits>

#include "precipgen/kernels.hpp"

// Reference kernels: plain loops over locations with libm exp/log. These
// define the semantics the vector variants are tested against.

namespace precipgen::kernels {

namespace {

double site_score_sum_scalar(const double* y, const StateEmissionView& p) {
  const std::size_t L = p.L, M = p.M;
  double total = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    if (y[l] == 0.0) {
      total += p.log_c0[l];
      continue;
    }
    double z[kMaxComponents];
    double zmax = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < M; ++m) {
      z[m] = p.wet_weight[m * L + l] - y[l] * p.rate[m * L + l];
      if (z[m] > zmax) zmax = z[m];
    }
    double s = 0.0;
    for (std::size_t m = 0; m < M; ++m) s += std::exp(z[m] - zmax);
    total += zmax + std::log(s);
  }
  return total;
}

void resp_accumulate_scalar(const double* y, const StateEmissionView& p, double w, double* dry0,
                            double* s1, double* sy) {
  const std::size_t L = p.L, M = p.M;
  for (std::size_t l = 0; l < L; ++l) {
    if (y[l] == 0.0) {
      dry0[l] += w;
      continue;
    }
    double e[kMaxComponents];
    double zmax = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < M; ++m) {
      e[m] = p.wet_weight[m * L + l] - y[l] * p.rate[m * L + l];
      if (e[m] > zmax) zmax = e[m];
    }
    double tot = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      e[m] = std::exp(e[m] - zmax);
      tot += e[m];
    }
    const double scale = w / tot;
    for (std::size_t m = 0; m < M; ++m) {
      const double r = scale * e[m];
      s1[m * L + l] += r;
      sy[m * L + l] += r * y[l];
    }
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", site_score_sum_scalar, resp_accumulate_scalar};
  return table;
}

}  // namespace precipgen::kernels
