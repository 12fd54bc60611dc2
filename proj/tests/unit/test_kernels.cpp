#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "precipgen/errors.hpp"
#include "precipgen/kernels.hpp"
#include "precipgen/numkernel.hpp"
#include "precipgen/rng.hpp"

using namespace precipgen;
using namespace precipgen::kernels;

namespace {

// Owns the flat arrays behind a StateEmissionView.
struct ViewData {
  std::vector<double> log_c0, wet_weight, rate, y;
  std::size_t L, M;

  StateEmissionView view() const { return {log_c0.data(), wet_weight.data(), rate.data(), L, M}; }
};

ViewData random_view(std::size_t L, std::size_t M, double dry_fraction, Rng& rng) {
  ViewData d;
  d.L = L;
  d.M = M;
  d.log_c0.resize(L);
  d.wet_weight.resize(M * L);
  d.rate.resize(M * L);
  d.y.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    d.log_c0[l] = -3.0 * rng.uniform01();
    d.y[l] = rng.uniform01() < dry_fraction ? 0.0 : rng.exponential(0.4);
    for (std::size_t m = 0; m < M; ++m) {
      d.wet_weight[m * L + l] = -4.0 * rng.uniform01() + std::log(0.05 + 4.0 * rng.uniform01());
      d.rate[m * L + l] = 0.05 + 4.0 * rng.uniform01();
    }
  }
  return d;
}

// Straightforward long-double recomputation of the site score sum.
double reference_score(const ViewData& d) {
  long double total = 0.0L;
  for (std::size_t l = 0; l < d.L; ++l) {
    if (d.y[l] == 0.0) {
      total += static_cast<long double>(d.log_c0[l]);
    } else {
      long double mx = -1e400L;
      std::vector<long double> z(d.M);
      for (std::size_t m = 0; m < d.M; ++m) {
        z[m] = static_cast<long double>(d.wet_weight[m * d.L + l]) -
               static_cast<long double>(d.y[l]) * static_cast<long double>(d.rate[m * d.L + l]);
        mx = std::max(mx, z[m]);
      }
      long double s = 0.0L;
      for (std::size_t m = 0; m < d.M; ++m) s += expl(z[m] - mx);
      total += mx + logl(s);
    }
  }
  return static_cast<double>(total);
}

}  // namespace

TEST_CASE("scalar site score matches a long-double recomputation") {
  Rng rng(101);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t L = 1 + rng.uniform_index(9);
    const std::size_t M = 1 + rng.uniform_index(3);
    const ViewData d = random_view(L, M, 0.4, rng);
    const double got = scalar_kernels().site_score_sum(d.y.data(), d.view());
    const double ref = reference_score(d);
    CHECK(std::abs(got - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("scalar responsibility accumulation conserves mass and weights by y") {
  Rng rng(33);
  const std::size_t L = 7, M = 3;
  const ViewData d = random_view(L, M, 0.3, rng);
  std::vector<double> dry0(L, 0.0), s1(M * L, 0.0), sy(M * L, 0.0);
  const double w = 0.625;
  scalar_kernels().resp_accumulate(d.y.data(), d.view(), w, dry0.data(), s1.data(), sy.data());
  for (std::size_t l = 0; l < L; ++l) {
    double mass = dry0[l];
    for (std::size_t m = 0; m < M; ++m) mass += s1[m * L + l];
    CHECK(mass == doctest::Approx(w).epsilon(1e-12));  // responsibilities sum to 1
    if (d.y[l] == 0.0) {
      CHECK(dry0[l] == w);
      for (std::size_t m = 0; m < M; ++m) CHECK(sy[m * L + l] == 0.0);
    } else {
      CHECK(dry0[l] == 0.0);
      for (std::size_t m = 0; m < M; ++m)
        CHECK(sy[m * L + l] == doctest::Approx(s1[m * L + l] * d.y[l]).epsilon(1e-12));
    }
  }
}

TEST_CASE("vector kernels agree with scalar kernels") {
  const KernelTable* avx2 = avx2_kernels_or_null();
  if (!avx2) return;  // not built or not supported on this CPU
  Rng rng(202);
  for (int rep = 0; rep < 60; ++rep) {
    // lengths around the 4-lane width to cover every tail case
    const std::size_t L = 1 + rng.uniform_index(23);
    const std::size_t M = 1 + rng.uniform_index(4);
    const ViewData d = random_view(L, M, rep % 3 == 0 ? 1.0 : 0.35, rng);

    const double s_ref = scalar_kernels().site_score_sum(d.y.data(), d.view());
    const double s_got = avx2->site_score_sum(d.y.data(), d.view());
    CHECK(std::abs(s_got - s_ref) <= 1e-11 * std::max(1.0, std::abs(s_ref)));

    std::vector<double> dry_a(L, 0.0), s1_a(M * L, 0.0), sy_a(M * L, 0.0);
    std::vector<double> dry_b(L, 0.0), s1_b(M * L, 0.0), sy_b(M * L, 0.0);
    scalar_kernels().resp_accumulate(d.y.data(), d.view(), 0.8, dry_a.data(), s1_a.data(),
                                     sy_a.data());
    avx2->resp_accumulate(d.y.data(), d.view(), 0.8, dry_b.data(), s1_b.data(), sy_b.data());
    for (std::size_t i = 0; i < L; ++i) CHECK(dry_b[i] == doctest::Approx(dry_a[i]).epsilon(1e-11));
    for (std::size_t i = 0; i < M * L; ++i) {
      CHECK(s1_b[i] == doctest::Approx(s1_a[i]).epsilon(1e-11));
      CHECK(sy_b[i] == doctest::Approx(sy_a[i]).epsilon(1e-11));
    }
  }
}

TEST_CASE("vector kernels survive extreme arguments") {
  const KernelTable* avx2 = avx2_kernels_or_null();
  if (!avx2) return;
  // y * rate large enough to underflow exp; score must stay finite via the
  // max shift, and agree with scalar
  ViewData d;
  d.L = 5;
  d.M = 2;
  d.log_c0.assign(d.L, -1.0);
  d.y = {800.0, 0.0, 1e-12, 300.0, 50.0};
  d.wet_weight = {-0.5, -0.5, -0.5, -0.5, -0.5, -2.0, -2.0, -2.0, -2.0, -2.0};
  d.rate = {3.0, 3.0, 3.0, 3.0, 3.0, 0.01, 0.01, 0.01, 0.01, 0.01};
  const double ref = scalar_kernels().site_score_sum(d.y.data(), d.view());
  const double got = avx2->site_score_sum(d.y.data(), d.view());
  CHECK(std::isfinite(ref));
  CHECK(std::abs(got - ref) <= 1e-11 * std::max(1.0, std::abs(ref)));
}

TEST_CASE("kernel selection is explicit and validated") {
  CHECK(!available_kernels().empty());
  CHECK_THROWS_AS(select("no-such-kernel"), ConfigError);
  select("scalar");
  CHECK(std::string(active().name) == "scalar");
  if (avx2_kernels_or_null()) {
    select("avx2");
    CHECK(std::string(active().name) == "avx2");
  }
  // restore the default choice for the rest of the suite
  select(avx2_kernels_or_null() ? "avx2" : "scalar");
}
