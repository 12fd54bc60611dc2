#include <doctest.h>

#include <cmath>
#include <vector>

#include "builders.hpp"
#include "oracles.hpp"
#include "precipgen/errors.hpp"
#include "precipgen/forward_backward.hpp"
#include "precipgen/rng.hpp"

using namespace precipgen;

namespace {

struct SmallInstance {
  Hyperparameters h;
  ExpectedParams ep;
  Matrix y;
  EmissionScores scores;
};

SmallInstance random_instance(long T, int K, int L, int M, Rng& rng) {
  SmallInstance inst;
  inst.h = testsupport::random_hyperparameters(K, L, M, rng);
  inst.ep = expected_params(inst.h);
  inst.y = testsupport::random_data(T, L, 0.4, 2.0, rng);
  inst.scores = log_emission_matrix(inst.y, inst.ep);
  return inst;
}

testsupport::EnumerationResult enumerate(const SmallInstance& inst) {
  Matrix log_a(inst.ep.K, inst.ep.K);
  for (int j = 0; j < inst.ep.K; ++j)
    for (int k = 0; k < inst.ep.K; ++k) log_a(j, k) = inst.ep.log_a_star(j, k);
  return testsupport::enumerate_chain(inst.ep.log_a1_star, log_a, inst.scores.log_b_star);
}

}  // namespace

TEST_CASE("forward log-likelihood matches exhaustive enumeration") {
  Rng rng(31);
  for (int rep = 0; rep < 30; ++rep) {
    const long T = 2 + static_cast<long>(rng.uniform_index(5));
    const int K = 2 + static_cast<int>(rng.uniform_index(2));
    const SmallInstance inst = random_instance(T, K, 2, 2, rng);
    const auto exact = enumerate(inst);
    const ForwardResult f = forward(inst.scores, inst.ep);
    CHECK(std::abs(f.log_lik - exact.log_lik) <= 1e-12 * std::max(1.0, std::abs(exact.log_lik)));
  }
}

TEST_CASE("posterior state and pair marginals match exhaustive enumeration") {
  Rng rng(32);
  for (int rep = 0; rep < 20; ++rep) {
    const long T = 2 + static_cast<long>(rng.uniform_index(4));
    const int K = 2 + static_cast<int>(rng.uniform_index(2));
    const SmallInstance inst = random_instance(T, K, 2, 1, rng);
    const auto exact = enumerate(inst);

    const ForwardResult f = forward(inst.scores, inst.ep);
    const Matrix b = backward(inst.scores, inst.ep, f.log_c);
    const LatentMarginals m = marginals(f.f_tilde, b, inst.scores, inst.ep);

    for (long t = 0; t < T; ++t)
      for (int j = 0; j < K; ++j)
        CHECK(m.q_t(t, j) == doctest::Approx(exact.state_marginals(t, j)).epsilon(1e-11));

    // the library returns pair marginals summed over t
    Matrix pair_sum(K, K);
    for (const auto& p : exact.pair_marginals)
      for (int j = 0; j < K; ++j)
        for (int k = 0; k < K; ++k) pair_sum(j, k) += p(j, k);
    for (int j = 0; j < K; ++j)
      for (int k = 0; k < K; ++k)
        CHECK(m.q_trans(j, k) == doctest::Approx(pair_sum(j, k)).epsilon(1e-10));

    for (int j = 0; j < K; ++j)
      CHECK(m.q1[j] == doctest::Approx(exact.state_marginals(0, j)).epsilon(1e-11));
  }
}

TEST_CASE("adding a constant to a time step's scores shifts the likelihood only") {
  Rng rng(33);
  const SmallInstance inst = random_instance(5, 3, 2, 2, rng);
  const ForwardResult f0 = forward(inst.scores, inst.ep);
  const Matrix b0 = backward(inst.scores, inst.ep, f0.log_c);
  const LatentMarginals m0 = marginals(f0.f_tilde, b0, inst.scores, inst.ep);

  EmissionScores shifted = inst.scores;
  const double c = 137.25;
  for (int j = 0; j < 3; ++j) shifted.log_b_star(2, j) += c;
  const ForwardResult f1 = forward(shifted, inst.ep);
  const Matrix b1 = backward(shifted, inst.ep, f1.log_c);
  const LatentMarginals m1 = marginals(f1.f_tilde, b1, shifted, inst.ep);

  CHECK(f1.log_lik == doctest::Approx(f0.log_lik + c).epsilon(1e-12));
  for (std::size_t i = 0; i < m0.q_t.v.size(); ++i)
    CHECK(m1.q_t.v[i] == doctest::Approx(m0.q_t.v[i]).epsilon(1e-11));
}

TEST_CASE("scaled recursions survive emissions that would underflow raw products") {
  // 600 steps of log scores near -2000 per step: a raw-space implementation
  // underflows immediately; the scaled one must stay finite and normalized.
  Rng rng(34);
  const int K = 3;
  const Hyperparameters h = testsupport::random_hyperparameters(K, 1, 1, rng);
  const ExpectedParams ep = expected_params(h);
  EmissionScores s;
  s.log_b_star = Matrix(600, K);
  for (long t = 0; t < 600; ++t)
    for (int j = 0; j < K; ++j) s.log_b_star(t, j) = -2000.0 + 2.0 * rng.uniform01();
  const ForwardResult f = forward(s, ep);
  CHECK(std::isfinite(f.log_lik));
  CHECK(f.log_lik < -1e6);
  const Matrix b = backward(s, ep, f.log_c);
  const LatentMarginals m = marginals(f.f_tilde, b, s, ep);
  for (long t = 0; t < 600; ++t) {
    double row = 0.0;
    for (int j = 0; j < K; ++j) {
      CHECK(std::isfinite(m.q_t(t, j)));
      row += m.q_t(t, j);
    }
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("an impossible time step raises a degeneracy error") {
  Rng rng(35);
  const Hyperparameters h = testsupport::random_hyperparameters(2, 1, 1, rng);
  const ExpectedParams ep = expected_params(h);
  EmissionScores s;
  s.log_b_star = Matrix(4, 2);
  const double ninf = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < 2; ++j) s.log_b_star(2, j) = ninf;
  CHECK_THROWS_AS(forward(s, ep), DegeneracyError);
}

TEST_CASE("chain layouts cover the data exactly") {
  const ChainLayout single = ChainLayout::single(10);
  CHECK(single.total() == 10);
  CHECK(!single.blocked);
  const ChainLayout uni = ChainLayout::uniform(4, 25);
  CHECK(uni.total() == 100);
  CHECK(uni.blocked);
  CHECK(uni.blocks[3].begin == 75);
  CHECK(uni.blocks[3].length == 25);
}
