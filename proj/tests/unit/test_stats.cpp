#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "builders.hpp"
#include "precipgen/generator.hpp"
#include "precipgen/rng.hpp"
#include "precipgen/stats.hpp"

using namespace precipgen;

TEST_CASE("per-location summaries on a hand-built matrix") {
  Matrix y(4, 2);
  y(0, 0) = 0.0;
  y(1, 0) = 2.0;
  y(2, 0) = 0.0;
  y(3, 0) = 4.0;
  y(0, 1) = 0.0;
  y(1, 1) = 0.0;
  y(2, 1) = 0.0;
  y(3, 1) = 0.0;
  const LocationStats s = location_stats(y);
  CHECK(s.dry_proportion[0] == 0.5);
  CHECK(s.mean_intensity[0] == 3.0);
  CHECK(s.dry_proportion[1] == 1.0);
  CHECK(std::isnan(s.mean_intensity[1]));  // no wet days
}

TEST_CASE("state-restricted summaries select the right rows") {
  Matrix y(4, 1);
  y(0, 0) = 1.0;
  y(1, 0) = 0.0;
  y(2, 0) = 5.0;
  y(3, 0) = 3.0;
  const std::vector<int> states{1, 2, 1, 2};
  const LocationStats s1 = location_stats(y, states, 1);
  CHECK(s1.dry_proportion[0] == 0.0);
  CHECK(s1.mean_intensity[0] == 3.0);  // rows 0 and 2
  const LocationStats s2 = location_stats(y, states, 2);
  CHECK(s2.dry_proportion[0] == 0.5);
  CHECK(s2.mean_intensity[0] == 3.0);  // row 3 only
  const LocationStats s3 = location_stats(y, states, 3);
  CHECK(std::isnan(s3.dry_proportion[0]));  // state never visited
  CHECK(std::isnan(s3.mean_intensity[0]));
}

TEST_CASE("parameter-based alignment undoes a known permutation") {
  Rng rng(91);
  const PointParams ref = testsupport::random_point_params(3, 2, 2, rng);
  // candidate = ref with states relabeled by perm (old -> new)
  const std::vector<int> perm{3, 1, 2};
  PointParams cand = ref;
  apply_state_permutation(cand, perm);

  const std::vector<int> found = align_states(ref, cand);
  // aligning the candidate back through `found` must restore ref's labels:
  // found[cand_state - 1] = ref_state
  PointParams restored = cand;
  apply_state_permutation(restored, found);
  for (int j = 0; j < 3; ++j) {
    CHECK(restored.pi1[j] == doctest::Approx(ref.pi1[j]).epsilon(1e-14));
    for (int k = 0; k < 3; ++k) CHECK(restored.A(j, k) == doctest::Approx(ref.A(j, k)).epsilon(1e-14));
  }
}

TEST_CASE("label-sequence alignment minimizes Hamming distance") {
  const std::vector<int> truth{1, 1, 2, 2, 3, 3, 1, 2, 3};
  // decoded = truth relabeled 1->2, 2->3, 3->1 with one error
  std::vector<int> decoded{2, 2, 3, 3, 1, 1, 2, 3, 3};
  const std::vector<int> perm = align_states(truth, decoded, 3);
  // perm maps decoded labels back to truth labels
  CHECK(perm[1] == 1);  // decoded 2 -> truth 1
  CHECK(perm[2] == 2);  // decoded 3 -> truth 2
  CHECK(perm[0] == 3);  // decoded 1 -> truth 3
}

TEST_CASE("confusion matrices count relabeled agreement") {
  const std::vector<int> truth{1, 1, 2, 2, 2, 3};
  const std::vector<int> decoded{2, 2, 3, 3, 1, 1};
  // decoded 2 means truth 1, decoded 3 means truth 2, decoded 1 means truth 3
  const std::vector<int> perm{3, 1, 2};
  const ConfusionMatrix cm = confusion(truth, decoded, perm);
  CHECK(cm.K == 3);
  CHECK(cm.at(1, 1) == 2);  // both decoded-2 steps map to truth 1
  CHECK(cm.at(2, 2) == 2);
  CHECK(cm.at(3, 2) == 1);  // the decoded-1 at t=4 maps to 3, truth was 2
  CHECK(cm.at(3, 3) == 1);
  CHECK(cm.per_state_recall[0] == doctest::Approx(1.0));
  CHECK(cm.per_state_recall[1] == doctest::Approx(2.0 / 3.0));
  CHECK(cm.per_state_recall[2] == doctest::Approx(1.0));
  CHECK(cm.accuracy == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("monthly state shares sum to one hundred percent") {
  std::vector<int> states;
  std::vector<Date> dates;
  Date d = Date::parse("2000-06-15");
  for (int i = 0; i < 40; ++i) {
    states.push_back(1 + i % 3);
    dates.push_back(d);
    d = d.next();
  }
  const MonthlyStateTable t = monthly_state_distribution(states, dates, 3);
  REQUIRE(t.months == std::vector<int>{6, 7});
  for (std::size_t i = 0; i < t.months.size(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < 3; ++j) sum += t.percent(i, j);
    CHECK(sum == doctest::Approx(100.0).epsilon(1e-12));
  }
  // June holds days 15..30: 16 days, states cycle 1,2,3 starting at 1
  CHECK(t.percent(0, 0) == doctest::Approx(100.0 * 6 / 16));
}

TEST_CASE("root-mean-square error matches the definition and rejects gaps") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{1.5, 2.0, 2.0};
  CHECK(rmse(a, b) == doctest::Approx(std::sqrt((0.25 + 0.0 + 1.0) / 3.0)).epsilon(1e-14));
  const std::vector<double> with_nan{1.0, std::nan(""), 3.0};
  CHECK_THROWS_AS(rmse(a, with_nan), std::invalid_argument);
  const std::vector<double> shorter{1.0};
  CHECK_THROWS_AS(rmse(a, shorter), std::invalid_argument);
}

TEST_CASE("wetness ordering ranks states by expected depth") {
  const PointParams p = preset_params("paper");
  const std::vector<double> w = state_wetness(p);
  REQUIRE(w.size() == 3);
  // state 1 has the lowest rates (heaviest rain), state 3 the highest
  CHECK(w[0] > w[1]);
  CHECK(w[1] > w[2]);
  const std::vector<int> perm = order_states_by_wetness(p);
  CHECK(perm == std::vector<int>{1, 2, 3});  // already wettest-first

  // scramble and check the ordering is restored
  PointParams scrambled = p;
  const std::vector<int> scramble{2, 3, 1};
  apply_state_permutation(scrambled, scramble);
  const std::vector<int> fix = order_states_by_wetness(scrambled);
  PointParams fixed = scrambled;
  apply_state_permutation(fixed, fix);
  for (int j = 0; j < 3; ++j) CHECK(fixed.pi1[j] == doctest::Approx(p.pi1[j]).epsilon(1e-14));
}

TEST_CASE("state permutations relabel consistently everywhere") {
  Rng rng(92);
  const PointParams p = testsupport::random_point_params(3, 2, 1, rng);
  const std::vector<int> perm{2, 3, 1};

  PointParams q = p;
  apply_state_permutation(q, perm);
  // old state 1 is now state 2
  CHECK(q.pi1[1] == p.pi1[0]);
  CHECK(q.A(1, 2) == p.A(0, 1));  // transitions permute on both axes
  CHECK(q.C(1, 0, 0) == p.C(0, 0, 0));
  CHECK(q.Lambda(2, 1, 0) == p.Lambda(1, 1, 0));

  // hyperparameters permute the same way
  Rng rng2(93);
  const Hyperparameters h = testsupport::random_hyperparameters(3, 2, 1, rng2);
  Hyperparameters hq = h;
  apply_state_permutation(hq, perm);
  CHECK(hq.xi[1] == h.xi[0]);
  CHECK(hq.alpha(1, 2) == h.alpha(0, 1));
  CHECK(hq.zeta(2, 1, 0) == h.zeta(1, 1, 0));
  CHECK(hq.gamma_shape(0, 0, 0) == h.gamma_shape(2, 0, 0));

  // label sequences too
  std::vector<int> states{1, 2, 3, 3};
  apply_state_permutation(states, perm);
  CHECK(states == std::vector<int>{2, 3, 1, 1});

  // non-bijections are rejected
  std::vector<int> bad{1, 1, 2};
  std::vector<int> seq{1, 2, 3};
  CHECK_THROWS_AS(apply_state_permutation(seq, bad), std::invalid_argument);
}

TEST_CASE("alignment then confusion reproduces a planted accuracy") {
  // simulate, relabel the truth, and verify the pipeline un-relabels it
  const PointParams p = preset_params("paper");
  Rng rng(94);
  const SyntheticRun run = simulate(p, 300, rng);
  std::vector<int> relabeled = run.states;
  const std::vector<int> scramble{3, 1, 2};
  apply_state_permutation(relabeled, scramble);

  const std::vector<int> perm = align_states(run.states, relabeled, 3);
  const ConfusionMatrix cm = confusion(run.states, relabeled, perm);
  CHECK(cm.accuracy == doctest::Approx(1.0));
  for (int j = 0; j < 3; ++j) CHECK(cm.per_state_recall[j] == doctest::Approx(1.0));
}
