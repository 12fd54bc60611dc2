#pragma once

#include <span>
#include <vector>

#include "precipgen/dataio.hpp"
#include "precipgen/model.hpp"
#include "precipgen/tensor.hpp"

namespace precipgen {

// Per-location summaries. mean_intensity (mean over wet days only) is NaN
// when a location has no wet days in the selection; both fields are NaN when
// the selection is empty.
struct LocationStats {
  std::vector<double> dry_proportion;
  std::vector<double> mean_intensity;
};

LocationStats location_stats(const Matrix& data);
// Restricted to time steps whose 1-based state label equals `state`.
LocationStats location_stats(const Matrix& data, std::span<const int> states, int state);

// State permutations are vectors p of length K with 1-based values:
// p[i] is the new label of (1-based) state i+1... i.e. p[old-1] = new.

// Label-matching between parameter sets: minimizes total-variation distance
// between mixture-weight rows plus |log rate| distances, exhaustively over
// all K! permutations (K <= 8), ties broken toward the lexicographically
// smallest permutation. Returns p with p[candidate-1] = reference label.
std::vector<int> align_states(const PointParams& reference, const PointParams& candidate);

// Same, matching two label sequences by minimal Hamming distance.
std::vector<int> align_states(std::span<const int> reference, std::span<const int> candidate,
                              int K);

// counts[decoded-1][true-1] after relabeling decoded states through perm.
struct ConfusionMatrix {
  int K = 0;
  std::vector<long> counts;  // row-major [decoded][true]
  std::vector<double> per_state_recall;  // diagonal / column sum
  double accuracy = 0.0;

  long at(int decoded, int truth) const {
    return counts[static_cast<std::size_t>(decoded - 1) * K + (truth - 1)];
  }
};

ConfusionMatrix confusion(std::span<const int> true_states, std::span<const int> decoded,
                          std::span<const int> perm);

// Percent of days in each state per calendar month present in `dates`;
// every column of `percent` sums to 100.
struct MonthlyStateTable {
  std::vector<int> months;  // ascending, subset of 1..12
  Matrix percent;           // [months.size()][K]
};

MonthlyStateTable monthly_state_distribution(std::span<const int> states,
                                             std::span<const Date> dates, int K);

// Root-mean-square error; rejects NaN entries and length mismatches.
double rmse(std::span<const double> a, std::span<const double> b);

// Expected daily precipitation per state (averaged over locations); used to
// impose the wettest-first label convention after fitting.
std::vector<double> state_wetness(const PointParams& p);
std::vector<int> order_states_by_wetness(const PointParams& p);

void apply_state_permutation(PointParams& p, std::span<const int> perm);
void apply_state_permutation(Hyperparameters& h, std::span<const int> perm);
void apply_state_permutation(std::span<int> states, std::span<const int> perm);

}  // namespace precipgen
