#include "precipgen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace precipgen {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

LocationStats stats_over_rows(const Matrix& data, const std::vector<std::size_t>& rows) {
  LocationStats s;
  s.dry_proportion.assign(data.cols, kNaN);
  s.mean_intensity.assign(data.cols, kNaN);
  if (rows.empty()) return s;
  for (std::size_t l = 0; l < data.cols; ++l) {
    std::size_t dry = 0, wet = 0;
    double wet_sum = 0.0;
    for (std::size_t t : rows) {
      const double y = data(t, l);
      if (y == 0.0) {
        ++dry;
      } else {
        ++wet;
        wet_sum += y;
      }
    }
    s.dry_proportion[l] = static_cast<double>(dry) / static_cast<double>(rows.size());
    if (wet > 0) s.mean_intensity[l] = wet_sum / static_cast<double>(wet);
  }
  return s;
}

}  // namespace

LocationStats location_stats(const Matrix& data) {
  if (data.rows == 0 || data.cols == 0)
    throw std::invalid_argument("location_stats: empty data");
  std::vector<std::size_t> rows(data.rows);
  std::iota(rows.begin(), rows.end(), 0);
  return stats_over_rows(data, rows);
}

LocationStats location_stats(const Matrix& data, std::span<const int> states, int state) {
  if (data.rows == 0 || data.cols == 0)
    throw std::invalid_argument("location_stats: empty data");
  if (states.size() != data.rows)
    throw std::invalid_argument("location_stats: state sequence length mismatch");
  std::vector<std::size_t> rows;
  for (std::size_t t = 0; t < states.size(); ++t)
    if (states[t] == state) rows.push_back(t);
  return stats_over_rows(data, rows);
}

namespace {

void check_perm_size(int K) {
  if (K < 1) throw std::invalid_argument("state alignment: K must be >= 1");
  if (K > 8)
    throw std::invalid_argument("state alignment: exhaustive matching supports K <= 8");
}

// Minimizes cost over permutations sigma (sigma[i] = 0-based target of
// 0-based state i); next_permutation enumerates lexicographically, so the
// first strict minimum is the lexicographically smallest tie-breaker.
template <typename CostFn>
std::vector<int> best_permutation(int K, CostFn cost) {
  std::vector<int> sigma(K), best(K);
  std::iota(sigma.begin(), sigma.end(), 0);
  best = sigma;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    const double c = cost(sigma);
    if (c < best_cost) {
      best_cost = c;
      best = sigma;
    }
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  for (int& x : best) ++x;  // to 1-based labels
  return best;
}

}  // namespace

std::vector<int> align_states(const PointParams& reference, const PointParams& candidate) {
  if (reference.K != candidate.K || reference.L != candidate.L || reference.M != candidate.M)
    throw std::invalid_argument("align_states: parameter shape mismatch");
  const int K = reference.K, L = reference.L, M = reference.M;
  check_perm_size(K);

  // pairwise cost[c][r]: candidate state c against reference state r
  Matrix cost(K, K);
  for (int c = 0; c < K; ++c)
    for (int r = 0; r < K; ++r) {
      double d = 0.0;
      for (int l = 0; l < L; ++l) {
        double tv = 0.0;
        for (int m = 0; m <= M; ++m) tv += std::abs(candidate.C(c, l, m) - reference.C(r, l, m));
        d += 0.5 * tv;
        for (int m = 0; m < M; ++m)
          d += std::abs(std::log(candidate.Lambda(c, l, m)) - std::log(reference.Lambda(r, l, m)));
      }
      cost(c, r) = d;
    }

  return best_permutation(K, [&](const std::vector<int>& sigma) {
    double total = 0.0;
    for (int c = 0; c < K; ++c) total += cost(c, sigma[c]);
    return total;
  });
}

std::vector<int> align_states(std::span<const int> reference, std::span<const int> candidate,
                              int K) {
  if (reference.size() != candidate.size() || reference.empty())
    throw std::invalid_argument("align_states: sequence length mismatch or empty input");
  check_perm_size(K);
  Matrix overlap(K, K, 0.0);  // overlap[c][r] = #{t: cand=c+1, ref=r+1}
  for (std::size_t t = 0; t < reference.size(); ++t) {
    const int c = candidate[t], r = reference[t];
    if (c < 1 || c > K || r < 1 || r > K)
      throw std::invalid_argument("align_states: state label outside 1..K");
    overlap(c - 1, r - 1) += 1.0;
  }
  const double total = static_cast<double>(reference.size());
  return best_permutation(K, [&](const std::vector<int>& sigma) {
    double matched = 0.0;
    for (int c = 0; c < K; ++c) matched += overlap(c, sigma[c]);
    return total - matched;  // Hamming distance
  });
}

ConfusionMatrix confusion(std::span<const int> true_states, std::span<const int> decoded,
                          std::span<const int> perm) {
  if (true_states.size() != decoded.size() || true_states.empty())
    throw std::invalid_argument("confusion: sequence length mismatch or empty input");
  const int K = static_cast<int>(perm.size());
  check_perm_size(K);

  ConfusionMatrix cm;
  cm.K = K;
  cm.counts.assign(static_cast<std::size_t>(K) * K, 0);
  for (std::size_t t = 0; t < decoded.size(); ++t) {
    const int d = decoded[t], tr = true_states[t];
    if (d < 1 || d > K || tr < 1 || tr > K)
      throw std::invalid_argument("confusion: state label outside 1..K");
    const int mapped = perm[d - 1];
    ++cm.counts[static_cast<std::size_t>(mapped - 1) * K + (tr - 1)];
  }

  cm.per_state_recall.assign(K, kNaN);
  long diag = 0;
  for (int j = 0; j < K; ++j) {
    long col = 0;
    for (int d = 0; d < K; ++d) col += cm.counts[static_cast<std::size_t>(d) * K + j];
    const long hit = cm.counts[static_cast<std::size_t>(j) * K + j];
    diag += hit;
    if (col > 0) cm.per_state_recall[j] = static_cast<double>(hit) / static_cast<double>(col);
  }
  cm.accuracy = static_cast<double>(diag) / static_cast<double>(decoded.size());
  return cm;
}

MonthlyStateTable monthly_state_distribution(std::span<const int> states,
                                             std::span<const Date> dates, int K) {
  if (states.size() != dates.size() || states.empty())
    throw std::invalid_argument("monthly_state_distribution: length mismatch or empty input");
  if (K < 1) throw std::invalid_argument("monthly_state_distribution: K must be >= 1");

  long counts[13] = {0};
  std::vector<long> by_month(13 * static_cast<std::size_t>(K), 0);
  for (std::size_t t = 0; t < states.size(); ++t) {
    const int s = states[t];
    if (s < 1 || s > K)
      throw std::invalid_argument("monthly_state_distribution: state label outside 1..K");
    const unsigned m = dates[t].m;
    ++counts[m];
    ++by_month[m * static_cast<std::size_t>(K) + (s - 1)];
  }

  MonthlyStateTable table;
  for (int m = 1; m <= 12; ++m)
    if (counts[m] > 0) table.months.push_back(m);
  table.percent = Matrix(table.months.size(), K);
  for (std::size_t i = 0; i < table.months.size(); ++i) {
    const int m = table.months[i];
    for (int j = 0; j < K; ++j)
      table.percent(i, j) = 100.0 * static_cast<double>(by_month[m * static_cast<std::size_t>(K) + j]) /
                            static_cast<double>(counts[m]);
  }
  return table;
}

double rmse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("rmse: length mismatch or empty input");
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i]))
      throw std::invalid_argument("rmse: no-data marker in compared positions");
    const double d = a[i] - b[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(a.size()));
}

std::vector<double> state_wetness(const PointParams& p) {
  std::vector<double> w(p.K, 0.0);
  for (int j = 0; j < p.K; ++j) {
    double total = 0.0;
    for (int l = 0; l < p.L; ++l)
      for (int m = 0; m < p.M; ++m) total += p.C(j, l, m + 1) / p.Lambda(j, l, m);
    w[j] = total / static_cast<double>(p.L);
  }
  return w;
}

std::vector<int> order_states_by_wetness(const PointParams& p) {
  const std::vector<double> w = state_wetness(p);
  std::vector<int> order(p.K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w[a] > w[b]; });
  // order[rank] = original state; invert to perm[original] = rank+1
  std::vector<int> perm(p.K);
  for (int rank = 0; rank < p.K; ++rank) perm[order[rank]] = rank + 1;
  return perm;
}

namespace {

void check_perm(std::span<const int> perm, int K) {
  if (static_cast<int>(perm.size()) != K)
    throw std::invalid_argument("state permutation has wrong length");
  std::vector<bool> seen(K, false);
  for (int v : perm) {
    if (v < 1 || v > K || seen[v - 1])
      throw std::invalid_argument("state permutation is not a bijection on 1..K");
    seen[v - 1] = true;
  }
}

}  // namespace

void apply_state_permutation(PointParams& p, std::span<const int> perm) {
  check_perm(perm, p.K);
  PointParams out = p;
  for (int j = 0; j < p.K; ++j) {
    const int nj = perm[j] - 1;
    out.pi1[nj] = p.pi1[j];
    for (int k = 0; k < p.K; ++k) out.A(nj, perm[k] - 1) = p.A(j, k);
    for (int l = 0; l < p.L; ++l) {
      for (int m = 0; m <= p.M; ++m) out.C(nj, l, m) = p.C(j, l, m);
      for (int m = 0; m < p.M; ++m) out.Lambda(nj, l, m) = p.Lambda(j, l, m);
    }
  }
  p = std::move(out);
}

void apply_state_permutation(Hyperparameters& h, std::span<const int> perm) {
  check_perm(perm, h.K);
  Hyperparameters out = h;
  for (int j = 0; j < h.K; ++j) {
    const int nj = perm[j] - 1;
    out.xi[nj] = h.xi[j];
    for (int k = 0; k < h.K; ++k) out.alpha(nj, perm[k] - 1) = h.alpha(j, k);
    for (int l = 0; l < h.L; ++l) {
      for (int m = 0; m <= h.M; ++m) out.zeta(nj, l, m) = h.zeta(j, l, m);
      for (int m = 0; m < h.M; ++m) {
        out.gamma_shape(nj, l, m) = h.gamma_shape(j, l, m);
        out.delta_rate(nj, l, m) = h.delta_rate(j, l, m);
      }
    }
  }
  h = std::move(out);
}

void apply_state_permutation(std::span<int> states, std::span<const int> perm) {
  const int K = static_cast<int>(perm.size());
  check_perm(perm, K);
  for (int& s : states) {
    if (s < 1 || s > K)
      throw std::invalid_argument("apply_state_permutation: state label outside 1..K");
    s = perm[s - 1];
  }
}

}  // namespace precipgen
