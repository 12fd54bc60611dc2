#include "precipgen/emissions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "precipgen/numkernel.hpp"
#include "precipgen/parallel.hpp"

namespace precipgen {

void validate_data(const Matrix& data) {
  for (std::size_t t = 0; t < data.rows; ++t)
    for (std::size_t l = 0; l < data.cols; ++l) {
      const double y = data(t, l);
      if (!(y >= 0.0) || !std::isfinite(y))
        throw std::invalid_argument("data value at t=" + std::to_string(t) +
                                    ", location=" + std::to_string(l) +
                                    " must be finite and >= 0");
    }
}

EmissionKernelPack::EmissionKernelPack(const ExpectedParams& e) : K(e.K), L(e.L), M(e.M) {
  const auto K_ = static_cast<std::size_t>(K);
  const auto L_ = static_cast<std::size_t>(L);
  const auto M_ = static_cast<std::size_t>(M);
  log_c0.resize(K_ * L_);
  wet_weight.resize(K_ * M_ * L_);
  rate.resize(K_ * M_ * L_);
  for (std::size_t j = 0; j < K_; ++j)
    for (std::size_t l = 0; l < L_; ++l) {
      log_c0[j * L_ + l] = e.log_c_star(j, l, 0);
      for (std::size_t m = 0; m < M_; ++m) {
        wet_weight[(j * M_ + m) * L_ + l] = e.log_c_star(j, l, m + 1) + e.log_lambda_star(j, l, m);
        rate[(j * M_ + m) * L_ + l] = e.lambda_hat(j, l, m);
      }
    }
}

kernels::StateEmissionView EmissionKernelPack::state(int j) const {
  const auto L_ = static_cast<std::size_t>(L);
  const auto M_ = static_cast<std::size_t>(M);
  return {log_c0.data() + static_cast<std::size_t>(j) * L_,
          wet_weight.data() + static_cast<std::size_t>(j) * M_ * L_,
          rate.data() + static_cast<std::size_t>(j) * M_ * L_, L_, M_};
}

EmissionScores log_emission_matrix(const Matrix& data, const EmissionKernelPack& pack,
                                   int threads) {
  if (data.cols != static_cast<std::size_t>(pack.L))
    throw std::invalid_argument("log_emission_matrix: data/location count mismatch");
  validate_data(data);
  const auto& kern = kernels::active();

  EmissionScores s;
  s.log_b_star = Matrix(data.rows, pack.K);
  // Rows are independent, so any partitioning of t yields identical output.
  for_each_partition(data.rows, threads, [&](const PartitionRange& r) {
    for (std::size_t t = r.begin; t < r.end; ++t) {
      const double* y = data.row(t);
      double* out = s.log_b_star.row(t);
      for (int j = 0; j < pack.K; ++j) out[j] = kern.site_score_sum(y, pack.state(j));
    }
  });
  return s;
}

EmissionScores log_emission_matrix(const Matrix& data, const ExpectedParams& params, int threads) {
  return log_emission_matrix(data, EmissionKernelPack(params), threads);
}

Responsibilities responsibilities(const Matrix& data, const ExpectedParams& e) {
  if (data.cols != static_cast<std::size_t>(e.L))
    throw std::invalid_argument("responsibilities: data/location count mismatch");
  validate_data(data);
  const long T = static_cast<long>(data.rows);
  Responsibilities r(T, e.K, e.L, e.M);
  std::vector<double> z(e.M);
  for (long t = 0; t < T; ++t)
    for (int j = 0; j < e.K; ++j)
      for (int l = 0; l < e.L; ++l) {
        const double y = data(t, l);
        if (y == 0.0) {
          r.at(t, j, l, 0) = 1.0;
          continue;
        }
        for (int m = 0; m < e.M; ++m)
          z[m] = e.log_c_star(j, l, m + 1) + e.log_lambda_star(j, l, m) - y * e.lambda_hat(j, l, m);
        const double lse = numkernel::log_sum_exp(z);
        for (int m = 0; m < e.M; ++m) r.at(t, j, l, m + 1) = std::exp(z[m] - lse);
      }
  return r;
}

RespSuffStats accumulate_suffstats(const Matrix& data, const EmissionKernelPack& pack,
                                   const Matrix& q_t, int threads) {
  if (data.rows != q_t.rows || q_t.cols != static_cast<std::size_t>(pack.K) ||
      data.cols != static_cast<std::size_t>(pack.L))
    throw std::invalid_argument("accumulate_suffstats: shape mismatch");
  const auto& kern = kernels::active();
  const int parts = static_cast<int>(
      std::min<std::size_t>(kReductionPartitions, data.rows == 0 ? 1 : data.rows));

  // One statistics buffer per fixed partition, combined in partition order so
  // results do not depend on the worker count.
  std::vector<RespSuffStats> partials(parts, RespSuffStats(pack.K, pack.L, pack.M));
  for_each_partition(data.rows, threads, [&](const PartitionRange& r) {
    RespSuffStats& acc = partials[r.index];
    const auto L_ = static_cast<std::size_t>(pack.L);
    const auto M_ = static_cast<std::size_t>(pack.M);
    for (std::size_t t = r.begin; t < r.end; ++t) {
      const double* y = data.row(t);
      for (int j = 0; j < pack.K; ++j) {
        const double w = q_t(t, j);
        kern.resp_accumulate(y, pack.state(j), w, acc.dry0.data() + j * L_,
                             acc.s1.data() + j * M_ * L_, acc.sy.data() + j * M_ * L_);
      }
    }
  });

  RespSuffStats total(pack.K, pack.L, pack.M);
  for (const RespSuffStats& p : partials) {
    for (std::size_t i = 0; i < total.dry0.size(); ++i) total.dry0[i] += p.dry0[i];
    for (std::size_t i = 0; i < total.s1.size(); ++i) total.s1[i] += p.s1[i];
    for (std::size_t i = 0; i < total.sy.size(); ++i) total.sy[i] += p.sy[i];
  }
  return total;
}

RespSuffStats suffstats_from_responsibilities(const Matrix& data, const Responsibilities& r,
                                              const Matrix& q_t) {
  if (static_cast<long>(data.rows) != r.T || data.cols != static_cast<std::size_t>(r.L) ||
      q_t.rows != data.rows || q_t.cols != static_cast<std::size_t>(r.K))
    throw std::invalid_argument("suffstats_from_responsibilities: shape mismatch");
  RespSuffStats s(r.K, r.L, r.M);
  const auto L_ = static_cast<std::size_t>(r.L);
  const auto M_ = static_cast<std::size_t>(r.M);
  for (long t = 0; t < r.T; ++t)
    for (int j = 0; j < r.K; ++j) {
      const double w = q_t(t, j);
      for (int l = 0; l < r.L; ++l) {
        s.dry0[j * L_ + l] += w * r.at(t, j, l, 0);
        for (std::size_t m = 0; m < M_; ++m) {
          const double wr = w * r.at(t, j, l, static_cast<int>(m) + 1);
          s.s1[(j * M_ + m) * L_ + l] += wr;
          s.sy[(j * M_ + m) * L_ + l] += wr * data(t, l);
        }
      }
    }
  return s;
}

}  // namespace precipgen
