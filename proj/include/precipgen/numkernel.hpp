#pragma once

#include <span>

namespace precipgen::numkernel {

// Digamma function psi(x) for x > 0.
// Upward recurrence psi(x) = psi(x+1) - 1/x into the asymptotic regime
// (x >= 8), then the Bernoulli-number series. Accurate to a few ulp.
double digamma(double x);

// ln Gamma(x) for x > 0, same recurrence-into-Stirling construction.
double log_gamma(double x);

// max-shifted log(sum(exp(v))); immune to overflow for v[i] in [-1e8, 700].
double log_sum_exp(std::span<const double> v);
double log_sum_exp2(double a, double b);

// KL(Dirichlet(q) || Dirichlet(p)), closed form. Vectors must have equal
// length and strictly positive entries.
double kl_dirichlet(std::span<const double> q, std::span<const double> p);

// KL(Gamma(aq, bq) || Gamma(ap, bp)) in the shape/rate convention.
double kl_gamma(double shape_q, double rate_q, double shape_p, double rate_p);

// Deterministic pairwise summation (order fixed by length alone).
double pairwise_sum(std::span<const double> v);

}  // namespace precipgen::numkernel
