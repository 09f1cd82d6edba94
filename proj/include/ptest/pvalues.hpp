// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>

#include "ptest/core_types.hpp"

namespace ptest {

/// exp(-2 m (alpha - r_hat)_+^2). Throws std::domain_error on bad inputs.
double hoeffding_pvalue(double r_hat, double alpha, std::size_t m);

/// Hoeffding-Bentkus p-value:
///   min(1, exp(-m h1(min(r_hat, alpha), alpha)), e * P(Bin(m, alpha) <= ceil(m r_hat)))
/// where h1 is the Bernoulli KL divergence. m * r_hat within 1e-9 of an
/// integer is rounded to it before the ceiling.
double hb_pvalue(double r_hat, double alpha, std::size_t m);

double pvalue(PValueKind kind, double r_hat, double alpha, std::size_t m);

/// P(Bin(m, q) <= k). Absolute error <= 1e-12 for m <= 1e6.
double binomial_cdf(std::size_t k, std::size_t m, double q);

/// P(Bin(m, q) = k), saddle-point evaluation.
double binomial_pmf(std::size_t k, std::size_t m, double q);

/// Bernoulli KL divergence a ln(a/b) + (1-a) ln((1-a)/(1-b)), with 0 ln 0 = 0.
double bernoulli_kl(double a, double b);

/// ceil(m * r_hat) with the near-integer snap used by the Bentkus term.
std::size_t bentkus_count(double r_hat, std::size_t m);

/// Maximum of valid p-values; valid under the intersection null.
double combine_max(std::span<const double> pvals);

}  // namespace ptest
