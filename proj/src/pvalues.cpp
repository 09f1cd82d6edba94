// SPDX-License-Identifier: Apache-2.0
#include "ptest/pvalues.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ptest {
namespace {

void check_inputs(double r_hat, double alpha, std::size_t m) {
    if (!(r_hat >= 0.0 && r_hat <= 1.0))
        throw std::domain_error("p-value: empirical risk " + std::to_string(r_hat) + " outside [0,1]");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("p-value: alpha " + std::to_string(alpha) + " outside (0,1]");
    if (m < 1) throw std::domain_error("p-value: sample count must be >= 1");
}

// log(n!) - log(sqrt(2 pi n) (n/e)^n)
double stirlerr(double n) {
    constexpr double S0 = 1.0 / 12.0;
    constexpr double S1 = 1.0 / 360.0;
    constexpr double S2 = 1.0 / 1260.0;
    constexpr double S3 = 1.0 / 1680.0;
    constexpr double S4 = 1.0 / 1188.0;
    if (n <= 15.0) {
        const long double ln = static_cast<long double>(n);
        return static_cast<double>(std::lgamma(ln + 1.0L) - (ln + 0.5L) * std::log(ln) + ln -
                                   0.5L * std::log(2.0L * std::numbers::pi_v<long double>));
    }
    const double nn = n * n;
    if (n > 500.0) return (S0 - S1 / nn) / n;
    if (n > 80.0) return (S0 - (S1 - S2 / nn) / nn) / n;
    if (n > 35.0) return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n;
    return (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n;
}

// x log(x/np) + np - x, evaluated without cancellation near x = np.
double bd0(double x, double np) {
    if (std::fabs(x - np) < 0.1 * (x + np)) {
        double v = (x - np) / (x + np);
        double s = (x - np) * v;
        double ej = 2.0 * x * v;
        const double v2 = v * v;
        for (int j = 1; j < 1000; ++j) {
            ej *= v2;
            const double s1 = s + ej / (2 * j + 1);
            if (s1 == s) return s1;
            s = s1;
        }
        return s;
    }
    return x * std::log(x / np) + np - x;
}

// Neumaier compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

}  // namespace

double bernoulli_kl(double a, double b) {
    double out = 0.0;
    if (a > 0.0) {
        if (b <= 0.0) return std::numeric_limits<double>::infinity();
        out += a * std::log(a / b);
    }
    if (a < 1.0) {
        if (b >= 1.0) return std::numeric_limits<double>::infinity();
        out += (1.0 - a) * std::log1p(-a) - (1.0 - a) * std::log1p(-b);
    }
    return std::max(out, 0.0);
}

double binomial_pmf(std::size_t k, std::size_t m, double q) {
    if (k > m) return 0.0;
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("binomial_pmf: q outside [0,1]");
    const double p = q;
    const double r = 1.0 - q;
    const auto n = static_cast<double>(m);
    const auto x = static_cast<double>(k);
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (r == 0.0) return k == m ? 1.0 : 0.0;
    if (k == 0) {
        const double lc = p < 0.1 ? -bd0(n, n * r) - n * p : n * std::log(r);
        return std::exp(lc);
    }
    if (k == m) {
        const double lc = r < 0.1 ? -bd0(n, n * p) - n * r : n * std::log(p);
        return std::exp(lc);
    }
    const double lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(x, n * p) - bd0(n - x, n * r);
    const double lf = std::log(2.0 * std::numbers::pi) + std::log(x) + std::log1p(-x / n);
    return std::exp(lc - 0.5 * lf);
}

double binomial_cdf(std::size_t k, std::size_t m, double q) {
    if (m < 1) throw std::domain_error("binomial_cdf: trials must be >= 1");
    if (k > m) throw std::domain_error("binomial_cdf: k > m");
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("binomial_cdf: q outside [0,1]");
    if (k == m || q == 0.0) return 1.0;
    if (q == 1.0) return 0.0;

    constexpr double kNegligible = 1e-18;
    const double mean = static_cast<double>(m) * q;
    const auto mode = static_cast<std::size_t>(std::floor(static_cast<double>(m + 1) * q));
    CompensatedSum acc;
    if (static_cast<double>(k) < mean) {
        // Lower tail, walking down from k; terms shrink monotonically below the mode.
        for (std::size_t j = k + 1; j-- > 0;) {
            const double t = binomial_pmf(j, m, q);
            acc.add(t);
            if (j < mode && t <= kNegligible * acc.value()) break;
        }
        return std::clamp(acc.value(), 0.0, 1.0);
    }
    // 1 - upper tail, walking up from k+1.
    for (std::size_t j = k + 1; j <= m; ++j) {
        const double t = binomial_pmf(j, m, q);
        acc.add(t);
        if (j > mode && t <= kNegligible * std::max(acc.value(), std::numeric_limits<double>::min()))
            break;
    }
    return std::clamp(1.0 - acc.value(), 0.0, 1.0);
}

double hoeffding_pvalue(double r_hat, double alpha, std::size_t m) {
    check_inputs(r_hat, alpha, m);
    const double gap = std::max(alpha - r_hat, 0.0);
    return std::exp(-2.0 * static_cast<double>(m) * gap * gap);
}

std::size_t bentkus_count(double r_hat, std::size_t m) {
    const double scaled = static_cast<double>(m) * r_hat;
    const double nearest = std::round(scaled);
    const double c = std::fabs(scaled - nearest) <= 1e-9 ? nearest : std::ceil(scaled);
    return std::min(static_cast<std::size_t>(std::max(c, 0.0)), m);
}

double hb_pvalue(double r_hat, double alpha, std::size_t m) {
    check_inputs(r_hat, alpha, m);
    const double kl_term = std::exp(-static_cast<double>(m) * bernoulli_kl(std::min(r_hat, alpha), alpha));
    const double bentkus_term = std::numbers::e * binomial_cdf(bentkus_count(r_hat, m), m, alpha);
    return std::min({1.0, kl_term, bentkus_term});
}

double pvalue(PValueKind kind, double r_hat, double alpha, std::size_t m) {
    return kind == PValueKind::hoeffding ? hoeffding_pvalue(r_hat, alpha, m) : hb_pvalue(r_hat, alpha, m);
}

double combine_max(std::span<const double> pvals) {
    if (pvals.empty()) throw std::invalid_argument("combine_max: empty input");
    return *std::max_element(pvals.begin(), pvals.end());
}

}  // namespace ptest
