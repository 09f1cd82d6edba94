#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "ptest/pvalues.hpp"
#include "ptest/rng.hpp"

using namespace ptest;

TEST(Hoeffding, HandValues) {
    EXPECT_NEAR(hoeffding_pvalue(0.05, 0.1, 100), std::exp(-0.5), 1e-12);
    EXPECT_EQ(hoeffding_pvalue(0.1, 0.1, 100), 1.0);
    EXPECT_EQ(hoeffding_pvalue(0.3, 0.1, 100), 1.0);
    EXPECT_NEAR(hoeffding_pvalue(0.0, 0.1, 50), std::exp(-1.0), 1e-12);
}

TEST(PValues, DomainErrors) {
    EXPECT_THROW(hoeffding_pvalue(-0.1, 0.1, 10), std::domain_error);
    EXPECT_THROW(hoeffding_pvalue(0.1, 0.0, 10), std::domain_error);
    EXPECT_THROW(hb_pvalue(0.1, 0.1, 0), std::domain_error);
    EXPECT_THROW(hb_pvalue(1.1, 0.1, 10), std::domain_error);
    EXPECT_THROW(combine_max(std::span<const double>{}), std::invalid_argument);
}

TEST(HoeffdingBentkus, ZeroRiskSmallSample) {
    // m = 10, r = 0: KL term 0.9^10, Bentkus term e 0.9^10.
    EXPECT_NEAR(hb_pvalue(0.0, 0.1, 10), std::pow(0.9, 10), 1e-12);
}

TEST(HoeffdingBentkus, MatchesExactOracle) {
    for (const std::size_t m : {1u, 7u, 50u, 200u}) {
        for (int i = 0; i <= 10; ++i) {
            for (const double alpha : {0.01, 0.1, 0.37, 0.9}) {
                const double r = i / 10.0;
                EXPECT_NEAR(hb_pvalue(r, alpha, m), oracle::hb_exact(r, alpha, m), 1e-10)
                    << "m=" << m << " r=" << r << " alpha=" << alpha;
            }
        }
    }
}

TEST(HoeffdingBentkus, NearIntegerSnap) {
    // 0.3 * 10 is 3.0000000000000004 in doubles; the count must be 3.
    EXPECT_EQ(bentkus_count(0.3, 10), 3u);
    EXPECT_EQ(bentkus_count(0.31, 10), 4u);
    EXPECT_EQ(bentkus_count(1.0, 10), 10u);
}

TEST(Binomial, CdfMatchesRational) {
    for (const std::size_t m : {1u, 20u, 150u}) {
        for (const double q : {0.001, 0.05, 0.5, 0.93}) {
            for (std::size_t k = 0; k <= m; k += std::max<std::size_t>(1, m / 13)) {
                const double exact = oracle::binomial_cdf_exact(k, m, q).convert_to<double>();
                EXPECT_NEAR(binomial_cdf(k, m, q), exact, 1e-12) << m << " " << q << " " << k;
            }
        }
    }
}

TEST(Binomial, PmfSumsToOne) {
    double s = 0.0;
    for (std::size_t k = 0; k <= 300; ++k) s += binomial_pmf(k, 300, 0.17);
    EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(PValues, RangeAndMonotonicity) {
    for (const auto kind : {PValueKind::hoeffding, PValueKind::hoeffding_bentkus}) {
        for (const std::size_t m : {5u, 100u, 1000u}) {
            double prev_r = 0.0;
            for (int i = 0; i <= 100; ++i) {
                const double r = i / 100.0;
                const double p = pvalue(kind, r, 0.2, m);
                EXPECT_GE(p, 0.0);
                EXPECT_LE(p, 1.0);
                if (i > 0) EXPECT_GE(p, prev_r - 1e-15) << "nonincreasing in r at " << r;
                prev_r = p;
            }
            // Larger alpha gives smaller p.
            EXPECT_LE(pvalue(kind, 0.1, 0.3, m), pvalue(kind, 0.1, 0.2, m));
            // More samples give smaller p below alpha.
            EXPECT_LE(pvalue(kind, 0.1, 0.2, 2 * m), pvalue(kind, 0.1, 0.2, m));
        }
    }
}

TEST(HoeffdingBentkus, NeverAboveHoeffdingByMuch) {
    // The KL bound is tighter than Hoeffding on [0, alpha].
    for (int i = 0; i <= 20; ++i) {
        const double r = i / 100.0;
        EXPECT_LE(hb_pvalue(r, 0.2, 300), hoeffding_pvalue(r, 0.2, 300) + 1e-15);
    }
}

TEST(PValues, SuperUniformSmoke) {
    // Boundary null with 2e4 draws; the acceptance run uses 1e5.
    constexpr std::size_t draws = 20000, m = 50;
    const double alpha = 0.2;
    for (const auto kind : {PValueKind::hoeffding, PValueKind::hoeffding_bentkus}) {
        Rng rng(derive_seed(11, static_cast<std::uint64_t>(kind)));
        std::vector<double> ps(draws);
        for (auto& p : ps) {
            std::size_t k = 0;
            for (std::size_t i = 0; i < m; ++i) k += rng.bernoulli(alpha) ? 1 : 0;
            p = pvalue(kind, static_cast<double>(k) / m, alpha, m);
        }
        for (const double u : {0.01, 0.05, 0.1, 0.5}) {
            double hits = 0;
            for (const double p : ps) hits += p <= u ? 1 : 0;
            EXPECT_LE(hits / draws, u + 3.0 * std::sqrt(u * (1 - u) / draws));
        }
    }
}

TEST(CombineMax, Maximum) {
    const double p[] = {0.1, 0.7, 0.3};
    EXPECT_EQ(combine_max(p), 0.7);
}
