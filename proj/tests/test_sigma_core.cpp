#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ksol/errors.hpp"
#include "ksol/sigma_core.hpp"

namespace ksol {
namespace {

std::vector<double> random_list(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = d(rng);
    return v;
}

TEST(Binomial, SmallValuesAndSymmetry) {
    EXPECT_EQ(binomial(5, 2), 10u);
    EXPECT_EQ(binomial(7, 0), 1u);
    EXPECT_EQ(binomial(7, 8), 0u);
    EXPECT_EQ(binomial(64, 32), 1832624140942590534ull);
    for (int n = 0; n <= 30; ++n)
        for (int r = 0; r <= n; ++r) EXPECT_EQ(binomial(n, r), binomial(n, n - r));
    EXPECT_THROW(binomial(65, 1), DomainError);
}

TEST(SigmaK, KnownValues) {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    EXPECT_DOUBLE_EQ(sigma_k(v, 1), 10.0);
    EXPECT_DOUBLE_EQ(sigma_k(v, 2), 35.0);
    EXPECT_DOUBLE_EQ(sigma_k(v, 3), 50.0);
    EXPECT_DOUBLE_EQ(sigma_k(v, 4), 24.0);
    const auto all = sigma_all(v, 4);
    EXPECT_DOUBLE_EQ(all[0], 1.0);
    EXPECT_THROW(sigma_k(v, 5), DomainError);
    EXPECT_THROW(sigma_k(v, 0), DomainError);
}

TEST(SigmaK, RecurrenceMatchesSubsetEnumeration) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = 1 + trial % 8;
        const auto v = random_list(rng, n);
        for (int k = 1; k <= n; ++k) {
            const double a = sigma_k(v, k), b = sigma_k_by_subsets(v, k);
            double scale = 0.0;
            for (double x : v) scale = std::max(scale, std::abs(x));
            EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::pow(scale, k) * static_cast<double>(binomial(n, k))));
        }
    }
}

TEST(SigmaK, NewtonDiagonalIsPartialDerivative) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + trial % 7;
        const int k = 1 + trial % n;
        auto v = random_list(rng, n);
        const auto T = newton_tensor_diag(v, k - 1);
        for (int i = 0; i < n; ++i) {
            const double h = 1e-5;
            auto vp = v, vm = v;
            vp[i] += h;
            vm[i] -= h;
            const double fd = (sigma_k(vp, k) - sigma_k(vm, k)) / (2 * h);
            EXPECT_NEAR(T[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(SigmaK, NewtonTraceIdentity) {
    // sum_i sigma_{k-1}(lambda | i) = (n - k + 1) sigma_{k-1}(lambda)
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + trial % 6;
        const int k = 1 + trial % n;
        const auto v = random_list(rng, n);
        const auto T = newton_tensor_diag(v, k - 1);
        double sum = 0.0;
        for (double t : T) sum += t;
        const double want = (n - k + 1) * (k == 1 ? 1.0 : sigma_k(v, k - 1));
        EXPECT_NEAR(sum, want, 1e-10 * std::max(1.0, std::abs(want)));
    }
}

TEST(Cone, RadialCheckMatchesFullCone) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    int positives = 0;
    for (int trial = 0; trial < 5000; ++trial) {
        const int n = 3 + trial % 8;
        const int k = 1 + (trial / 8) % n;
        RadialEigenPair pair{d(rng), d(rng), n, k};
        const auto full = pair.expand();
        const bool want = in_positive_cone(full, k);
        positives += want;
        EXPECT_EQ(is_admissible_radial(pair), want) << "n=" << n << " k=" << k << " l1=" << pair.lambda1
                                                    << " l2=" << pair.lambda2;
    }
    EXPECT_GT(positives, 500);
}

TEST(Cone, FirstOrderConeAllowsNegativeLambda2) {
    RadialEigenPair pair{10.0, -1.0, 4, 1};
    EXPECT_TRUE(is_admissible_radial(pair));
    EXPECT_TRUE(in_positive_cone(pair.expand(), 1));
    pair.k = 2;
    EXPECT_FALSE(is_admissible_radial(pair));
}

TEST(Radial, RoundSphereHasConstantEigenvalues) {
    // u^{1-m} = 4 / (1 + r^2)^2 is the round metric; both eigenvalues are u^{1-m} / 2.
    for (int n : {3, 4, 5, 7})
        for (int k = 1; k <= n; ++k) {
            const double m = static_cast<double>(n - 2 * k) / (n + 2 * k);
            const double e = 1.0 / (1.0 - m);
            for (double r : {0.1, 0.7, 1.0, 3.0}) {
                const double q = 1.0 + r * r;
                const double u = std::pow(4.0 / (q * q), e);
                // d/dr ln u = -4 r e / q
                const double g = -4.0 * r * e / q;
                const double g_r = -4.0 * e * (1.0 - r * r) / (q * q);
                const double u_r = u * g, u_rr = u * (g_r + g * g);
                const auto pair = radial_schouten_eigenvalues(u, u_r, u_rr, r, n, k);
                const double conformal = std::pow(u, 1.0 - m);
                EXPECT_NEAR(pair.lambda1 / conformal, 0.5, 1e-12);
                EXPECT_NEAR(pair.lambda2 / conformal, 0.5, 1e-12);
                const double sk = radial_sigma_l(pair, k) / std::pow(conformal, k);
                EXPECT_NEAR(sk, static_cast<double>(binomial(n, k)) / std::ldexp(1.0, k), 1e-9 * sk);
            }
        }
}

TEST(Radial, RejectsBadInput) {
    EXPECT_THROW(radial_schouten_eigenvalues(0.0, 0.0, 0.0, 1.0, 4, 1), DomainError);
    EXPECT_THROW(radial_schouten_eigenvalues(1.0, 0.0, 0.0, 0.0, 4, 1), DomainError);
    EXPECT_THROW(radial_schouten_eigenvalues(1.0, 0.0, 0.0, 1.0, 2, 1), DomainError);
}

}  // namespace
}  // namespace ksol
