#include <gtest/gtest.h>

#include <cmath>

#include "ksol/ode.hpp"

namespace ksol::ode {
namespace {

using V2 = Vec<2>;
using M2 = Mat<2>;

// exp(J t) y0 for a 2x2 matrix through e^{mu t} [C I + S (J - mu I)].
V2 exact(const M2& J, const V2& y0, double t) {
    const double mu = 0.5 * (J[0][0] + J[1][1]);
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    const double d2 = mu * mu - det;
    double C, S;
    if (d2 < 0.0) {
        const double w = std::sqrt(-d2);
        C = std::cos(w * t);
        S = std::sin(w * t) / w;
    } else if (d2 > 0.0) {
        const double w = std::sqrt(d2);
        C = std::cosh(w * t);
        S = std::sinh(w * t) / w;
    } else {
        C = 1.0;
        S = t;
    }
    const double e = std::exp(mu * t);
    return {e * (C * y0[0] + S * ((J[0][0] - mu) * y0[0] + J[0][1] * y0[1])),
            e * (C * y0[1] + S * (J[1][0] * y0[0] + (J[1][1] - mu) * y0[1]))};
}

struct Linear {
    M2 J;
    V2 operator()(double, const V2& y) const {
        return {J[0][0] * y[0] + J[0][1] * y[1], J[1][0] * y[0] + J[1][1] * y[1]};
    }
};

// Linearization at B for (n, k, rho, theta) = (4, 1, 1, 1).
const M2 kB = {{{-2.0, 3.0}, {-2.0 / 3.0, 0.0}}};

TEST(Dopri, GlobalErrorOnLinearSystem) {
    Linear f{kB};
    V2 y{1e-2, -3e-3}, f0 = f(0.0, y), y1, f1;
    const V2 y0 = y;
    double t = 0.0, h = 1e-3;
    PIController pi;
    double worst = 0.0;
    while (t < 10.0) {
        h = std::min(h, 10.0 - t);
        DenseStep<2> dense;
        const auto res = dopri5_step<2>(f, t, y, f0, h, 1e-12, 1e-14, y1, f1, dense);
        ASSERT_TRUE(res.ok);
        if (res.err <= 1.0) {
            // dense output in the middle of the step
            const auto mid = dense(t + 0.5 * h), want = exact(kB, y0, t + 0.5 * h);
            worst = std::max({worst, std::abs(mid[0] - want[0]), std::abs(mid[1] - want[1])});
            t += h;
            y = y1;
            f0 = f1;
            pi.accept(res.err);
        }
        h *= pi.factor(res.err);
    }
    const auto want = exact(kB, y0, 10.0);
    EXPECT_LT(std::abs(y[0] - want[0]), 1e-8 * 1e-2);
    EXPECT_LT(std::abs(y[1] - want[1]), 1e-8 * 1e-2);
    EXPECT_LT(worst, 1e-8 * 1e-2);
}

TEST(Dopri, DenseOutputEndpoints) {
    Linear f{kB};
    const V2 y0{1.0, 2.0};
    V2 y1, f1;
    DenseStep<2> dense;
    dopri5_step<2>(f, 0.0, y0, f(0.0, y0), 0.1, 1e-8, 1e-10, y1, f1, dense);
    const auto a = dense(0.0), b = dense(0.1);
    const auto da = dense.derivative(0.0), db = dense.derivative(0.1);
    const auto f0 = f(0.0, y0);
    for (int i = 0; i < 2; ++i) {
        EXPECT_NEAR(a[i], y0[i], 1e-15);
        EXPECT_NEAR(b[i], y1[i], 1e-14);
        EXPECT_NEAR(da[i], f0[i], 1e-12);
        EXPECT_NEAR(db[i], f1[i], 1e-12);
    }
}

TEST(Rosenbrock, SecondOrderOnStiffLinearSystem) {
    const M2 J = {{{-1.0, 0.0}, {1.0, -1000.0}}};
    Linear f{J};
    const V2 y0{1.0, 0.0};
    auto run = [&](int steps) {
        V2 y = y0, y1, f1;
        const double h = 1.0 / steps;
        for (int i = 0; i < steps; ++i) {
            DenseStep<2> dense;
            const auto res = rosenbrock23_step<2>(f, i * h, y, f(i * h, y), J, h, 1e-6, 1e-8, y1, f1, dense);
            EXPECT_TRUE(res.ok);
            EXPECT_NEAR(dense(i * h + h)[0], y1[0], 1e-14);
            y = y1;
        }
        const auto want = exact(J, y0, 1.0);
        return std::hypot(y[0] - want[0], y[1] - want[1]);
    };
    const double e1 = run(40), e2 = run(80);
    EXPECT_LT(e1, 1e-3);
    const double order = std::log2(e1 / e2);
    EXPECT_GT(order, 1.8);
    EXPECT_LT(order, 3.5);
}

TEST(Hermite, ReproducesCubics) {
    // y = t^3 on [1, 1.5]
    const V2 y0{1.0, 0.0}, y1{3.375, 0.0}, f0{3.0, 0.0}, f1{6.75, 0.0};
    const auto d = hermite_step<2>(1.0, 0.5, y0, y1, f0, f1);
    for (double t : {1.1, 1.25, 1.4}) {
        EXPECT_NEAR(d(t)[0], t * t * t, 1e-14);
        EXPECT_NEAR(d.derivative(t)[0], 3 * t * t, 1e-13);
    }
}

}  // namespace
}  // namespace ksol::ode
