#pragma once

// Fixed-size adaptive steppers: Dormand-Prince 5(4) with dense output and a
// Rosenbrock 2(3) (Shampine's ode23s scheme) for stiff stretches.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace ksol::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;

template <std::size_t N>
inline Vec<N> axpy(const Vec<N>& y, double h, const Vec<N>& k) {
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h * k[i];
    return out;
}

template <std::size_t N>
inline bool all_finite(const Vec<N>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Scaled RMS error norm.
template <std::size_t N>
inline double error_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1, double rtol, double atol) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / N);
}

// One accepted step with its interpolant.
template <std::size_t N>
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    enum class Kind { Dopri, Hermite, Rosenbrock };
    Kind kind = Kind::Dopri;
    Vec<N> r1{}, r2{}, r3{}, r4{}, r5{};
    Vec<N> y1{};

    double t1() const { return t0 + h; }

    Vec<N> operator()(double t) const {
        const double th = h == 0.0 ? 0.0 : (t - t0) / h;
        const double th1 = 1.0 - th;
        Vec<N> out;
        if (kind == Kind::Rosenbrock) {
            // r1 = y0, r2 and r3 the linear and quadratic coefficients
            for (std::size_t i = 0; i < N; ++i) out[i] = r1[i] + th * (r2[i] + th * r3[i]);
        } else if (kind == Kind::Hermite) {
            // r1 = y0, r2 = y1, r3 = h f0, r4 = h f1
            const double h00 = (1 + 2 * th) * th1 * th1, h10 = th * th1 * th1;
            const double h01 = th * th * (3 - 2 * th), h11 = -th * th * th1;
            for (std::size_t i = 0; i < N; ++i) out[i] = h00 * r1[i] + h01 * r2[i] + h10 * r3[i] + h11 * r4[i];
        } else {
            for (std::size_t i = 0; i < N; ++i)
                out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        }
        return out;
    }

    // Time derivative of the interpolant.
    Vec<N> derivative(double t) const {
        const double th = h == 0.0 ? 0.0 : (t - t0) / h;
        Vec<N> out;
        if (kind == Kind::Rosenbrock) {
            for (std::size_t i = 0; i < N; ++i) out[i] = (r2[i] + 2 * th * r3[i]) / h;
        } else if (kind == Kind::Hermite) {
            const double d00 = 6 * th * th - 6 * th, d10 = 3 * th * th - 4 * th + 1;
            const double d01 = -6 * th * th + 6 * th, d11 = 3 * th * th - 2 * th;
            for (std::size_t i = 0; i < N; ++i)
                out[i] = (d00 * r1[i] + d01 * r2[i] + d10 * r3[i] + d11 * r4[i]) / h;
        } else {
            for (std::size_t i = 0; i < N; ++i) {
                const double a = r3[i], b = r4[i], c = r5[i];
                // th (1-th) [a + th (b + (1-th) c)] = c1 th + c2 th^2 + c3 th^3 + c4 th^4
                const double c1 = a;
                const double c2 = -a + b + c;
                const double c3 = -b - 2 * c;
                const double c4 = c;
                const double dp = r2[i] + 2 * c2 * th + 3 * c3 * th * th + 4 * c4 * th * th * th + c1;
                out[i] = dp / h;
            }
        }
        return out;
    }
};

template <std::size_t N>
inline DenseStep<N> hermite_step(double t0, double h, const Vec<N>& y0, const Vec<N>& y1, const Vec<N>& f0,
                                 const Vec<N>& f1) {
    DenseStep<N> d;
    d.t0 = t0;
    d.h = h;
    d.kind = DenseStep<N>::Kind::Hermite;
    d.r1 = y0;
    d.r2 = y1;
    for (std::size_t i = 0; i < N; ++i) {
        d.r3[i] = h * f0[i];
        d.r4[i] = h * f1[i];
    }
    d.y1 = y1;
    return d;
}

struct StepResult {
    bool ok = false;     // finite stage values
    double err = 0.0;    // scaled error norm
};

// Dormand-Prince 5(4). Uses FSAL: f0 must hold rhs(t0, y0); on return f1 holds rhs(t0+h, y1).
template <std::size_t N, class Rhs>
StepResult dopri5_step(Rhs& rhs, double t0, const Vec<N>& y0, const Vec<N>& f0, double h, double rtol, double atol,
                       Vec<N>& y1, Vec<N>& f1, DenseStep<N>& dense) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    StepResult res;
    Vec<N> y, k2, k3, k4, k5, k6, k7;
    for (std::size_t i = 0; i < N; ++i) y[i] = y0[i] + h * a21 * f0[i];
    k2 = rhs(t0 + c2 * h, y);
    for (std::size_t i = 0; i < N; ++i) y[i] = y0[i] + h * (a31 * f0[i] + a32 * k2[i]);
    k3 = rhs(t0 + c3 * h, y);
    for (std::size_t i = 0; i < N; ++i) y[i] = y0[i] + h * (a41 * f0[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(t0 + c4 * h, y);
    for (std::size_t i = 0; i < N; ++i) y[i] = y0[i] + h * (a51 * f0[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(t0 + c5 * h, y);
    for (std::size_t i = 0; i < N; ++i)
        y[i] = y0[i] + h * (a61 * f0[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = rhs(t0 + h, y);
    for (std::size_t i = 0; i < N; ++i)
        y1[i] = y0[i] + h * (a71 * f0[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    k7 = rhs(t0 + h, y1);
    if (!all_finite(k2) || !all_finite(k3) || !all_finite(k4) || !all_finite(k5) || !all_finite(k6) ||
        !all_finite(k7) || !all_finite(y1)) {
        res.ok = false;
        return res;
    }
    Vec<N> err;
    for (std::size_t i = 0; i < N; ++i)
        err[i] = h * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    res.ok = true;
    res.err = error_norm(err, y0, y1, rtol, atol);
    f1 = k7;

    dense.t0 = t0;
    dense.h = h;
    dense.kind = DenseStep<N>::Kind::Dopri;
    dense.y1 = y1;
    for (std::size_t i = 0; i < N; ++i) {
        const double ydiff = y1[i] - y0[i];
        const double bspl = h * f0[i] - ydiff;
        dense.r1[i] = y0[i];
        dense.r2[i] = ydiff;
        dense.r3[i] = bspl;
        dense.r4[i] = ydiff - h * k7[i] - bspl;
        dense.r5[i] = h * (d1 * f0[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    return res;
}

// Hairer-style PI controller for DOPRI5.
struct PIController {
    double safety = 0.9;
    double beta = 0.04;
    double fac_min = 0.2;
    double fac_max = 10.0;
    double err_old = 1e-4;

    double factor(double err) const {
        const double expo1 = 0.2 - beta * 0.75;
        double fac = std::pow(std::max(err, 1e-16), expo1) / std::pow(err_old, beta);
        fac = std::clamp(fac / safety, 1.0 / fac_max, 1.0 / fac_min);
        return 1.0 / fac;
    }
    void accept(double err) { err_old = std::max(err, 1e-4); }
};

template <std::size_t N>
inline Vec<N> solve(const Mat<N>& A, Vec<N> b) {
    static_assert(N == 2, "only 2x2 systems are used here");
    const double det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
    Vec<N> x;
    x[0] = (A[1][1] * b[0] - A[0][1] * b[1]) / det;
    x[1] = (A[0][0] * b[1] - A[1][0] * b[0]) / det;
    return x;
}

// Rosenbrock 2(3), L-stable. f0 = rhs(t0, y0), J = d rhs / dy at (t0, y0) for an autonomous system.
template <std::size_t N, class Rhs>
StepResult rosenbrock23_step(Rhs& rhs, double t0, const Vec<N>& y0, const Vec<N>& f0, const Mat<N>& J, double h,
                             double rtol, double atol, Vec<N>& y1, Vec<N>& f1, DenseStep<N>& dense) {
    const double d = 1.0 / (2.0 + std::sqrt(2.0));
    const double e32 = 6.0 + std::sqrt(2.0);
    Mat<N> W;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) W[i][j] = (i == j ? 1.0 : 0.0) - h * d * J[i][j];
    StepResult res;
    const Vec<N> k1 = solve<N>(W, f0);
    const Vec<N> F1 = rhs(t0 + 0.5 * h, axpy(y0, 0.5 * h, k1));
    Vec<N> tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = F1[i] - k1[i];
    Vec<N> k2 = solve<N>(W, tmp);
    for (std::size_t i = 0; i < N; ++i) k2[i] += k1[i];
    y1 = axpy(y0, h, k2);
    const Vec<N> F2 = rhs(t0 + h, y1);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = F2[i] - e32 * (k2[i] - F1[i]) - 2.0 * (k1[i] - f0[i]);
    const Vec<N> k3 = solve<N>(W, tmp);
    if (!all_finite(k1) || !all_finite(k2) || !all_finite(k3) || !all_finite(y1) || !all_finite(F2)) {
        res.ok = false;
        return res;
    }
    Vec<N> err;
    for (std::size_t i = 0; i < N; ++i) err[i] = h / 6.0 * (k1[i] - 2.0 * k2[i] + k3[i]);
    res.ok = true;
    res.err = error_norm(err, y0, y1, rtol, atol);
    f1 = F2;
    // Continuous extension of ode23s, exact at both ends.
    dense.t0 = t0;
    dense.h = h;
    dense.kind = DenseStep<N>::Kind::Rosenbrock;
    dense.r1 = y0;
    for (std::size_t i = 0; i < N; ++i) {
        dense.r2[i] = h * (k1[i] - 2.0 * d * k2[i]) / (1.0 - 2.0 * d);
        dense.r3[i] = h * (k2[i] - k1[i]) / (1.0 - 2.0 * d);
    }
    dense.y1 = y1;
    return res;
}

}  // namespace ksol::ode
