#include "ksol/phase_plane.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ksol/errors.hpp"
#include "ksol/sigma_core.hpp"

namespace ksol {

Regime SolitonParams::regime() const {
    if (n > 2 * k) return Regime::Supercritical;
    if (n == 2 * k) return Regime::Critical;
    return Regime::Subcritical;
}

double SolitonParams::X_bound() const { return std::min(ipow(gamma, k), X_A); }

double ipow(double x, int e) {
    if (e < 0) return 1.0 / ipow(x, -e);
    double result = 1.0;
    double base = x;
    while (e > 0) {
        if (e & 1) result *= base;
        base *= base;
        e >>= 1;
    }
    return result;
}

double kth_root(double X, int k) {
    if (X < 0.0) throw DomainError("kth_root: negative argument");
    if (X == 0.0) return 0.0;
    switch (k) {
        case 1: return X;
        case 2: return std::sqrt(X);
        case 3: return std::cbrt(X);
        default: return std::exp(std::log(X) / k);
    }
}

SolitonParams make_params(int n, int k, double rho, double theta) {
    auto fail = [](const std::string& msg) { throw ParameterError(msg); };
    if (n < 3) fail("n >= 3 required");
    if (n > 64) fail("n <= 64 required (exact binomials)");
    if (k < 1 || k > n) fail("1 <= k <= n required");
    if (!std::isfinite(rho) || !std::isfinite(theta)) fail("rho and theta must be finite");
    if (!(theta > 0.0)) fail("theta > 0 required for admissible solutions");
    if (!(2.0 * theta + rho > 0.0)) fail("2*theta + rho > 0 required (soliton positivity at the origin)");

    SolitonParams p;
    p.n = n;
    p.k = k;
    p.rho = rho;
    p.theta = theta;
    const double nd = n, kd = k;
    p.m = (nd - 2 * kd) / (nd + 2 * kd);
    p.a = (nd + 2 * kd) / kd;
    p.beta = (1.0 - p.m) * theta;
    p.gamma = p.a * (2.0 * theta + rho) / (4.0 * theta);
    p.nu = p.gamma - p.a;
    const double binom = static_cast<double>(binomial(n - 1, k - 1));
    p.c_nk = (nd + 2 * kd) / (std::ldexp(1.0, k) * binom) * std::pow(kd / (nd + 2 * kd), 1.0 - kd);
    p.f0 = p.c_nk * ipow(p.beta * p.gamma, k);
    p.X_A = ipow(p.a, k);
    p.X_B = ipow(p.a / 2.0, k);
    if (n > 2 * k && rho != 0.0) p.Z_B = (nd - 2 * kd) * binom / (kd * ipow(2.0 * rho, k));
    return p;
}

namespace {

double f_raw(double x, const SolitonParams& p) {
    return p.c_nk * ipow(p.beta, p.k) * ipow(1.0 - x / p.a, 1 - p.k) * ipow(p.gamma - x, p.k);
}

double f_raw_derivative(double x, const SolitonParams& p) {
    const double t = 1.0 - x / p.a;
    const double g = p.gamma - x;
    const double cb = p.c_nk * ipow(p.beta, p.k);
    return cb * ((p.k - 1) / p.a * ipow(t, -p.k) * ipow(g, p.k) - p.k * ipow(t, 1 - p.k) * ipow(g, p.k - 1));
}

double h_raw(double w, const SolitonParams& p) {
    return p.c_nk * ipow(p.beta, p.k) * ipow(1.0 - w / p.a, 1 - p.k) * ipow(p.nu + w, p.k);
}

double h_raw_derivative(double w, const SolitonParams& p) {
    const double t = 1.0 - w / p.a;
    const double g = p.nu + w;
    const double cb = p.c_nk * ipow(p.beta, p.k);
    return cb * ((p.k - 1) / p.a * ipow(t, -p.k) * ipow(g, p.k) + p.k * ipow(t, 1 - p.k) * ipow(g, p.k - 1));
}

void check_profile_arg(double x, const SolitonParams& p, const char* who) {
    if (!(x >= 0.0) || !(x < p.a)) {
        std::ostringstream os;
        os << who << ": argument " << x << " outside [0, " << p.a << ")";
        throw DomainError(os.str());
    }
}

}  // namespace

double f_profile(double x, const SolitonParams& p) {
    check_profile_arg(x, p, "f_profile");
    return f_raw(x, p);
}

double f_profile_derivative(double x, const SolitonParams& p) {
    check_profile_arg(x, p, "f_profile_derivative");
    return f_raw_derivative(x, p);
}

double h_profile(double w, const SolitonParams& p) {
    check_profile_arg(w, p, "h_profile");
    return h_raw(w, p);
}

double h_profile_derivative(double w, const SolitonParams& p) {
    check_profile_arg(w, p, "h_profile_derivative");
    return h_raw_derivative(w, p);
}

double branch_profile(Chart chart, double x, const SolitonParams& p) {
    return chart == Chart::Origin ? f_raw(x, p) : h_raw(x, p);
}

double branch_profile_derivative(Chart chart, double x, const SolitonParams& p) {
    return chart == Chart::Origin ? f_raw_derivative(x, p) : h_raw_derivative(x, p);
}

PhaseVelocity branch_rhs(Chart chart, double X, double Z, const SolitonParams& p) {
    const double x = kth_root(X, p.k);
    PhaseVelocity v;
    v.dX = -(p.n - 2 * p.k) * (1.0 - x / p.a) * X;
    if (Z != 0.0) v.dX += Z * branch_profile(chart, x, p);
    v.dZ = 2.0 * p.k * Z * (1.0 - 2.0 * x / p.a);
    return v;
}

PhaseVelocity system_rhs(PhaseState state, const SolitonParams& p) {
    if (state.X < 0.0) throw DomainError("system_rhs: X must be non-negative");
    return branch_rhs(Chart::Origin, state.X, state.Z, p);
}

PhaseVelocity system_rhs_A(AChartState state, const SolitonParams& p) {
    if (state.W < 0.0) throw DomainError("system_rhs_A: W must be non-negative");
    PhaseVelocity v = branch_rhs(Chart::A, state.W, state.V, p);
    return {-v.dX, -v.dZ};
}

Eigen2 eigen2(const Mat2& A) {
    const double tr = A[0][0] + A[1][1];
    const double det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
    const double half = tr / 2.0;
    const double disc = half * half - det;
    Eigen2 e;
    if (disc < 0.0) {
        const double im = std::sqrt(-disc);
        e.real = false;
        e.values = {std::complex<double>(half, im), std::complex<double>(half, -im)};
        return e;
    }
    const double root = std::sqrt(disc);
    double l1, l2;
    const double q = half + std::copysign(root, half);
    if (q != 0.0) {
        l1 = q;
        l2 = det / q;
    } else {
        l1 = l2 = 0.0;
    }
    if (l1 < l2) std::swap(l1, l2);
    e.values = {std::complex<double>(l1, 0.0), std::complex<double>(l2, 0.0)};
    const double lambdas[2] = {l1, l2};
    for (int c = 0; c < 2; ++c) {
        const double l = lambdas[c];
        double v0 = A[0][1], v1 = l - A[0][0];
        const double w0 = l - A[1][1], w1 = A[1][0];
        if (std::hypot(w0, w1) > std::hypot(v0, v1)) {
            v0 = w0;
            v1 = w1;
        }
        if (std::hypot(v0, v1) == 0.0) {
            v0 = c == 0 ? 1.0 : 0.0;
            v1 = c == 0 ? 0.0 : 1.0;
        }
        const double scale = std::abs(v0) > 1e-14 * std::abs(v1) ? v0 : v1;
        e.vectors[0][c] = v0 / scale;
        e.vectors[1][c] = v1 / scale;
    }
    return e;
}

std::string to_string(PointKind kind) {
    switch (kind) {
        case PointKind::Saddle: return "saddle";
        case PointKind::Source: return "source";
        case PointKind::Attractor: return "attractor";
        case PointKind::DegenerateLine: return "degenerate-line";
        case PointKind::Degenerate: return "degenerate";
    }
    return "unknown";
}

Linearization linearize(const Mat2& J) {
    Linearization L;
    L.matrix = J;
    L.trace = J[0][0] + J[1][1];
    L.det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    L.eig = eigen2(J);
    const double r0 = L.eig.values[0].real(), r1 = L.eig.values[1].real();
    if (r0 == 0.0 || r1 == 0.0)
        L.kind = PointKind::Degenerate;
    else if (r0 > 0.0 && r1 > 0.0)
        L.kind = PointKind::Source;
    else if (r0 < 0.0 && r1 < 0.0)
        L.kind = PointKind::Attractor;
    else
        L.kind = PointKind::Saddle;
    return L;
}

Mat2 jacobian(PhaseState state, const SolitonParams& p) {
    if (!(state.X > 0.0) || !(state.X < p.X_A))
        throw DomainError("jacobian: need 0 < X < X_A");
    const double X = state.X, Z = state.Z;
    const double x = kth_root(X, p.k);
    const double dxdX = x / (p.k * X);
    Mat2 J{};
    J[0][0] = (2 * p.k - p.n) + p.m * (p.k + 1) * x + Z * f_raw_derivative(x, p) * dxdX;
    J[0][1] = f_raw(x, p);
    J[1][0] = -(1.0 - p.m) * Z * x / X;
    J[1][1] = 2.0 * p.k - (1.0 - p.m) * p.k * x;
    return J;
}

Linearization restricted_jacobian_origin(const SolitonParams& p) {
    Mat2 J{};
    J[0][0] = -(p.n - 2 * p.k);
    J[0][1] = p.f0;
    J[1][0] = 0.0;
    J[1][1] = 2.0 * p.k;
    Linearization L = linearize(J);
    if (p.n == 2 * p.k) L.kind = PointKind::DegenerateLine;
    return L;
}

// Closed form at B = (X_B, Z_B); the (1,1) entry reduces to -(n-2k) theta / rho.
Linearization jacobian_B(const SolitonParams& p) {
    if (p.n <= 2 * p.k) throw NotApplicable("jacobian_B: B exists only for n > 2k");
    if (p.rho == 0.0) throw NotApplicable("jacobian_B: B is at infinity when rho = 0");
    const double fB = p.c_nk * std::ldexp(1.0, p.k - 1) * ipow(p.rho, p.k);
    const double d = p.n - 2 * p.k;
    Mat2 J{};
    J[0][0] = -d * p.theta / p.rho;
    J[0][1] = fB;
    J[1][0] = -d / fB;
    J[1][1] = 0.0;
    return linearize(J);
}

namespace {

Linearization linearization_A(const SolitonParams& p) {
    Mat2 J{};
    J[0][0] = p.n - 2 * p.k;
    J[0][1] = -h_raw(0.0, p);
    J[1][0] = 0.0;
    J[1][1] = -2.0 * p.k;
    return linearize(J);
}

}  // namespace

std::vector<CriticalPoint> critical_points(const SolitonParams& p) {
    std::vector<CriticalPoint> out;
    const bool A_in = (2.0 * p.theta + p.rho) / (4.0 * p.theta) > 1.0;

    CriticalPoint O;
    O.name = "O";
    O.at = {0.0, 0.0};
    O.linearization = restricted_jacobian_origin(p);
    O.kind = O.linearization->kind;
    out.push_back(O);

    if (p.n == 2 * p.k) {
        CriticalPoint line;
        line.name = "axis";
        line.at = {0.0, 0.0};
        line.kind = PointKind::DegenerateLine;
        line.line_end = p.X_bound();
        line.in_region = false;
        out.push_back(line);
        return out;
    }

    CriticalPoint A;
    A.name = "A";
    A.at = {p.X_A, 0.0};
    A.linearization = linearization_A(p);
    A.kind = A.linearization->kind;
    A.in_region = A_in;
    out.push_back(A);

    if (p.n > 2 * p.k && p.Z_B) {
        CriticalPoint B;
        B.name = "B";
        B.at = {p.X_B, *p.Z_B};
        B.linearization = jacobian_B(p);
        B.kind = B.linearization->kind;
        B.in_region = p.rho > 0.0;
        out.push_back(B);
    }
    return out;
}

bool in_admissible_region(PhaseState state, const SolitonParams& p) {
    return state.Z > 0.0 && state.X > 0.0 && state.X < p.X_bound();
}

}  // namespace ksol
