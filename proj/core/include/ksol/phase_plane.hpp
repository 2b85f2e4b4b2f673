#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace ksol {

enum class Regime { Supercritical, Critical, Subcritical };  // n > 2k, n = 2k, n < 2k

struct SolitonParams {
    int n = 0;
    int k = 0;
    double rho = 0.0;
    double theta = 0.0;

    double m = 0.0;      // (n-2k)/(n+2k)
    double a = 0.0;      // X_A^{1/k} = (n+2k)/k
    double beta = 0.0;   // (1-m) theta
    double gamma = 0.0;  // vertical asymptote in x = X^{1/k}
    double nu = 0.0;     // gamma - a
    double c_nk = 0.0;
    double f0 = 0.0;  // f(0) = c beta^k gamma^k
    double X_A = 0.0;
    double X_B = 0.0;
    std::optional<double> Z_B;  // only for n > 2k, rho != 0

    Regime regime() const;
    // min(gamma^k, X_A): right edge of the admissible strip.
    double X_bound() const;
};

SolitonParams make_params(int n, int k, double rho, double theta);

// Integer power, negative exponents allowed.
double ipow(double x, int e);
// X^{1/k} for X >= 0.
double kth_root(double X, int k);

double f_profile(double x, const SolitonParams& p);
double f_profile_derivative(double x, const SolitonParams& p);
double h_profile(double w, const SolitonParams& p);
double h_profile_derivative(double w, const SolitonParams& p);

struct PhaseState {
    double X = 0.0;
    double Z = 0.0;
};

struct AChartState {
    double W = 0.0;
    double V = 0.0;
};

struct PhaseVelocity {
    double dX = 0.0;
    double dZ = 0.0;
};

PhaseVelocity system_rhs(PhaseState state, const SolitonParams& p);
// Same flow written near A with w = a - x, V = Z; returns (W_s, V_s).
PhaseVelocity system_rhs_A(AChartState state, const SolitonParams& p);

// Which profile drives the origin-type system: f near O, h near A with time reversed.
enum class Chart { Origin, A };

// X_s = -(n-2k)(1 - x/a) X + Z P(x), Z_s = 2k Z (1 - 2x/a), with P = f or h.
// For Chart::A this is the A-chart system in reversed time.
PhaseVelocity branch_rhs(Chart chart, double X, double Z, const SolitonParams& p);
// Unchecked profile evaluation used inside the integrators (no domain throw).
double branch_profile(Chart chart, double x, const SolitonParams& p);
double branch_profile_derivative(Chart chart, double x, const SolitonParams& p);

using Mat2 = std::array<std::array<double, 2>, 2>;

struct Eigen2 {
    std::array<std::complex<double>, 2> values;
    bool real = true;
    // Columns are eigenvectors when real; first component normalized to 1 when possible.
    std::array<std::array<double, 2>, 2> vectors{};
};

Eigen2 eigen2(const Mat2& A);

enum class PointKind { Saddle, Source, Attractor, DegenerateLine, Degenerate };

std::string to_string(PointKind kind);

struct Linearization {
    Mat2 matrix{};
    double trace = 0.0;
    double det = 0.0;
    Eigen2 eig;
    PointKind kind = PointKind::Degenerate;
};

Mat2 jacobian(PhaseState state, const SolitonParams& p);
Linearization linearize(const Mat2& J);
Linearization restricted_jacobian_origin(const SolitonParams& p);
Linearization jacobian_B(const SolitonParams& p);

struct CriticalPoint {
    std::string name;  // "O", "A", "B", "axis"
    PhaseState at;
    PointKind kind = PointKind::Degenerate;
    bool in_region = false;
    std::optional<Linearization> linearization;
    // For the degenerate line Z = 0 when n = 2k: X in [0, line_end].
    std::optional<double> line_end;
};

std::vector<CriticalPoint> critical_points(const SolitonParams& p);

// Z > 0 and 0 < X < min(gamma^k, X_A).
bool in_admissible_region(PhaseState state, const SolitonParams& p);

}  // namespace ksol
