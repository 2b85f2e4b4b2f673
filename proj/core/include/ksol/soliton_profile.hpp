#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ksol/orbit_engine.hpp"
#include "ksol/phase_plane.hpp"
#include "ksol/sigma_core.hpp"

namespace ksol {

// One radius. The scale-free fields (ln_r, ln_u, p, q, r2_lambda*) stay finite where
// u, u_r, u_rr themselves underflow.
struct ProfileRow {
    double s = 0.0;
    double r = 0.0;
    double u = 0.0;
    double u_r = 0.0;
    double u_rr = 0.0;
    double ln_r = 0.0;
    double ln_u = 0.0;
    double p = 0.0;  // r u_r / u = -x
    double q = 0.0;  // r^2 u_rr / u
    double X = 0.0;
    double Z = 0.0;
    double dX = 0.0;
    double dZ = 0.0;
    double r2_lambda1 = 0.0;
    double r2_lambda2 = 0.0;
    bool local = false;

    double lambda1() const;
    double lambda2() const;
    RadialEigenPair eigen_pair(int n, int k) const;
};

struct ProfileTable {
    SolitonParams params;
    double alpha = 0.0;  // u(0)
    std::vector<ProfileRow> rows;
    std::size_t excluded = 0;  // trace samples outside the admissible strip
};

// u(r) from an origin orbit; alpha is the seed used for the local solution.
ProfileTable reconstruct_u(const OrbitTrace& trace, const SolitonParams& p);

struct OriginCheck {
    double u0 = 0.0;               // extrapolated lim_{r->0} u
    double u0_expected = 0.0;      // from the seed
    double coefficient = 0.0;      // fitted r^2 coefficient of u^{m-1}
    double coefficient_expected = 0.0;  // (1-m)/2 (f(0)/n)^{1/k}
    double rel_u0_error = 0.0;
    double rel_coefficient_error = 0.0;
};

OriginCheck origin_expansion_check(const ProfileTable& table, const SolitonParams& p);

struct RatePrediction {
    std::string regime;
    double u_exponent = 0.0;
    std::optional<double> log_power;      // power of ln r
    std::optional<double> loglog_power;   // power of ln ln r
    std::optional<double> z_exponent;     // d ln Z / ds
};

RatePrediction expected_rate(const SolitonParams& p, const OrbitClass& cls);

struct RateFit {
    double exponent = 0.0;
    double log_power = 0.0;
    double intercept = 0.0;
    double rss = 0.0;  // weighted
};

struct TailWindow {
    double decades = 1.0;               // fit over the last `decades` of r
    std::optional<double> ln_r_min;     // overrides decades
};

struct RateReport {
    RateFit pure;
    std::optional<RateFit> with_log;
    bool log_selected = false;
    double ln_r_lo = 0.0;  // span of the rows actually used
    double ln_r_hi = 0.0;
    std::size_t rows_used = 0;

    const RateFit& selected() const { return log_selected ? *with_log : pure; }
};

// Weighted (weights proportional to r) least squares of ln u against ln r, and ln ln r.
RateReport tail_rate(const ProfileTable& table, const TailWindow& window = {});

// Residuals are relative to the sum of the absolute values of the terms on both sides.
struct ResidualReport {
    double max_rel_residual = 0.0;
    double max_raw_residual = 0.0;  // including rejected rows
    std::size_t rows_checked = 0;
    std::size_t rows_rejected = 0;  // lambda2 <= 0
    bool accepted() const { return rows_checked > 0 && rows_rejected == 0; }
};

// sigma_k(lambda) against u^{(1-m)k} (2 theta + rho + (1-m) theta r u_r / u)^k, both times r^{2k}.
ResidualReport elliptic_residual(const ProfileTable& table, const SolitonParams& p);

struct PotentialReport {
    std::vector<double> s;
    std::vector<double> phi;
    std::vector<double> phi_s;
    double max_rel_residual = 0.0;  // theta w_s / w + rho against sigma_k^{1/k}(g), relative to the terms
};

// phi_s = 2 theta Z^{1/k}, gauged to vanish where the integrator took over from the local solution.
PotentialReport potential_phi(const ProfileTable& table, const SolitonParams& p);

// Self-similar solution of dg/dt = -sigma_k^{1/k}(g) g with g = u^{1-m}|dx|^2.
// rho != 0: u(x,t) = tau^a u(|x| tau^b), tau = rho (T - t), a = (2 theta + rho)/((1-m) rho), b = theta / rho.
// rho = 0:  tau = exp(-t), a = 2 theta / (1-m), b = theta.
class FlowSolution {
public:
    FlowSolution(ProfileTable table, double T = 0.0);

    double operator()(double r, double t) const;
    // Profile u(eta) itself; origin expansion below the first row, throws above the last.
    double profile(double eta) const;
    double scale(double t) const;  // tau(t)
    double amplitude_exponent() const { return a_; }
    double radius_exponent() const { return b_; }
    double r_max() const;

private:
    ProfileTable table_;
    double T_;
    double a_ = 0.0;
    double b_ = 0.0;
};

FlowSolution flow_solution(const ProfileTable& table, double T = 0.0);

}  // namespace ksol
