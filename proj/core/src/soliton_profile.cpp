#include "ksol/soliton_profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ksol/errors.hpp"

namespace ksol {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// r^2 lambda from the scale-free pair (p, q).
void scaled_lambdas(double p_, double q_, double m, double& l1, double& l2) {
    l1 = -0.5 * (1.0 - m) * (q_ - 0.25 * (5.0 - m) * p_ * p_);
    l2 = -0.5 * (1.0 - m) * p_ * (1.0 + 0.25 * (1.0 - m) * p_);
}

// sigma_k of (l1, l2 x (n-1)).
double radial_sigma(double l1, double l2, int n, int k) {
    return radial_sigma_l(RadialEigenPair{l1, l2, n, k}, k);
}

// sigma_k(r^2 lambda) for one row, with the same expression summed in absolute values. Near A and
// along the asymptote the terms cancel to many digits, so residuals are measured against the latter.
struct ScaledSigma {
    double value = 0.0;
    double terms = 0.0;
};

ScaledSigma row_sigma(const ProfileRow& row, const SolitonParams& p) {
    const double m = p.m, a = 0.5 * (1.0 - m);
    const double x = -row.p;
    const double x_s = x + x * x - row.q;
    const double q_terms = std::abs(x) + x * x + std::abs(x_s);
    const double l1t = a * q_terms + a * 0.25 * (5.0 - m) * row.p * row.p;
    const double l2t = a * std::abs(row.p) + a * 0.25 * (1.0 - m) * row.p * row.p;
    const double c1 = static_cast<double>(binomial(p.n - 1, p.k - 1));
    const double c2 = p.k < p.n ? static_cast<double>(binomial(p.n - 1, p.k)) : 0.0;
    ScaledSigma out;
    out.value = radial_sigma(row.r2_lambda1, row.r2_lambda2, p.n, p.k);
    out.terms = ipow(l2t, p.k - 1) * (c1 * l1t + c2 * l2t);
    return out;
}

// Weighted least squares by modified Gram-Schmidt; cols.size() <= 3.
struct LsqResult {
    std::array<double, 3> coef{};
    double rss = 0.0;
};

LsqResult weighted_lstsq(const std::vector<std::vector<double>>& cols, const std::vector<double>& y,
                         const std::vector<double>& w) {
    const std::size_t N = y.size(), M = cols.size();
    std::vector<std::vector<double>> Q(M, std::vector<double>(N));
    std::vector<double> b(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double sw = std::sqrt(w[i]);
        for (std::size_t j = 0; j < M; ++j) Q[j][i] = sw * cols[j][i];
        b[i] = sw * y[i];
    }
    std::array<std::array<double, 3>, 3> R{};
    for (std::size_t j = 0; j < M; ++j) {
        for (std::size_t l = 0; l < j; ++l) {
            double d = 0.0;
            for (std::size_t i = 0; i < N; ++i) d += Q[l][i] * Q[j][i];
            R[l][j] = d;
            for (std::size_t i = 0; i < N; ++i) Q[j][i] -= d * Q[l][i];
        }
        double nn = 0.0;
        for (double v : Q[j]) nn += v * v;
        nn = std::sqrt(nn);
        if (!(nn > 0.0)) throw DomainError("tail_rate: degenerate fit columns");
        R[j][j] = nn;
        for (double& v : Q[j]) v /= nn;
    }
    std::array<double, 3> qb{};
    for (std::size_t j = 0; j < M; ++j) {
        double d = 0.0;
        for (std::size_t i = 0; i < N; ++i) d += Q[j][i] * b[i];
        qb[j] = d;
        for (std::size_t i = 0; i < N; ++i) b[i] -= d * Q[j][i];
    }
    LsqResult out;
    for (std::size_t jj = M; jj-- > 0;) {
        double v = qb[jj];
        for (std::size_t l = jj + 1; l < M; ++l) v -= R[jj][l] * out.coef[l];
        out.coef[jj] = v / R[jj][jj];
    }
    for (double v : b) out.rss += v * v;
    return out;
}

}  // namespace

double ProfileRow::lambda1() const { return r2_lambda1 * std::exp(-2.0 * ln_r); }
double ProfileRow::lambda2() const { return r2_lambda2 * std::exp(-2.0 * ln_r); }
RadialEigenPair ProfileRow::eigen_pair(int n, int k) const { return {lambda1(), lambda2(), n, k}; }

ProfileTable reconstruct_u(const OrbitTrace& trace, const SolitonParams& p) {
    if (trace.chart != Chart::Origin) throw ParameterError("reconstruct_u: needs an orbit from the origin");
    ProfileTable table;
    table.params = p;
    table.alpha = center_value_for_seed(trace.alpha, p);
    const double m = p.m;
    double last_s = -std::numeric_limits<double>::infinity();
    for (const auto& smp : trace.samples) {
        if (!in_admissible_region({smp.X, smp.Z}, p) || !(smp.s > last_s)) {
            ++table.excluded;
            continue;
        }
        last_s = smp.s;
        ProfileRow row;
        row.s = smp.s;
        row.ln_r = smp.s;
        row.r = std::exp(smp.s);
        row.X = smp.X;
        row.Z = smp.Z;
        row.dX = smp.dX;
        row.dZ = smp.dZ;
        row.local = smp.local;
        const double x = kth_root(smp.X, p.k);
        const double x_s = smp.dX * x / (p.k * smp.X);
        row.p = -x;
        row.q = x + x * x - x_s;
        row.ln_u = (std::log(smp.Z) / p.k - 2.0 * smp.s) / (1.0 - m);
        row.u = std::exp(row.ln_u);
        row.u_r = row.u * row.p / row.r;
        row.u_rr = row.u * row.q / (row.r * row.r);
        scaled_lambdas(row.p, row.q, m, row.r2_lambda1, row.r2_lambda2);
        table.rows.push_back(row);
    }
    return table;
}

OriginCheck origin_expansion_check(const ProfileTable& table, const SolitonParams& p) {
    // Fit u^{m-1} = A + B r^2 + C r^4 over the first half of the local rows.
    std::vector<const ProfileRow*> use;
    double s_lo = 0.0, s_hi = 0.0;
    for (const auto& row : table.rows)
        if (row.local) {
            if (use.empty()) s_lo = row.s;
            s_hi = row.s;
            use.push_back(&row);
        }
    if (use.size() < 8) throw DomainError("origin_expansion_check: too few rows near the origin");
    const double s_cut = 0.5 * (s_lo + s_hi);
    std::vector<std::vector<double>> cols(3);
    std::vector<double> y, w;
    const double r2_scale = std::exp(2.0 * s_cut);
    for (const auto* row : use) {
        if (row->s > s_cut) break;
        const double t = std::exp(2.0 * row->s) / r2_scale;
        cols[0].push_back(1.0);
        cols[1].push_back(t);
        cols[2].push_back(t * t);
        y.push_back(std::exp((p.m - 1.0) * row->ln_u));
        w.push_back(1.0);
    }
    if (y.size() < 4) throw DomainError("origin_expansion_check: too few rows near the origin");
    const LsqResult fit = weighted_lstsq(cols, y, w);
    OriginCheck chk;
    chk.u0 = std::pow(fit.coef[0], 1.0 / (p.m - 1.0));
    chk.u0_expected = table.alpha;
    chk.coefficient = fit.coef[1] / r2_scale;
    chk.coefficient_expected = 0.5 * (1.0 - p.m) * kth_root(p.f0 / p.n, p.k);
    chk.rel_u0_error = std::abs(chk.u0 - chk.u0_expected) / chk.u0_expected;
    chk.rel_coefficient_error = std::abs(chk.coefficient - chk.coefficient_expected) / chk.coefficient_expected;
    return chk;
}

RatePrediction expected_rate(const SolitonParams& p, const OrbitClass& cls) {
    RatePrediction out;
    const double m = p.m;
    switch (cls.kind) {
        case OrbitKind::TypeGamma:
            if (p.rho == 0.0) {
                out.regime = "steady";
                if (p.n > 2 * p.k) {
                    out.u_exponent = -2.0 / (1.0 - m);
                    out.log_power = 1.0 / (1.0 - m);
                } else {
                    out.u_exponent = -2.0;
                    out.log_power = (p.k - 2.0) / p.k;
                    if (p.k == 2) out.loglog_power = 0.5;
                }
            } else {
                out.regime = p.rho < 0.0 ? "expander" : "gamma";
                out.u_exponent = -(2.0 + p.rho / p.theta) / (1.0 - m);
                out.z_exponent = -p.k * p.rho / p.theta;
            }
            break;
        case OrbitKind::TypeB:
        case OrbitKind::GeneralizedB:
            out.regime = "shrinker_slow";
            out.u_exponent = -2.0 / (1.0 - m);
            break;
        case OrbitKind::TypeA:
            out.regime = "shrinker_fast";
            out.u_exponent = -4.0 / (1.0 - m);
            break;
        case OrbitKind::GeneralizedA:
            out.regime = "generalized_A";
            out.u_exponent = cls.X_inf ? -kth_root(*cls.X_inf, p.k) : kNaN;
            break;
        default:
            out.regime = "none";
            out.u_exponent = kNaN;
    }
    return out;
}

RateReport tail_rate(const ProfileTable& table, const TailWindow& window) {
    std::vector<const ProfileRow*> tail;
    for (const auto& row : table.rows)
        if (!row.local && row.ln_r > 0.0) tail.push_back(&row);
    if (tail.empty()) throw DomainError("tail_rate: no rows with r > 1; increase s_max");
    RateReport rep;
    rep.ln_r_hi = tail.back()->ln_r;
    const double lo = window.ln_r_min ? *window.ln_r_min : rep.ln_r_hi - window.decades * std::log(10.0);
    std::vector<std::vector<double>> cols(3);
    std::vector<double> y, w;
    bool log_ok = true;
    for (const auto* row : tail) {
        if (row->ln_r < lo) continue;
        if (y.empty()) rep.ln_r_lo = row->ln_r;
        cols[0].push_back(1.0);
        cols[1].push_back(row->ln_r);
        if (row->ln_r > 1.0) cols[2].push_back(std::log(row->ln_r));
        else log_ok = false;
        y.push_back(row->ln_u);
        w.push_back(std::exp(row->ln_r - rep.ln_r_hi));
    }
    rep.rows_used = y.size();
    if (rep.rows_used < 8 || rep.ln_r_hi - rep.ln_r_lo < 1.0)
        throw DomainError("tail_rate: tail span too short; increase s_max");

    const LsqResult pure = weighted_lstsq({cols[0], cols[1]}, y, w);
    rep.pure = {pure.coef[1], 0.0, pure.coef[0], pure.rss};
    if (log_ok) {
        const LsqResult lg = weighted_lstsq(cols, y, w);
        rep.with_log = RateFit{lg.coef[1], lg.coef[2], lg.coef[0], lg.rss};
        double wsum = 0.0;
        for (double v : w) wsum += v;
        rep.log_selected = pure.rss > 1e-12 * wsum && lg.rss < 0.1 * pure.rss;
    }
    return rep;
}

ResidualReport elliptic_residual(const ProfileTable& table, const SolitonParams& p) {
    ResidualReport rep;
    const double m = p.m;
    for (const auto& row : table.rows) {
        const ScaledSigma lhs = row_sigma(row, p);
        const double Zr = std::exp(p.k * (2.0 * row.ln_r + (1.0 - m) * row.ln_u));
        // 2 theta + rho + (1-m) theta p, written as beta (gamma + p)
        const double rhs = Zr * ipow(p.beta * (p.gamma + row.p), p.k);
        const double rhs_terms = Zr * ipow(std::abs(2.0 * p.theta + p.rho) + (1.0 - m) * p.theta * std::abs(row.p), p.k);
        const double rel = std::abs(lhs.value - rhs) / std::max(lhs.terms + rhs_terms, std::numeric_limits<double>::min());
        rep.max_raw_residual = std::max(rep.max_raw_residual, rel);
        if (!(row.r2_lambda2 > 0.0)) {
            ++rep.rows_rejected;
            continue;
        }
        ++rep.rows_checked;
        rep.max_rel_residual = std::max(rep.max_rel_residual, rel);
    }
    return rep;
}

PotentialReport potential_phi(const ProfileTable& table, const SolitonParams& p) {
    PotentialReport rep;
    const auto& R = table.rows;
    if (R.empty()) return rep;
    std::size_t gauge = 0;
    while (gauge < R.size() && R[gauge].local) ++gauge;
    if (gauge == R.size()) gauge = 0;

    std::vector<double> g(R.size()), gs(R.size());
    for (std::size_t i = 0; i < R.size(); ++i) {
        const double w = kth_root(R[i].Z, p.k);
        const double ws_over_w = R[i].dZ / (p.k * R[i].Z);
        g[i] = 2.0 * p.theta * w;
        gs[i] = g[i] * ws_over_w;

        // theta w_s / w + rho = sigma_k^{1/k}(g), compared after raising both sides to the k-th power.
        const ScaledSigma sig = row_sigma(R[i], p);
        const double lhs = R[i].Z * ipow(p.theta * ws_over_w + p.rho, p.k);
        const double lhs_terms = R[i].Z * ipow(p.theta * std::abs(ws_over_w) + std::abs(p.rho), p.k);
        rep.max_rel_residual = std::max(rep.max_rel_residual, std::abs(lhs - sig.value) / (lhs_terms + sig.terms));
    }
    rep.s.resize(R.size());
    rep.phi.assign(R.size(), 0.0);
    rep.phi_s = g;
    for (std::size_t i = 0; i < R.size(); ++i) rep.s[i] = R[i].s;
    // Hermite-corrected trapezoid.
    for (std::size_t i = 1; i < R.size(); ++i) {
        const double h = R[i].s - R[i - 1].s;
        rep.phi[i] = rep.phi[i - 1] + 0.5 * h * (g[i - 1] + g[i]) + h * h / 12.0 * (gs[i - 1] - gs[i]);
    }
    const double shift = rep.phi[gauge];
    for (double& v : rep.phi) v -= shift;
    return rep;
}

FlowSolution::FlowSolution(ProfileTable table, double T) : table_(std::move(table)), T_(T) {
    if (table_.rows.size() < 2) throw DomainError("flow_solution: profile table too short");
    const auto& p = table_.params;
    if (p.rho != 0.0) {
        a_ = (2.0 * p.theta + p.rho) / ((1.0 - p.m) * p.rho);
        b_ = p.theta / p.rho;
    } else {
        a_ = 2.0 * p.theta / (1.0 - p.m);
        b_ = p.theta;
    }
}

double FlowSolution::r_max() const { return table_.rows.back().r; }

double FlowSolution::scale(double t) const {
    const double rho = table_.params.rho;
    if (rho == 0.0) return std::exp(-t);
    const double tau = rho * (T_ - t);
    if (!(tau > 0.0))
        throw DomainError(rho > 0.0 ? "flow_solution: shrinker needs t < T" : "flow_solution: expander needs t > T");
    return tau;
}

double FlowSolution::profile(double eta) const {
    if (eta < 0.0 || !std::isfinite(eta)) throw DomainError("flow_solution: radius must be finite and nonnegative");
    const auto& p = table_.params;
    const auto& R = table_.rows;
    const double u0 = table_.alpha;
    if (eta <= R.front().r) {
        const double c = 0.5 * (1.0 - p.m) * kth_root(p.f0 / p.n, p.k);
        return std::pow(std::pow(u0, p.m - 1.0) + c * eta * eta, 1.0 / (p.m - 1.0));
    }
    if (eta > R.back().r) throw DomainError("flow_solution: radius beyond the computed profile");
    const double L = std::log(eta);
    auto it = std::upper_bound(R.begin(), R.end(), L, [](double v, const ProfileRow& row) { return v < row.ln_r; });
    if (it == R.end()) return R.back().u;
    const ProfileRow& b = *it;
    const ProfileRow& a = *(it - 1);
    const double h = b.ln_r - a.ln_r;
    const double t = (L - a.ln_r) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double lu = (2 * t3 - 3 * t2 + 1) * a.ln_u + (t3 - 2 * t2 + t) * h * a.p + (-2 * t3 + 3 * t2) * b.ln_u +
                      (t3 - t2) * h * b.p;
    return std::exp(lu);
}

double FlowSolution::operator()(double r, double t) const {
    const double tau = scale(t);
    return std::pow(tau, a_) * profile(std::abs(r) * std::pow(tau, b_));
}

FlowSolution flow_solution(const ProfileTable& table, double T) { return FlowSolution(table, T); }

}  // namespace ksol
