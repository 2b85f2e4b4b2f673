// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is the number of failing criteria that are not listed as known deviations.
// With --strict every failing criterion counts.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <deque>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ksol/pipeline.hpp"

using namespace ksol;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
    // Non-empty when the measured value is known to contradict a stated closed form.
    const char* known_deviation = "";
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Every full run made by criteria 6-10, for the residual and monitor sweeps.
struct RunLog {
    std::deque<SolitonRun> runs;  // references stay valid as runs are added
    const SolitonRun& add(SolitonRun r) {
        runs.push_back(std::move(r));
        return runs.back();
    }
};

RunLog g_log;

const SolitonRun& solve(int n, int k, double rho, double theta = 1.0, double u0 = 1.0) {
    return g_log.add(solve_soliton(make_params(n, k, rho, theta), u0));
}

std::vector<double> random_list(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = d(rng);
    return v;
}

Outcome sigma_oracle() {
    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = 1 + trial % 8;
        const auto v = random_list(rng, n);
        for (int k = 1; k <= n; ++k) {
            const double a = sigma_k(v, k), b = sigma_k_by_subsets(v, k);
            // relative to sigma_k(|lambda|), which bounds the rounding of either sum
            std::vector<double> mag(v.size());
            std::transform(v.begin(), v.end(), mag.begin(), [](double x) { return std::abs(x); });
            worst = std::max(worst, std::abs(a - b) / sigma_k(mag, k));
        }
    }
    return {worst < 1e-12, fmt("max relative gap %.2e over 10^4 lists (tol 1e-12)", worst)};
}

Outcome newton_identity() {
    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
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
            worst = std::max(worst, std::abs(T[i] - fd) / std::max(1.0, std::abs(fd)));
        }
    }
    return {worst < 1e-6, fmt("max relative gap %.2e over 10^3 cases (tol 1e-6)", worst)};
}

Outcome admissibility() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    int mismatches = 0, inside = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = 3 + trial % 8;
        const int k = 1 + (trial / 8) % n;
        RadialEigenPair pair{d(rng), d(rng), n, k};
        const bool full = in_positive_cone(pair.expand(), k);
        inside += full;
        mismatches += is_admissible_radial(pair) != full;
    }
    return {mismatches == 0, fmt("%d mismatches in 10^4 draws (%d inside the cone)", mismatches, inside)};
}

Outcome critical_certificate() {
    const auto p = make_params(4, 1, 1.0, 1.0);
    const PhaseState B{p.X_B, p.Z_B.value_or(NAN)};
    const auto v = system_rhs(B, p);
    const double rhs = std::hypot(v.dX, v.dZ);
    const auto L = jacobian_B(p);
    const auto e0 = L.eig.values[0], e1 = L.eig.values[1];
    const bool at = std::abs(B.X - 3.0) < 1e-15 && std::abs(B.Z - 1.0) < 1e-15 && rhs < 1e-12;
    const bool tr = std::abs(L.trace + 3.0) < 1e-12;
    const bool det = std::abs(L.det - 2.0) < 1e-12;
    const bool eig = L.eig.real && std::abs(e0.real() + 1.0) < 1e-12 && std::abs(e1.real() + 2.0) < 1e-12;
    return {at && tr && det && eig,
            fmt("B=(%.15g,%.15g) |RHS|=%.1e; trace %.15g (stated -3), det %.15g (stated 2), eigenvalues "
                "%.6g%+.6gi, %.6g%+.6gi (stated -1,-2)",
                B.X, B.Z, rhs, L.trace, L.det, e0.real(), e0.imag(), e1.real(), e1.imag())};
}

Outcome picard() {
    double rate = 0.0, resid = 0.0, lim = 0.0;
    int runs = 0;
    for (auto [n, k] : {std::pair{4, 1}, {5, 2}, {4, 2}, {3, 2}})
        for (double rho : {-1.0, 0.0, 1.0}) {
            const auto p = make_params(n, k, rho, 1.0);
            const auto L = picard_solve(seed_for_center_value(1.0, p), p);
            rate = std::max(rate, L.contraction_rate);
            resid = std::max(resid, L.residual);
            lim = std::max({lim, rel(L.limit_X, L.thresholds.amplitude), rel(L.limit_Z, L.thresholds.z_amplitude)});
            ++runs;
        }
    return {rate < 0.9 && resid < 1e-10 && lim < 1e-8,
            fmt("%d combos: rate %.3g (tol 0.9), residual %.1e (tol 1e-10), limits %.1e (tol 1e-8)", runs, rate,
                resid, lim)};
}

Outcome regime_table() {
    struct Cell {
        int n, k;
        double rho;
    };
    std::vector<Cell> grid;
    for (auto [n, k] : {std::pair{4, 1}, {5, 2}, {6, 2}})
        for (double rho : {-1.0, 0.0, 1.0, 2.0, 5.0}) grid.push_back({n, k, rho});
    for (auto [n, k] : {std::pair{4, 2}, {6, 3}})
        for (double rho : {-1.0, 0.0, 1.0, 3.0}) grid.push_back({n, k, rho});
    for (auto [n, k] : {std::pair{3, 2}, {5, 3}})
        for (double rho : {-1.0, 1.0, 1.9, 2.0, 3.0}) grid.push_back({n, k, rho});
    int bad = 0;
    std::string first;
    for (const auto& c : grid) {
        const auto& run = solve(c.n, c.k, c.rho);
        const auto want = expected_kinds(run.params);
        if (std::find(want.begin(), want.end(), run.cls.kind) == want.end()) {
            if (!bad) first = fmt(" first (%d,%d,%g) -> %s", c.n, c.k, c.rho, to_string(run.cls.kind).c_str());
            ++bad;
        }
    }
    return {bad == 0, fmt("%zu cells, %d mismatches%s", grid.size(), bad, first.c_str())};
}

Outcome expander_rate() {
    const auto& run = solve(4, 1, -1.0);
    const double e = rel(run.cls.log_z_slope, 1.0);
    return {run.cls.kind == OrbitKind::TypeGamma && e < 0.01,
            fmt("d ln Z/ds = %.8g over the last 5 units, predicted 1 (rel %.1e, tol 1e-2)", run.cls.log_z_slope, e)};
}

Outcome steady_rate() {
    const auto& run = solve(4, 1, 0.0);
    const auto fit = tail_rate(run.table);
    if (!fit.with_log) return {false, "tail too short for the logarithmic fit"};
    const double ee = rel(fit.with_log->exponent, -3.0), el = rel(fit.with_log->log_power, 1.5);
    return {run.cls.root_z_r2 > 0.999 && ee < 0.02 && el < 0.02,
            fmt("R^2 of Z^{1/k}(s) %.8f (tol 0.999); u ~ r^%.6g (ln r)^%.6g against r^-3 (ln r)^1.5 (rel %.1e, %.1e; "
                "tol 2e-2)",
                run.cls.root_z_r2, fit.with_log->exponent, fit.with_log->log_power, ee, el)};
}

Outcome shrinker_rate() {
    const auto& run = solve(4, 1, 1.0);
    const auto fit = tail_rate(run.table);
    const double e = rel(fit.pure.exponent, -3.0);
    return {run.cls.kind == OrbitKind::TypeB && e < 0.01,
            fmt("%s, u ~ r^%.8g against r^-3 (rel %.1e, tol 1e-2)", to_string(run.cls.kind).c_str(), fit.pure.exponent, e)};
}

// u ~ r^{-x} with x = X_inf^{1/2}; writing the exponent as -2(1+d) gives d = x/2 - 1.
Outcome critical_shrinker() {
    const auto& run = solve(4, 2, 1.0);
    if (run.cls.kind != OrbitKind::GeneralizedA || !run.cls.X_inf)
        return {false, "classifier returned " + to_string(run.cls.kind)};
    const double x = std::sqrt(*run.cls.X_inf);
    const double d = x / 2.0 - 1.0;
    const auto fit = tail_rate(run.table);
    const double e = rel(fit.pure.exponent, -2.0 * (1.0 + d));
    return {d > 0.0 && d <= 0.5 && e < 0.02,
            fmt("X_inf %.8g, d = X_inf^{1/2}/2 - 1 = %.6g in (0, 1/2]; u ~ r^%.6g against -2(1+d) = %.6g (rel %.1e, "
                "tol 2e-2); 1 - X_inf^{1/2}/2 = %.6g",
                *run.cls.X_inf, d, fit.pure.exponent, -2.0 * (1.0 + d), e, 1.0 - x / 2.0)};
}

Outcome barrier() {
    const auto p = make_params(4, 1, 5.0, 1.0);
    bool ok = true;
    double gap = INFINITY, fh = INFINITY, lo = 0.0, hi = INFINITY;
    for (double alpha_bar : {0.1, 1.0, 10.0}) {
        const auto br = barrier_compare(p, seed_for_center_value(1.0, p), alpha_bar);
        ok = ok && br.holds && br.f_above_h && br.X_lo <= 0.01 + 1e-12 && br.X_hi >= p.X_B * (1.0 - 1e-9);
        gap = std::min(gap, br.min_gap);
        fh = std::min(fh, br.min_f_minus_h);
        lo = std::max(lo, br.X_lo);
        hi = std::min(hi, br.X_hi);
    }
    return {ok, fmt("X in [%.3g, %.6g]: min (V_- - Z)/V_- = %.4g, min f - h = %.4g", lo, hi, gap, fh)};
}

Outcome residuals() {
    double worst = 0.0;
    std::size_t rejected = 0, checked = 0;
    for (const auto& run : g_log.runs) {
        const auto r = elliptic_residual(run.table, run.params);
        worst = std::max(worst, r.max_rel_residual);
        rejected += r.rows_rejected;
        checked += r.rows_checked;
    }
    return {worst < 1e-6 && rejected == 0,
            fmt("%zu orbits, %zu rows, max relative residual %.2e (tol 1e-6), %zu rejected", g_log.runs.size(), checked,
                worst, rejected)};
}

Outcome monitors() {
    std::size_t mono = 0, zlb = 0, self = 0, ident = 0;
    double ratio = 0.0;
    for (const auto& run : g_log.runs) {
        mono += monotonicity_monitor(run.trace, run.params).size();
        zlb += z_lower_bound_monitor(run.trace, run.params).size();
        self += self_intersection_monitor(run.trace).size();
        const auto id = log_z_identity(run.trace, run.params);
        ident += id.violations;
        ratio = std::max(ratio, id.max_tolerance_ratio);
    }
    return {mono + zlb + self + ident == 0,
            fmt("%zu orbits: monotone %zu, Z bound %zu, self-intersection %zu, ln Z identity %zu (max error %.2g x "
                "tolerance)",
                g_log.runs.size(), mono, zlb, self, ident, ratio)};
}

// At k = 1: O a saddle, B an attractor, determinant n - 2 and trace -(n-2)(n+2)/4 as stated.
Outcome first_order() {
    int checked = 0, kinds_bad = 0, det_bad = 0, trace_bad = 0, pipeline_bad = 0;
    double trace_gap = 0.0;
    for (int n : {3, 4, 5, 6, 8})
        for (double rho : {0.5, 1.0, 3.0}) {
            const auto p = make_params(n, 1, rho, 1.0);
            const auto cps = critical_points(p);
            const auto L = jacobian_B(p);
            kinds_bad += cps[0].kind != PointKind::Saddle || L.kind != PointKind::Attractor;
            det_bad += std::abs(L.det - (n - 2)) > 1e-12;
            const double stated = -(n - 2) * (n + 2) / 4.0;
            trace_gap = std::max(trace_gap, std::abs(L.trace - stated));
            trace_bad += std::abs(L.trace - stated) > 1e-12;
            const auto& run = solve(n, 1, rho);
            const auto want = expected_kinds(p);
            pipeline_bad += std::find(want.begin(), want.end(), run.cls.kind) == want.end();
            ++checked;
        }
    return {kinds_bad + det_bad + trace_bad + pipeline_bad == 0,
            fmt("%d cases: kinds %d bad, det %d bad, pipeline %d bad, trace %d bad (max gap %.3g from the stated "
                "closed form; measured trace is -(n-2) theta/rho)",
                checked, kinds_bad, det_bad, pipeline_bad, trace_bad, trace_gap)};
}

}  // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
    const char* trace_note = "the linearization at B has trace -(n-2k) theta/rho, confirmed by finite differences";
    const std::vector<Criterion> criteria = {
        {1, "sigma_k recurrence against subset enumeration", sigma_oracle},
        {2, "Newton tensor diagonal against finite differences", newton_identity},
        {3, "radial admissibility against the full cone", admissibility},
        {4, "critical point B for (4,1,1,1)", critical_certificate, trace_note},
        {5, "Picard convergence", picard},
        {6, "regime table", regime_table},
        {7, "expander Z rate (4,1,-1,1)", expander_rate},
        {8, "steady rate (4,1,0,1)", steady_rate},
        {9, "shrinker TypeB rate (4,1,1,1)", shrinker_rate},
        {10, "n = 2k shrinker (4,2,1,1)", critical_shrinker},
        {11, "barrier for rho > 2 theta (4,1,5,1)", barrier},
        {12, "elliptic residual along every orbit of 6-10", residuals},
        {13, "invariant monitors across every run", monitors},
        {14, "k = 1 cross-check", first_order, trace_note},
    };
    int passed = 0, unexpected = 0, known = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const bool is_known = !o.pass && *c.known_deviation;
        std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
        if (is_known) std::printf("       known deviation: %s\n", c.known_deviation);
        std::fflush(stdout);
        passed += o.pass;
        known += is_known;
        unexpected += !o.pass && (strict || !is_known);
    }
    std::printf("%d/%zu passed, %d known deviations, %d unexpected failures\n", passed, criteria.size(), known,
                unexpected);
    return unexpected;
}
