#include "report.hpp"

#include <cmath>
#include <cstdio>

namespace ksol::cli {

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json violations_json(const std::vector<Violation>& v, std::size_t keep = 5) {
    json list = json::array();
    for (std::size_t i = 0; i < v.size() && i < keep; ++i)
        list.push_back({{"s", v[i].s}, {"value", finite(v[i].value)}, {"detail", v[i].detail}});
    return {{"count", v.size()}, {"first", list}};
}

}  // namespace

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void csv_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
    }
    os << '\n';
}

json to_json(const SolitonParams& p) {
    return {{"n", p.n},
            {"k", p.k},
            {"rho", p.rho},
            {"theta", p.theta},
            {"m", p.m},
            {"a", p.a},
            {"beta", p.beta},
            {"gamma", p.gamma},
            {"nu", p.nu},
            {"c_nk", p.c_nk},
            {"f0", p.f0},
            {"X_A", p.X_A},
            {"X_B", p.X_B},
            {"Z_B", opt(p.Z_B)},
            {"X_bound", p.X_bound()}};
}

json to_json(const CriticalPoint& cp) {
    json j = {{"name", cp.name}, {"X", cp.at.X}, {"Z", cp.at.Z}, {"kind", to_string(cp.kind)}, {"in_region", cp.in_region}};
    if (cp.linearization) {
        const auto& L = *cp.linearization;
        json ev = json::array();
        for (const auto& v : L.eig.values) ev.push_back({{"re", v.real()}, {"im", v.imag()}});
        j["trace"] = L.trace;
        j["det"] = L.det;
        j["eigenvalues"] = ev;
    }
    if (cp.line_end) j["line_end"] = *cp.line_end;
    return j;
}

json to_json(const LocalSolution& L) {
    const auto& T = L.thresholds;
    return {{"chart", L.tail.chart == Chart::Origin ? "origin" : "A"},
            {"alpha", L.alpha},
            {"s0", L.s0},
            {"grid_points", L.tail.t.size()},
            {"iterations", L.iterations},
            {"retries", L.retries},
            {"contraction_rate", L.contraction_rate},
            {"residual", L.residual},
            {"limit_X", L.limit_X},
            {"limit_Z", L.limit_Z},
            {"limit_ratio", L.limit_ratio},
            {"thresholds",
             {{"s1", T.s1}, {"s2", T.s2}, {"s3", T.s3}, {"amplitude", T.amplitude}, {"z_amplitude", T.z_amplitude}}}};
}

json to_json(const OrbitClass& c) {
    return {{"kind", to_string(c.kind)},
            {"X_inf", opt(c.X_inf)},
            {"s_exit", opt(c.s_exit)},
            {"reason", c.reason},
            {"log_z_slope", finite(c.log_z_slope)},
            {"root_z_slope", finite(c.root_z_slope)},
            {"root_z_r2", finite(c.root_z_r2)}};
}

json to_json(const OrbitEvent& e) {
    return {{"kind", to_string(e.kind)}, {"s", e.s}, {"X", e.at.X}, {"Z", finite(e.at.Z)}, {"detail", e.detail}};
}

json to_json(const RatePrediction& r) {
    return {{"regime", r.regime},
            {"u_exponent", finite(r.u_exponent)},
            {"log_power", opt(r.log_power)},
            {"loglog_power", opt(r.loglog_power)},
            {"z_exponent", opt(r.z_exponent)}};
}

json to_json(const RateReport& r) {
    auto fit = [](const RateFit& f) {
        return json{{"exponent", f.exponent}, {"log_power", f.log_power}, {"intercept", f.intercept}, {"rss", f.rss}};
    };
    return {{"pure", fit(r.pure)},
            {"with_log", r.with_log ? fit(*r.with_log) : json(nullptr)},
            {"log_selected", r.log_selected},
            {"ln_r_lo", r.ln_r_lo},
            {"ln_r_hi", r.ln_r_hi},
            {"rows_used", r.rows_used}};
}

json to_json(const ResidualReport& r) {
    return {{"max_rel_residual", finite(r.max_rel_residual)},
            {"max_raw_residual", finite(r.max_raw_residual)},
            {"rows_checked", r.rows_checked},
            {"rows_rejected", r.rows_rejected},
            {"accepted", r.accepted()}};
}

json to_json(const OriginCheck& o) {
    return {{"u0", o.u0},
            {"u0_expected", o.u0_expected},
            {"coefficient", o.coefficient},
            {"coefficient_expected", o.coefficient_expected},
            {"rel_u0_error", o.rel_u0_error},
            {"rel_coefficient_error", o.rel_coefficient_error}};
}

json to_json(const IdentityReport& id) {
    return {{"max_abs_error", id.max_abs_error},
            {"max_tolerance_ratio", id.max_tolerance_ratio},
            {"steps_checked", id.steps_checked},
            {"violations", id.violations}};
}

json to_json(const BarrierReport& b) {
    return {{"holds", b.holds},
            {"min_gap", b.min_gap},
            {"matched", b.matched},
            {"X_lo", b.X_lo},
            {"X_hi", b.X_hi},
            {"f_above_h", b.f_above_h},
            {"min_f_minus_h", b.min_f_minus_h}};
}

json monitor_summary(const OrbitTrace& trace, const SolitonParams& p) {
    return {{"monotonicity", violations_json(monotonicity_monitor(trace, p))},
            {"z_lower_bound", violations_json(z_lower_bound_monitor(trace, p))},
            {"self_intersection", violations_json(self_intersection_monitor(trace))},
            {"log_z_identity", to_json(log_z_identity(trace, p))}};
}

}  // namespace ksol::cli
