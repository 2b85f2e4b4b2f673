#include "ksol/orbit_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "ksol/errors.hpp"

namespace ksol {

namespace {

using V2 = ode::Vec<2>;
using M2 = ode::Mat<2>;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
// Sample-to-sample decrease tolerated by the monotonicity monitor (integrator noise is ~rtol).
constexpr double kMonotoneTol = 1e-9;
// The quadrature runs on the dense output, which is one order below the step itself.
constexpr double kIdentitySlack = 10.0;

// Right-hand side in (X, ln Z).
struct LogRhs {
    Chart chart;
    const SolitonParams* p;
    std::size_t evals = 0;

    V2 operator()(double, const V2& y) {
        ++evals;
        const double X = y[0];
        if (!(X >= 0.0) || !std::isfinite(y[1])) return {kNaN, kNaN};
        const double x = kth_root(X, p->k);
        V2 out;
        out[0] = -(p->n - 2 * p->k) * (1.0 - x / p->a) * X + std::exp(y[1]) * branch_profile(chart, x, *p);
        out[1] = 2.0 * p->k * (1.0 - 2.0 * x / p->a);
        return out;
    }
};

M2 log_jacobian(Chart chart, const V2& y, const SolitonParams& p) {
    const double X = std::max(y[0], 1e-300);
    const double x = kth_root(X, p.k);
    const double dxdX = x / (p.k * X);
    const double eL = std::exp(y[1]);
    M2 J{};
    J[0][0] = (2 * p.k - p.n) + p.m * (p.k + 1) * x + eL * branch_profile_derivative(chart, x, p) * dxdX;
    J[0][1] = eL * branch_profile(chart, x, p);
    J[1][0] = -(4.0 * p.k / p.a) * dxdX;
    J[1][1] = 0.0;
    return J;
}

double spectral_radius(const M2& J) {
    const Eigen2 e = eigen2(Mat2{J[0], J[1]});
    return std::max(std::abs(e.values[0]), std::abs(e.values[1]));
}

template <class G>
double locate(const ode::DenseStep<2>& d, G g, double tol) {
    double lo = d.t0, hi = d.t1();
    const double glo0 = g(d(lo));
    bool neg_lo = glo0 < 0.0;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((g(d(mid)) < 0.0) == neg_lo)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

OrbitSample make_sample(double s, const V2& y, const V2& f, bool local = false) {
    OrbitSample smp;
    smp.s = s;
    smp.X = y[0];
    smp.Z = std::exp(y[1]);
    smp.dX = f[0];
    smp.dZ = smp.Z * f[1];
    smp.local = local;
    return smp;
}

struct PendingEvent {
    double t;
    EventKind kind;
    bool terminal;
    std::string detail;
};

OrbitTrace run(Chart chart, double s_start, V2 y, const SolitonParams& p, const IntegratorControls& c,
               OrbitTrace trace) {
    if (!(y[0] > 0.0) || !std::isfinite(y[1])) throw DomainError("integrate: start needs X > 0 and Z > 0");
    LogRhs rhs{chart, &p};
    const bool origin = chart == Chart::Origin;
    const bool B_in = origin && p.n > 2 * p.k && p.rho > 0.0;
    const bool asym_enabled = origin && p.gamma < p.a;
    const double X_bound = p.X_bound();
    const double gk = ipow(p.gamma, p.k);
    const double ln_blow = std::log(c.blow_up_Z);

    double s = s_start;
    V2 f = rhs(s, y);
    double h = c.h_init;
    bool stiff = false;
    bool asym_seen = false;
    ode::PIController pi;
    constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();  // start of the current convergence run
    double since_B = kUnset, since_axis = kUnset;

    trace.first_integrated = trace.samples.size();
    trace.samples.push_back(make_sample(s, y, f));

    auto gXB = [&](const V2& v) { return v[0] - p.X_B; };
    auto gAsym = [&](const V2& v) { return kth_root(std::max(v[0], 0.0), p.k) - (p.gamma - c.asymptote_band); };
    auto gExit = [&](const V2& v) { return v[0] - X_bound; };
    auto gBlow = [&](const V2& v) { return v[1] - ln_blow; };

    std::size_t steps = 0;
    auto finish = [&](EventKind kind, double at_s, const V2& at_y, const std::string& detail) {
        trace.termination = kind;
        OrbitEvent ev;
        ev.kind = kind;
        ev.s = at_s;
        ev.at = {at_y[0], std::exp(at_y[1])};
        ev.detail = detail;
        trace.events.push_back(ev);
    };

    while (true) {
        if (s >= c.s_max) {
            finish(EventKind::ReachedSMax, s, y, "");
            break;
        }
        if (++steps > c.max_steps) {
            finish(EventKind::StepFloor, s, y, "step budget exhausted");
            break;
        }
        h = std::min({h, c.h_max, c.s_max - s});
        if (asym_enabled && !stiff) {
            const double x = kth_root(std::max(y[0], 0.0), p.k);
            if (p.gamma - x < c.asymptote_band && std::abs(f[0]) > 0.0)
                h = std::min(h, std::max(std::abs(gk - y[0]) / std::abs(f[0]), 1e-9));
        }
        if (h < c.h_min) {
            finish(EventKind::StepFloor, s, y, "step below floor");
            break;
        }

        V2 y1{}, f1{};
        ode::DenseStep<2> d;
        ode::StepResult r;
        if (stiff) {
            const M2 J = log_jacobian(chart, y, p);
            r = ode::rosenbrock23_step<2>(rhs, s, y, f, J, h, c.rtol, c.atol, y1, f1, d);
        } else {
            r = ode::dopri5_step<2>(rhs, s, y, f, h, c.rtol, c.atol, y1, f1, d);
        }
        if (!r.ok) {
            ++trace.rejected_steps;
            h *= 0.25;
            continue;
        }
        if (r.err > 1.0) {
            ++trace.rejected_steps;
            if (stiff)
                h *= std::max(0.2, 0.8 * std::pow(r.err, -1.0 / 3.0));
            else
                h *= std::max(0.2, 0.9 * std::pow(r.err, -0.2));
            continue;
        }
        if (stiff) ++trace.stiff_steps;

        // Events inside [s, s + h].
        std::vector<PendingEvent> pending;
        if ((gXB(y) < 0.0) != (gXB(y1) < 0.0))
            pending.push_back({locate(d, gXB, c.event_tol), EventKind::CrossedXB, c.stop_at_X_B, ""});
        if (asym_enabled && !asym_seen && gAsym(y) < 0.0 && gAsym(y1) >= 0.0)
            pending.push_back({locate(d, gAsym, c.event_tol), EventKind::ReachedAsymptote, false, ""});
        if (origin && gExit(y) < 0.0 && gExit(y1) >= 0.0)
            pending.push_back({locate(d, gExit, c.event_tol), EventKind::ExitedRegion, true, ""});
        if (gBlow(y) < 0.0 && gBlow(y1) >= 0.0)
            pending.push_back({locate(d, gBlow, c.event_tol), EventKind::BlowUpZ, true, ""});
        std::sort(pending.begin(), pending.end(), [](const auto& a, const auto& b) { return a.t < b.t; });

        trace.steps.push_back(d);
        bool stop = false;
        for (const auto& ev : pending) {
            const V2 ye = d(ev.t);
            if (ev.kind == EventKind::ReachedAsymptote) asym_seen = true;
            if (ev.terminal) {
                trace.samples.push_back(make_sample(ev.t, ye, rhs(ev.t, ye)));
                finish(ev.kind, ev.t, ye, ev.detail);
                stop = true;
                break;
            }
            OrbitEvent oe;
            oe.kind = ev.kind;
            oe.s = ev.t;
            oe.at = {ye[0], std::exp(ye[1])};
            trace.events.push_back(oe);
        }
        if (stop) break;

        s += h;
        y = y1;
        f = f1;
        trace.samples.push_back(make_sample(s, y, f));

        // Convergence to a critical point, sustained over converge_span.
        const double Z = std::exp(y[1]);
        const double dX = f[0], dZ = Z * f[1];
        if (B_in) {
            const double dist = std::hypot(y[0] - p.X_B, Z - *p.Z_B);
            if (dist < c.converge_dist && std::hypot(dX, dZ) < c.converge_rhs) {
                if (std::isnan(since_B)) since_B = s;
                if (s - since_B >= c.converge_span) {
                    finish(EventKind::ConvergedCritical, s, y, "B");
                    break;
                }
            } else {
                since_B = kUnset;
            }
        }
        if (Z < c.converge_dist && std::abs(dX) < c.converge_rhs && std::abs(dZ) < c.converge_rhs && f[1] < 0.0) {
            if (std::isnan(since_axis)) since_axis = s;
            if (s - since_axis >= c.converge_span) {
                finish(EventKind::ConvergedCritical, s, y, "axis");
                break;
            }
        } else {
            since_axis = kUnset;
        }

        // Stiffness switching on the spectral radius of the Jacobian.
        if (y[0] > 0.0) {
            const double rad = spectral_radius(log_jacobian(chart, y, p));
            if (!stiff && rad > c.stiff_on) {
                stiff = true;
            } else if (stiff && rad < c.stiff_off) {
                stiff = false;
                pi = ode::PIController{};
            }
        }

        if (stiff) {
            h *= std::min(5.0, std::max(0.2, 0.8 * std::pow(std::max(r.err, 1e-12), -1.0 / 3.0)));
        } else {
            h *= pi.factor(r.err);
            pi.accept(r.err);
        }
    }
    trace.rhs_evaluations += rhs.evals;
    return trace;
}

}  // namespace

std::string to_string(EventKind kind) {
    switch (kind) {
        case EventKind::CrossedXB: return "crossed_X_B";
        case EventKind::ReachedAsymptote: return "reached_asymptote";
        case EventKind::ExitedRegion: return "exited_region";
        case EventKind::ConvergedCritical: return "converged_critical";
        case EventKind::BlowUpZ: return "blow_up_Z";
        case EventKind::StepFloor: return "step_floor";
        case EventKind::ReachedSMax: return "reached_s_max";
    }
    return "unknown";
}

std::string to_string(OrbitKind kind) {
    switch (kind) {
        case OrbitKind::TypeGamma: return "TypeGamma";
        case OrbitKind::TypeB: return "TypeB";
        case OrbitKind::GeneralizedB: return "GeneralizedB";
        case OrbitKind::TypeA: return "TypeA";
        case OrbitKind::GeneralizedA: return "GeneralizedA";
        case OrbitKind::NonAdmissible: return "NonAdmissible";
        case OrbitKind::Undetermined: return "Undetermined";
    }
    return "unknown";
}

bool OrbitTrace::has_event(EventKind kind) const {
    return std::any_of(events.begin(), events.end(), [&](const OrbitEvent& e) { return e.kind == kind; });
}

OrbitTrace integrate(const LocalSolution& start, const SolitonParams& p, const IntegratorControls& controls) {
    if (start.tail.t.empty()) throw DomainError("integrate: empty local solution");
    OrbitTrace trace;
    trace.params = p;
    trace.controls = controls;
    trace.chart = start.tail.chart;
    trace.alpha = start.alpha;
    const std::size_t N = start.tail.t.size();
    const std::size_t stride = std::max<std::size_t>(1, controls.local_stride);
    for (std::size_t i = 0; i + 1 < N; i += stride) {
        const PhaseState st = start.state(i);
        const PhaseVelocity v = branch_rhs(trace.chart, st.X, st.Z, p);
        OrbitSample smp{start.tail.t[i], st.X, st.Z, v.dX, v.dZ, true};
        trace.samples.push_back(smp);
    }
    const PhaseState end = start.end_state();
    return run(trace.chart, start.s0, {end.X, std::log(end.Z)}, p, controls, std::move(trace));
}

OrbitTrace integrate_from(PhaseState start, double s_start, Chart chart, const SolitonParams& p,
                          const IntegratorControls& controls) {
    if (!(start.Z > 0.0)) throw DomainError("integrate_from: Z must be positive");
    OrbitTrace trace;
    trace.params = p;
    trace.controls = controls;
    trace.chart = chart;
    return run(chart, s_start, {start.X, std::log(start.Z)}, p, controls, std::move(trace));
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t count = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    f.count = x.size();
    if (x.size() < 2) return f;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

}  // namespace

OrbitClass classify_orbit(const OrbitTrace& trace, const SolitonParams& p) {
    OrbitClass cls;
    if (trace.samples.empty()) {
        cls.reason = "empty trace";
        return cls;
    }
    const auto first = trace.samples.begin() + static_cast<std::ptrdiff_t>(trace.first_integrated);
    const double s_first = first->s, s_end = trace.last().s;

    {
        std::vector<double> ss, ll, rz;
        for (auto it = first; it != trace.samples.end(); ++it)
            if (it->s >= s_end - 5.0 && it->Z > 0.0) {
                ss.push_back(it->s);
                ll.push_back(std::log(it->Z));
            }
        cls.log_z_slope = fit_line(ss, ll).slope;
        ss.clear();
        for (auto it = first; it != trace.samples.end(); ++it)
            if (it->s >= s_first + 0.5 * (s_end - s_first) && it->Z > 0.0) {
                ss.push_back(it->s);
                rz.push_back(kth_root(it->Z, p.k));
            }
        const LineFit lf = fit_line(ss, rz);
        cls.root_z_slope = lf.slope;
        cls.root_z_r2 = lf.r2;
    }

    const OrbitEvent& term = trace.events.back();
    switch (trace.termination) {
        case EventKind::ExitedRegion:
            cls.kind = OrbitKind::NonAdmissible;
            cls.s_exit = term.s;
            cls.reason = "left the admissible strip";
            return cls;
        case EventKind::ConvergedCritical:
            if (term.detail == "B") {
                cls.kind = OrbitKind::TypeB;
                cls.reason = "converged to B";
                return cls;
            }
            cls.X_inf = term.at.X;
            if (p.n == 2 * p.k) {
                cls.kind = OrbitKind::GeneralizedA;
                cls.reason = "Z -> 0 on the degenerate axis";
            } else if (std::abs(term.at.X - p.X_A) <= 1e-6 * p.X_A) {
                cls.kind = OrbitKind::TypeA;
                cls.reason = "converged to A";
            } else {
                cls.kind = OrbitKind::GeneralizedA;
                cls.reason = "Z -> 0 away from A";
            }
            return cls;
        case EventKind::BlowUpZ:
            cls.kind = OrbitKind::TypeGamma;
            cls.reason = "Z blew up along the asymptote";
            return cls;
        default: break;
    }

    // Not terminated by an event: read the tail.
    std::vector<const OrbitSample*> win;
    for (auto it = first; it != trace.samples.end(); ++it)
        if (it->s >= s_end - 0.25 * (s_end - s_first)) win.push_back(&*it);
    if (win.size() < 3) {
        cls.reason = "too few samples";
        return cls;
    }
    bool x_up = true, z_up = true, z_down = true;
    double zmin = kInf, zmax = 0.0;
    for (std::size_t i = 1; i < win.size(); ++i) {
        if (win[i]->X < win[i - 1]->X) x_up = false;
        if (win[i]->Z < win[i - 1]->Z) z_up = false;
        if (win[i]->Z > win[i - 1]->Z) z_down = false;
    }
    for (auto* w : win) {
        zmin = std::min(zmin, w->Z);
        zmax = std::max(zmax, w->Z);
    }
    const OrbitSample& last = trace.last();
    if (p.gamma <= p.a / 2.0 && x_up && z_up && last.X < p.X_bound()) {
        cls.kind = OrbitKind::TypeGamma;
        cls.reason = "X rises toward gamma^k while Z grows";
        return cls;
    }
    if (z_down && cls.log_z_slope < 0.0 && last.Z < 1e-3) {
        cls.X_inf = last.X;
        const bool at_A = p.n != 2 * p.k && std::abs(last.X - p.X_A) <= 1e-6 * p.X_A;
        cls.kind = at_A ? OrbitKind::TypeA : OrbitKind::GeneralizedA;
        cls.reason = "Z decaying at s_max";
        return cls;
    }
    if (p.n > 2 * p.k && p.rho > 0.0 && zmin > 1e-3 * *p.Z_B) {
        cls.kind = OrbitKind::GeneralizedB;
        cls.reason = "bounded oscillation without convergence by s_max";
        return cls;
    }
    cls.reason = "no rule matched";
    return cls;
}

std::vector<OrbitKind> expected_kinds(const SolitonParams& p) {
    const bool shrinker = p.rho > 0.0;
    switch (p.regime()) {
        case Regime::Supercritical:
            if (!shrinker) return {OrbitKind::TypeGamma};
            if (p.rho <= 2.0 * p.theta) return {OrbitKind::TypeB, OrbitKind::GeneralizedB};
            return {OrbitKind::TypeA, OrbitKind::TypeB, OrbitKind::GeneralizedB};
        case Regime::Critical:
            if (!shrinker) return {OrbitKind::TypeGamma};
            return {OrbitKind::GeneralizedA};
        case Regime::Subcritical:
            if (p.rho < 2.0 * p.theta) return {OrbitKind::NonAdmissible};
            return {OrbitKind::TypeA};
    }
    return {};
}

std::vector<Violation> monotonicity_monitor(const OrbitTrace& trace, const SolitonParams& p) {
    std::vector<Violation> out;
    double s_cross = kInf;
    for (const auto& e : trace.events)
        if (e.kind == EventKind::CrossedXB) {
            s_cross = e.s;
            break;
        }
    const auto& S = trace.samples;
    for (std::size_t i = 1; i < S.size(); ++i) {
        if (S[i].s <= s_cross && S[i].X < S[i - 1].X - kMonotoneTol * std::max(1.0, S[i].X))
            out.push_back({"monotone_X", S[i].s, S[i].X - S[i - 1].X, "X decreased before reaching X_B"});
        if (S[i].X < p.X_B && S[i - 1].X < p.X_B && S[i].Z < S[i - 1].Z * (1.0 - kMonotoneTol))
            out.push_back({"monotone_Z", S[i].s, S[i].Z - S[i - 1].Z, "Z decreased while X < X_B"});
    }
    return out;
}

std::vector<Violation> z_lower_bound_monitor(const OrbitTrace& trace, const SolitonParams& p) {
    std::vector<Violation> out;
    if (trace.chart != Chart::Origin) return out;
    const double rate = p.k * p.rho / p.theta;
    const double bound = p.X_bound();
    const auto& S = trace.samples;
    const std::size_t i0 = trace.first_integrated;
    if (i0 >= S.size()) return out;
    const double L0 = std::log(S[i0].Z), s0 = S[i0].s;
    for (std::size_t i = i0 + 1; i < S.size(); ++i) {
        if (!(S[i].Z > 0.0) || S[i].X >= bound) break;
        const double L = std::log(S[i].Z), Lp = std::log(S[i - 1].Z);
        const double tol = 1e-9 * (1.0 + std::abs(L));
        const double local = L - Lp + rate * (S[i].s - S[i - 1].s);
        const double global = L - L0 + rate * (S[i].s - s0);
        if (local < -tol || global < -tol)
            out.push_back({"z_lower_bound", S[i].s, std::min(local, global), "Z fell below the exponential bound"});
    }
    return out;
}

std::vector<Violation> self_intersection_monitor(const OrbitTrace& trace) {
    std::vector<Violation> out;
    struct P {
        double x, y, s;
    };
    std::vector<P> pts;
    const auto& S = trace.samples;
    PhaseState terminal{S.back().X, S.back().Z};
    const bool converged = trace.termination == EventKind::ConvergedCritical;
    const double excl = 1e-6 * (1.0 + std::hypot(terminal.X, terminal.Z));
    for (const auto& smp : S) {
        if (!(smp.Z > 0.0)) continue;
        if (converged && std::hypot(smp.X - terminal.X, smp.Z - terminal.Z) < excl) break;
        if (!pts.empty() && pts.back().x == smp.X && pts.back().y == std::log(smp.Z)) continue;
        pts.push_back({smp.X, std::log(smp.Z), smp.s});
    }
    if (pts.size() < 4) return out;
    double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
    for (const auto& q : pts) {
        xmin = std::min(xmin, q.x);
        xmax = std::max(xmax, q.x);
        ymin = std::min(ymin, q.y);
        ymax = std::max(ymax, q.y);
    }
    const double wx = std::max(xmax - xmin, 1e-300), wy = std::max(ymax - ymin, 1e-300);
    for (auto& q : pts) {
        q.x = (q.x - xmin) / wx;
        q.y = (q.y - ymin) / wy;
    }
    const std::size_t M = pts.size() - 1;
    const int G = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(M))), 1, 1024);
    std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(G) * G);
    auto cell_of = [G](double v) { return std::clamp(static_cast<int>(v * G), 0, G - 1); };
    for (std::size_t i = 0; i < M; ++i) {
        const int x0 = cell_of(std::min(pts[i].x, pts[i + 1].x)), x1 = cell_of(std::max(pts[i].x, pts[i + 1].x));
        const int y0 = cell_of(std::min(pts[i].y, pts[i + 1].y)), y1 = cell_of(std::max(pts[i].y, pts[i + 1].y));
        for (int cx = x0; cx <= x1; ++cx)
            for (int cy = y0; cy <= y1; ++cy) cells[static_cast<std::size_t>(cx) * G + cy].push_back(i);
    }
    auto orient = [](const P& a, const P& b, const P& c) {
        const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        return (v > 0.0) - (v < 0.0);
    };
    std::unordered_set<std::uint64_t> seen;
    for (const auto& cell : cells)
        for (std::size_t u = 0; u < cell.size(); ++u)
            for (std::size_t v = u + 1; v < cell.size(); ++v) {
                std::size_t i = cell[u], j = cell[v];
                if (i > j) std::swap(i, j);
                if (j <= i + 1) continue;
                const P &a = pts[i], &b = pts[i + 1], &c = pts[j], &d = pts[j + 1];
                if (orient(a, b, c) * orient(a, b, d) < 0 && orient(c, d, a) * orient(c, d, b) < 0) {
                    if (!seen.insert(static_cast<std::uint64_t>(i) * (M + 1) + j).second) continue;
                    out.push_back({"self_intersection", a.s, c.s, "segments cross"});
                }
            }
    return out;
}

IdentityReport log_z_identity(const OrbitTrace& trace, const SolitonParams& p) {
    static constexpr double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                     -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                     0.7966664774136267,  0.9602898564975363};
    static constexpr double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                     0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                     0.2223810344533745, 0.1012285362903763};
    IdentityReport rep;
    const IntegratorControls& c = trace.controls;
    const double n = p.n, k = p.k;
    auto rate = [&](double X) { return 2.0 * k * (1.0 - 2.0 * k * kth_root(std::max(X, 0.0), p.k) / (n + 2.0 * k)); };
    for (const auto& d : trace.steps) {
        double I = 0.0, Iabs = 0.0;
        for (int g = 0; g < 8; ++g) {
            const double t = d.t0 + 0.5 * d.h * (gx[g] + 1.0);
            const double r = rate(d(t)[0]);
            I += gw[g] * r;
            Iabs += gw[g] * std::abs(r);
        }
        I *= 0.5 * d.h;
        Iabs *= 0.5 * d.h;
        const double dL = d.y1[1] - d.r1[1];
        const double err = std::abs(dL - I);
        const double tol = c.atol + c.rtol * (std::max(std::abs(d.r1[1]), std::abs(d.y1[1])) + Iabs);
        rep.max_abs_error = std::max(rep.max_abs_error, err);
        rep.max_tolerance_ratio = std::max(rep.max_tolerance_ratio, err / tol);
        if (err > kIdentitySlack * tol) ++rep.violations;
        ++rep.steps_checked;
    }
    return rep;
}

namespace {

// Z as a function of X along an increasing stretch of samples, cubic Hermite in X.
class MonotoneCurve {
public:
    explicit MonotoneCurve(const OrbitTrace& tr) {
        for (const auto& s : tr.samples) {
            if (s.X > tr.params.X_B * (1.0 + 1e-9)) break;  // keeps the located crossing
            if (!xs_.empty() && s.X <= xs_.back()) {
                if (s.X < xs_.back()) break;
                continue;
            }
            if (!(s.dX > 0.0)) break;
            xs_.push_back(s.X);
            zs_.push_back(s.Z);
            ds_.push_back(s.dZ / s.dX);
        }
    }
    double lo() const { return xs_.empty() ? kInf : xs_.front(); }
    double hi() const { return xs_.empty() ? -kInf : xs_.back(); }
    double operator()(double X) const {
        auto it = std::upper_bound(xs_.begin(), xs_.end(), X);
        std::size_t j = static_cast<std::size_t>(it - xs_.begin());
        j = std::clamp<std::size_t>(j, 1, xs_.size() - 1);
        const double x0 = xs_[j - 1], x1 = xs_[j], hh = x1 - x0;
        const double t = (X - x0) / hh, t1 = 1.0 - t;
        return (1 + 2 * t) * t1 * t1 * zs_[j - 1] + t * t * (3 - 2 * t) * zs_[j] + t * t1 * t1 * hh * ds_[j - 1] -
               t * t * t1 * hh * ds_[j];
    }
    std::size_t size() const { return xs_.size(); }

private:
    std::vector<double> xs_, zs_, ds_;
};

}  // namespace

BarrierReport barrier_compare(const SolitonParams& p, double alpha, double alpha_bar,
                              const IntegratorControls& controls) {
    if (!(p.rho > 2.0 * p.theta)) throw NotApplicable("barrier_compare: needs rho > 2 theta");
    IntegratorControls c = controls;
    c.stop_at_X_B = true;
    const OrbitTrace origin = integrate(picard_solve(alpha, p), p, c);
    const OrbitTrace mirrored = integrate(picard_solve_at_A(alpha_bar, p), p, c);
    const MonotoneCurve Zc(origin), Vc(mirrored);
    BarrierReport rep;
    if (Zc.size() < 4 || Vc.size() < 4) throw ConvergenceError("barrier_compare: too few monotone samples");
    rep.X_lo = std::max({0.01, Zc.lo(), Vc.lo()});
    rep.X_hi = std::min({Zc.hi(), Vc.hi(), p.X_B});
    rep.min_gap = kInf;
    constexpr int grid = 2000;
    for (int i = 0; i <= grid; ++i) {
        const double X = rep.X_lo + (rep.X_hi - rep.X_lo) * i / grid;
        const double V = Vc(X), Z = Zc(X);
        rep.min_gap = std::min(rep.min_gap, (V - Z) / V);
        ++rep.matched;
    }
    rep.min_f_minus_h = kInf;
    for (int i = 0; i < grid; ++i) {
        const double x = 0.5 * p.a * i / grid;
        rep.min_f_minus_h = std::min(rep.min_f_minus_h, f_profile(x, p) - h_profile(x, p));
    }
    rep.f_above_h = rep.min_f_minus_h > 0.0;
    rep.holds = rep.min_gap >= -1e-9 && rep.f_above_h;
    return rep;
}

}  // namespace ksol
