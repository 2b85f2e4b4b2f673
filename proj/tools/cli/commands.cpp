#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "ksol/errors.hpp"

namespace ksol::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Profile rows beyond s = 40 underflow u in double precision for the fast-decaying kinds.
constexpr double kProfileSMax = 40.0;

std::string format_for(const RunConfig& cfg, const std::string& fallback, std::initializer_list<const char*> allowed) {
    const std::string f = cfg.format.empty() ? fallback : cfg.format;
    for (const char* a : allowed)
        if (f == a) return f;
    throw UsageError(cfg.command + " does not support --format " + f);
}

void write_to(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& body) {
    if (path.empty()) {
        body(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw UsageError("cannot open " + path + " for writing");
    body(file);
    if (!file) throw UsageError("write to " + path + " failed");
}

void write_json(const std::string& path, std::ostream& out, const json& j) {
    write_to(path, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

SolitonParams params_of(const RunConfig& cfg, double rho) { return make_params(cfg.n, cfg.k, rho, cfg.theta); }

double require_rho(const RunConfig& cfg) {
    if (!cfg.rho) throw UsageError("--rho is required");
    return *cfg.rho;
}

struct TailAnalysis {
    RatePrediction prediction;
    std::optional<RateReport> fit;
    std::string error;
};

TailAnalysis analyze_tail(const SolitonRun& run) {
    TailAnalysis t;
    t.prediction = expected_rate(run.params, run.cls);
    if (run.cls.kind == OrbitKind::NonAdmissible || run.cls.kind == OrbitKind::Undetermined) {
        t.error = "orbit has no decaying tail";
        return t;
    }
    try {
        t.fit = tail_rate(run.table);
    } catch (const std::exception& e) {
        t.error = e.what();
    }
    return t;
}

json tail_json(const TailAnalysis& t) {
    json j = {{"prediction", to_json(t.prediction)}};
    j["fit"] = t.fit ? to_json(*t.fit) : json(nullptr);
    if (!t.error.empty()) j["error"] = t.error;
    return j;
}

json orbit_json(const OrbitTrace& trace) {
    json events = json::array();
    for (const auto& e : trace.events) events.push_back(to_json(e));
    return {{"termination", to_string(trace.termination)},
            {"s_end", trace.last().s},
            {"X_end", trace.last().X},
            {"Z_end", trace.last().Z},
            {"samples", trace.samples.size()},
            {"steps", trace.steps.size()},
            {"stiff_steps", trace.stiff_steps},
            {"rejected_steps", trace.rejected_steps},
            {"rhs_evaluations", trace.rhs_evaluations},
            {"events", events}};
}

json critical_json(const SolitonParams& p) {
    json list = json::array();
    for (const auto& cp : critical_points(p)) list.push_back(to_json(cp));
    return list;
}

double rel_error(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

// Largest relative gap between the self-similar flow at scale 1 and the table it came from.
double flow_round_trip(const SolitonRun& run) {
    const FlowSolution flow(run.table, run.params.rho != 0.0 ? 1.0 / run.params.rho : 0.0);
    double worst = 0.0;
    for (const auto& row : run.table.rows) {
        if (row.u <= std::numeric_limits<double>::min()) continue;
        worst = std::max(worst, rel_error(flow(row.r, 0.0), row.u));
    }
    return worst;
}

// Pushes one sample of the integrated part below its predecessor.
void inject_perturbation(OrbitTrace& trace, const SolitonParams& p) {
    for (std::size_t i = std::max<std::size_t>(trace.first_integrated, 1); i < trace.samples.size(); ++i) {
        auto& prev = trace.samples[i - 1];
        auto& cur = trace.samples[i];
        if (prev.X > 0.0 && cur.X < p.X_B) {
            cur.X = prev.X * (1.0 - 1e-3);
            return;
        }
    }
}

struct Check {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string note;
};

Check below(std::string name, double measured, double threshold, std::string note = {}) {
    return {std::move(name), std::isfinite(measured) && measured < threshold, measured, threshold, std::move(note)};
}

Check count_zero(std::string name, std::size_t count) {
    return {std::move(name), count == 0, static_cast<double>(count), 0.0, {}};
}

json check_json(const Check& c) {
    const double slack = c.threshold - c.measured;
    return {{"name", c.name},
            {"pass", c.pass},
            {"measured", std::isfinite(c.measured) ? json(c.measured) : json(nullptr)},
            {"threshold", c.threshold},
            {"slack", std::isfinite(slack) ? json(slack) : json(nullptr)},
            {"note", c.note}};
}

// Tail checks; steady n = 2k carries no fitted prediction.
void tail_checks(const SolitonRun& run, const TailAnalysis& tail, std::vector<Check>& checks, json& skipped) {
    const auto& p = run.params;
    const auto kind = run.cls.kind;
    if (kind == OrbitKind::NonAdmissible) {
        skipped.push_back({{"name", "tail_rate"}, {"reason", "orbit leaves the admissible strip"}});
        return;
    }
    if (p.rho < 0.0) {
        const double want = *tail.prediction.z_exponent;
        checks.push_back(below("tail_z_exponent", rel_error(run.cls.log_z_slope, want), 0.01, "d ln Z/ds against -k rho/theta"));
        return;
    }
    if (!tail.fit) {
        checks.push_back({"tail_rate", false, kNaN, 0.0, tail.error});
        return;
    }
    const auto& fit = *tail.fit;
    const double want = tail.prediction.u_exponent;
    if (p.rho == 0.0) {
        if (p.regime() != Regime::Supercritical) {
            skipped.push_back({{"name", "tail_rate"}, {"reason", "no fitted prediction for steady n = 2k"}});
            return;
        }
        if (!fit.with_log) {
            checks.push_back({"tail_u_exponent", false, kNaN, 0.02, "tail too close to r = e for the log fit"});
            return;
        }
        checks.push_back(below("tail_u_exponent", rel_error(fit.with_log->exponent, want), 0.02));
        checks.push_back(below("tail_log_power", rel_error(fit.with_log->log_power, *tail.prediction.log_power), 0.02));
        return;
    }
    const double tol = kind == OrbitKind::GeneralizedA ? 0.02 : 0.01;
    checks.push_back(below("tail_u_exponent", rel_error(fit.pure.exponent, want), tol));
}

struct SweepRow {
    std::size_t index = 0;
    double rho = 0.0;
    double alpha = 0.0;
    std::string kind;
    std::string termination;
    double s_end = kNaN;
    double X_inf = kNaN;
    double s_exit = kNaN;
    double fit = kNaN;
    double predicted = kNaN;
    std::string error;
};

std::vector<double> sweep_rhos(const RunConfig& cfg) {
    std::vector<double> rhos = cfg.rhos;
    if (!cfg.rho_range.empty()) {
        double lo = 0.0, hi = 0.0;
        int count = 0;
        char c1 = 0, c2 = 0;
        std::istringstream is(cfg.rho_range);
        if (!(is >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1 || !is.eof())
            throw UsageError("--rho-range expects lo:hi:count");
        for (int i = 0; i < count; ++i) rhos.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    }
    if (rhos.empty() && cfg.rho) rhos.push_back(*cfg.rho);
    if (rhos.empty()) throw UsageError("sweep needs --rho, --rhos or --rho-range");
    return rhos;
}

SweepRow sweep_point(const RunConfig& cfg, std::size_t index, double rho, double alpha) {
    SweepRow row;
    row.index = index;
    row.rho = rho;
    row.alpha = alpha;
    try {
        const auto p = params_of(cfg, rho);
        const auto run = solve_soliton(p, alpha, solve_options(cfg, IntegratorControls{}.s_max));
        row.kind = to_string(run.cls.kind);
        row.termination = to_string(run.trace.termination);
        row.s_end = run.trace.last().s;
        row.X_inf = run.cls.X_inf.value_or(kNaN);
        row.s_exit = run.cls.s_exit.value_or(kNaN);
        const auto tail = analyze_tail(run);
        row.predicted = tail.prediction.u_exponent;
        if (tail.fit) row.fit = tail.fit->selected().exponent;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

std::string cell(double v) { return std::isfinite(v) ? num(v) : std::string(); }

std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

}  // namespace

SolveOptions solve_options(const RunConfig& cfg, double default_s_max) {
    SolveOptions o;
    o.controls.rtol = cfg.rtol;
    o.controls.atol = cfg.atol;
    o.controls.s_max = cfg.s_max.value_or(default_s_max);
    return o;
}

json config_json(const RunConfig& cfg) {
    json j = {{"command", cfg.command}, {"n", cfg.n}, {"k", cfg.k}};
    j["rho"] = cfg.rho ? json(*cfg.rho) : json(nullptr);
    j["theta"] = cfg.theta;
    j["alpha"] = cfg.alpha;
    j["rtol"] = cfg.rtol;
    j["atol"] = cfg.atol;
    j["s_max"] = cfg.s_max ? json(*cfg.s_max) : json(nullptr);
    j["out"] = cfg.out;
    j["format"] = cfg.format;
    j["config"] = cfg.config_file;
    if (cfg.command == "portrait") {
        j["grid"] = cfg.grid;
        j["orbits"] = cfg.orbits;
        j["z_max"] = cfg.z_max ? json(*cfg.z_max) : json(nullptr);
    }
    if (cfg.command == "sweep") {
        j["rhos"] = cfg.rhos;
        j["rho_range"] = cfg.rho_range;
        j["alphas"] = cfg.alphas;
        j["jobs"] = cfg.jobs;
    }
    if (cfg.command == "verify") j["inject_perturbation"] = cfg.inject_perturbation;
    return j;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    format_for(cfg, "json", {"json"});
    const auto p = params_of(cfg, require_rho(cfg));
    const auto run = solve_soliton(p, cfg.alpha, solve_options(cfg, IntegratorControls{}.s_max));
    const auto tail = analyze_tail(run);

    json j;
    j["config"] = config_json(cfg);
    j["params"] = to_json(p);
    j["u0"] = run.u0;
    j["seed"] = run.seed;
    j["critical_points"] = critical_json(p);
    j["local"] = to_json(run.local);
    j["orbit"] = orbit_json(run.trace);
    j["class"] = to_json(run.cls);
    j["expected_kinds"] = json::array();
    for (auto kind : expected_kinds(p)) j["expected_kinds"].push_back(to_string(kind));
    j["tail"] = tail_json(tail);
    j["residuals"] = {{"elliptic", to_json(elliptic_residual(run.table, p))},
                      {"potential", potential_phi(run.table, p).max_rel_residual},
                      {"profile_rows", run.table.rows.size()},
                      {"excluded_samples", run.table.excluded}};
    j["origin"] = to_json(origin_expansion_check(run.table, p));
    j["monitors"] = monitor_summary(run.trace, p);
    write_json(cfg.out, out, j);
    return 0;
}

int cmd_portrait(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    format_for(cfg, "csv", {"csv"});
    if (cfg.grid < 2) throw UsageError("--grid must be at least 2");
    if (cfg.orbits < 0) throw UsageError("--orbits must be nonnegative");
    const auto p = params_of(cfg, require_rho(cfg));
    const double X_hi = p.X_bound();
    const int nl = 200;

    // X_s = 0 away from Z = 0: Z = (n-2k)(1 - x/a) X / f(x).
    std::vector<std::pair<double, double>> nullcline;
    for (int i = 1; i < nl; ++i) {
        const double X = X_hi * i / nl;
        const double x = kth_root(X, p.k);
        const double f = f_profile(x, p);
        if (f > 0.0) nullcline.emplace_back(X, (p.n - 2 * p.k) * (1.0 - x / p.a) * X / f);
    }
    double Z_hi = 1.0;
    if (cfg.z_max) {
        Z_hi = *cfg.z_max;
    } else if (p.Z_B && *p.Z_B > 0.0) {
        Z_hi = 2.0 * *p.Z_B;
    } else {
        const double x = kth_root(0.5 * X_hi, p.k);
        const double Z = (p.n - 2 * p.k) * (1.0 - x / p.a) * 0.5 * X_hi / f_profile(x, p);
        if (Z > 0.0) Z_hi = 2.0 * Z;
    }
    if (!(Z_hi > 0.0)) throw UsageError("--z-max must be positive");

    IntegratorControls seeded;
    seeded.rtol = cfg.rtol;
    seeded.atol = cfg.atol;
    seeded.s_max = cfg.s_max.value_or(20.0);

    write_to(cfg.out, out, [&](std::ostream& os) {
        os << "section,id,X,Z,dX,dZ,label\n";
        int id = 0;
        for (int i = 0; i < cfg.grid; ++i)
            for (int j = 0; j < cfg.grid; ++j) {
                const double X = X_hi * (i + 0.5) / cfg.grid;
                const double Z = Z_hi * (j + 0.5) / cfg.grid;
                const auto v = system_rhs({X, Z}, p);
                csv_row(os, {"field", std::to_string(id++), num(X), num(Z), num(v.dX), num(v.dZ), ""});
            }
        for (const auto& [X, Z] : nullcline)
            csv_row(os, {"nullcline_Xs", "0", num(X), num(Z), "0", "", "Z=(n-2k)(1-x/a)X/f(x)"});
        csv_row(os, {"nullcline_Zs", "0", num(p.X_B), "0", "", "0", "X=X_B"});
        csv_row(os, {"nullcline_Zs", "0", num(p.X_B), num(Z_hi), "", "0", "X=X_B"});
        csv_row(os, {"nullcline_Zs", "1", "0", "0", "", "0", "Z=0"});
        csv_row(os, {"nullcline_Zs", "1", num(X_hi), "0", "", "0", "Z=0"});
        id = 0;
        for (const auto& cp : critical_points(p)) {
            const auto v = system_rhs(cp.at, p);
            csv_row(os, {"critical", std::to_string(id++), num(cp.at.X), num(cp.at.Z), num(v.dX), num(v.dZ),
                         cp.name + ":" + to_string(cp.kind) + (cp.in_region ? ":interior" : ":boundary")});
        }
        auto emit = [&](int oid, const OrbitTrace& trace, const std::string& label) {
            for (const auto& s : trace.samples)
                csv_row(os, {"orbit", std::to_string(oid), num(s.X), num(s.Z), num(s.dX), num(s.dZ), label});
        };
        if (cfg.orbits > 0) {
            const auto run = solve_soliton(p, cfg.alpha, solve_options(cfg, IntegratorControls{}.s_max));
            emit(0, run.trace, "origin");
        }
        for (int o = 1; o < cfg.orbits; ++o) {
            const PhaseState start{X_hi * o / cfg.orbits, Z_hi * (cfg.orbits - o) / cfg.orbits};
            emit(o, integrate_from(start, 0.0, Chart::Origin, p, seeded), "seed");
        }
    });
    return 0;
}

int cmd_profile(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    format_for(cfg, "csv", {"csv"});
    const auto p = params_of(cfg, require_rho(cfg));
    const auto run = solve_soliton(p, cfg.alpha, solve_options(cfg, kProfileSMax));
    double min_sigma = std::numeric_limits<double>::infinity();
    write_to(cfg.out, out, [&](std::ostream& os) {
        os << "r,u,u_r,u_rr,lambda1,lambda2,sigma_k\n";
        for (const auto& row : run.table.rows) {
            const auto pair = row.eigen_pair(p.n, p.k);
            const double sk = radial_sigma_l(pair, p.k);
            min_sigma = std::min(min_sigma, sk);
            csv_row(os, {num(row.r), num(row.u), num(row.u_r), num(row.u_rr), num(pair.lambda1), num(pair.lambda2), num(sk)});
        }
    });
    if (!cfg.out.empty()) {
        json j;
        j["config"] = config_json(cfg);
        j["params"] = to_json(p);
        j["class"] = to_json(run.cls);
        j["rows"] = run.table.rows.size();
        j["excluded_samples"] = run.table.excluded;
        j["min_sigma_k"] = min_sigma;
        j["elliptic"] = to_json(elliptic_residual(run.table, p));
        j["potential"] = potential_phi(run.table, p).max_rel_residual;
        j["origin"] = to_json(origin_expansion_check(run.table, p));
        write_json(cfg.out + ".json", out, j);
    }
    return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    format_for(cfg, "json", {"json"});
    const auto p = params_of(cfg, require_rho(cfg));
    auto run = solve_soliton(p, cfg.alpha, solve_options(cfg, IntegratorControls{}.s_max));
    if (cfg.inject_perturbation) inject_perturbation(run.trace, p);

    std::vector<Check> checks;
    json skipped = json::array();
    const auto& L = run.local;
    checks.push_back(below("picard_rate", L.contraction_rate, 0.9));
    checks.push_back(below("picard_residual", L.residual, 1e-10));
    const double lim = std::max(rel_error(L.limit_X, L.thresholds.amplitude), rel_error(L.limit_Z, L.thresholds.z_amplitude));
    checks.push_back(below("picard_limits", lim, 1e-8));
    checks.push_back(below("membership", verify_membership(L.tail, L.alpha, p).inside ? 0.0 : 1.0, 0.5));

    const auto kinds = expected_kinds(p);
    const bool kind_ok = std::find(kinds.begin(), kinds.end(), run.cls.kind) != kinds.end();
    checks.push_back({"classification", kind_ok, kind_ok ? 1.0 : 0.0, 1.0, to_string(run.cls.kind)});

    checks.push_back(count_zero("monotonicity", monotonicity_monitor(run.trace, p).size()));
    checks.push_back(count_zero("z_lower_bound", z_lower_bound_monitor(run.trace, p).size()));
    checks.push_back(count_zero("self_intersection", self_intersection_monitor(run.trace).size()));
    const auto id = log_z_identity(run.trace, p);
    checks.push_back(count_zero("log_z_identity", id.violations));

    const auto er = elliptic_residual(run.table, p);
    checks.push_back(below("elliptic_residual", er.accepted() ? er.max_rel_residual : kNaN, 1e-6));
    checks.push_back(below("potential_residual", potential_phi(run.table, p).max_rel_residual, 1e-6));

    double max_ur = -std::numeric_limits<double>::infinity();
    for (const auto& row : run.table.rows) max_ur = std::max(max_ur, row.p);
    checks.push_back({"u_decreasing", max_ur < 0.0, max_ur, 0.0, "max r u_r / u"});

    const double seed_rt = rel_error(seed_for_center_value(center_value_for_seed(run.seed, p), p), run.seed);
    checks.push_back(below("round_trip", std::max(seed_rt, flow_round_trip(run)), 1e-8));

    const auto oc = origin_expansion_check(run.table, p);
    checks.push_back(below("origin_u0", oc.rel_u0_error, 1e-6));
    checks.push_back(below("origin_coefficient", oc.rel_coefficient_error, 1e-2));

    const auto tail = analyze_tail(run);
    tail_checks(run, tail, checks, skipped);

    if (p.regime() == Regime::Supercritical && p.rho > 2.0 * p.theta) {
        IntegratorControls c = solve_options(cfg, IntegratorControls{}.s_max).controls;
        const auto br = barrier_compare(p, run.seed, 1.0, c);
        checks.push_back({"barrier", br.holds, br.min_gap, 0.0, "min (V - Z)/V over matched X"});
    } else {
        skipped.push_back({{"name", "barrier"}, {"reason", "needs n > 2k and rho > 2 theta"}});
    }

    bool all = true;
    json list = json::array();
    for (const auto& c : checks) {
        all = all && c.pass;
        list.push_back(check_json(c));
        if (!c.pass) err << "FAIL " << c.name << " measured " << num(c.measured) << '\n';
    }
    json j;
    j["config"] = config_json(cfg);
    j["params"] = to_json(p);
    j["class"] = to_json(run.cls);
    j["pass"] = all;
    j["checks"] = list;
    j["skipped"] = skipped;
    write_json(cfg.out, out, j);
    return all ? 0 : 1;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const std::string format = format_for(cfg, "csv", {"csv", "json"});
    const auto rhos = sweep_rhos(cfg);
    const std::vector<double> alphas = cfg.alphas.empty() ? std::vector<double>{cfg.alpha} : cfg.alphas;
    if (cfg.jobs < 1) throw UsageError("--jobs must be at least 1");
    make_params(cfg.n, cfg.k, rhos.front(), cfg.theta);  // fail fast on n, k, theta

    const std::size_t total = rhos.size() * alphas.size();
    std::vector<SweepRow> rows(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++)
            rows[i] = sweep_point(cfg, i, rhos[i / alphas.size()], alphas[i % alphas.size()]);
    };
    const std::size_t jobs = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), total);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    if (format == "json") {
        json list = json::array();
        for (const auto& r : rows)
            list.push_back({{"index", r.index},
                            {"rho", r.rho},
                            {"alpha", r.alpha},
                            {"kind", r.kind},
                            {"termination", r.termination},
                            {"s_end", std::isfinite(r.s_end) ? json(r.s_end) : json(nullptr)},
                            {"X_inf", std::isfinite(r.X_inf) ? json(r.X_inf) : json(nullptr)},
                            {"s_exit", std::isfinite(r.s_exit) ? json(r.s_exit) : json(nullptr)},
                            {"u_exponent_fit", std::isfinite(r.fit) ? json(r.fit) : json(nullptr)},
                            {"u_exponent_predicted", std::isfinite(r.predicted) ? json(r.predicted) : json(nullptr)},
                            {"error", r.error}});
        write_json(cfg.out, out, {{"config", config_json(cfg)}, {"rows", list}});
        return 0;
    }
    write_to(cfg.out, out, [&](std::ostream& os) {
        os << "index,n,k,rho,theta,alpha,kind,termination,s_end,X_inf,s_exit,u_exponent_fit,u_exponent_predicted,error\n";
        for (const auto& r : rows)
            csv_row(os, {std::to_string(r.index), std::to_string(cfg.n), std::to_string(cfg.k), num(r.rho), num(cfg.theta),
                         num(r.alpha), r.kind, r.termination, cell(r.s_end), cell(r.X_inf), cell(r.s_exit), cell(r.fit),
                         cell(r.predicted), quoted(r.error)});
    });
    return 0;
}

}  // namespace ksol::cli
