#include "ksol/local_existence.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ksol/errors.hpp"

namespace ksol {

namespace {

constexpr std::array<double, 8> kGaussNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                               0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};

double lagrange(int i, double x) {
    double v = 1.0;
    for (int j = 0; j < 4; ++j)
        if (j != i) v *= (x - j) / static_cast<double>(i - j);
    return v;
}

// Cumulative integrals on a uniform grid from -infinity, with cubic interpolation of the
// integrand on each interval and the kernel exp(-rate (s - t)) integrated exactly.
class TailQuadrature {
public:
    TailQuadrature(double h, double rate) : h_(h), rate_(rate), decay_(std::exp(-rate * h)) {
        for (int p = 0; p < 3; ++p)
            for (int i = 0; i < 4; ++i) {
                double acc = 0.0;
                for (std::size_t g = 0; g < kGaussNodes.size(); ++g) {
                    const double x = p + 0.5 * (kGaussNodes[g] + 1.0);  // stencil coordinate
                    acc += kGaussWeights[g] * std::exp(-rate * h * (p + 1 - x)) * lagrange(i, x);
                }
                w_[p][i] = 0.5 * h * acc;
            }
    }

    // out[j] = int_{-inf}^{t_j} exp(-rate (t_j - t)) g(t) dt, with g ~ c1 e^{2t} + c2 e^{4t} left of t_0.
    std::vector<double> cumulative(const std::vector<double>& g) const {
        const std::size_t N = g.size();
        std::vector<double> out(N);
        out[0] = tail(g);
        for (std::size_t j = 0; j + 1 < N; ++j) {
            const std::size_t st = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(j) - 1, 0,
                                                              static_cast<std::ptrdiff_t>(N) - 4);
            const int p = static_cast<int>(j - st);
            double piece = 0.0;
            for (int i = 0; i < 4; ++i) piece += w_[p][i] * g[st + i];
            out[j + 1] = decay_ * out[j] + piece;
        }
        return out;
    }

    double tail(const std::vector<double>& g) const {
        const std::size_t j = std::min<std::size_t>(g.size() - 1, std::max<std::size_t>(1, std::lround(0.5 / h_)));
        const double q = std::exp(2.0 * h_ * j);
        const double c2 = (g[j] - q * g[0]) / (q * q - q);
        const double c1 = g[0] - c2;
        return c1 / (rate_ + 2.0) + c2 / (rate_ + 4.0);
    }

private:
    double h_;
    double rate_;
    double decay_;
    double w_[3][4];
};

struct Branch {
    Chart chart;
    const SolitonParams* p;
    double amp;
    double zamp;
    double P0;
};

Branch make_branch(double alpha, Chart chart, const SolitonParams& p) {
    Branch b{chart, &p, seed_amplitude(alpha, chart, p), 0.0, branch_profile(chart, 0.0, p)};
    b.zamp = p.n * b.amp / b.P0;
    return b;
}

// Weighted integrands F~ and G~ on the grid.
void integrands(const Branch& b, const WeightedTail& y, std::vector<double>& F, std::vector<double>& G) {
    const SolitonParams& p = *b.p;
    const std::size_t N = y.t.size();
    F.resize(N);
    G.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double e2 = std::exp(2.0 * y.t[i]);
        const double X = std::max(y.X[i], 0.0);
        const double x = e2 * kth_root(X, p.k);
        F[i] = p.k * p.m * X * x + y.Z[i] * (branch_profile(b.chart, x, p) - b.P0);
        G[i] = -p.k * (1.0 - p.m) * y.Z[i] * x;
    }
}

WeightedTail apply_E_branch(const Branch& b, const WeightedTail& in) {
    const SolitonParams& p = *b.p;
    const std::size_t N = in.t.size();
    if (N < 8) throw DomainError("apply_E: grid needs at least 8 points");
    const double h = in.t[1] - in.t[0];
    std::vector<double> F, G;
    integrands(b, in, F, G);
    std::vector<double> H(N);
    for (std::size_t i = 0; i < N; ++i) H[i] = F[i] - b.P0 / p.n * G[i];
    const TailQuadrature plain(h, 0.0), kernel(h, static_cast<double>(p.n));
    const auto PG = plain.cumulative(G);
    const auto RH = kernel.cumulative(H);
    WeightedTail out;
    out.chart = in.chart;
    out.t = in.t;
    out.X.resize(N);
    out.Z.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        out.X[i] = b.amp + RH[i] + b.P0 / p.n * PG[i];
        out.Z[i] = b.zamp + PG[i];
    }
    return out;
}

double sup_diff(const Branch& b, const WeightedTail& u, const WeightedTail& v) {
    double d = 0.0;
    for (std::size_t i = 0; i < u.t.size(); ++i) {
        d = std::max(d, std::abs(u.X[i] - v.X[i]) / b.amp);
        d = std::max(d, std::abs(u.Z[i] - v.Z[i]) / b.zamp);
    }
    return d;
}

// Limit at the left end assuming y = L + A e^{2t} + B e^{4t}.
double richardson_left(const std::vector<double>& t, const std::vector<double>& y) {
    const double h = t[1] - t[0];
    const std::size_t j = std::max<std::size_t>(1, std::lround(0.5 / h));
    if (2 * j >= y.size()) return y[0];
    const double q = std::exp(2.0 * h * j);
    const double u0 = y[0], u1 = y[j], u2 = y[2 * j];
    const double d1 = u1 - u0, d2 = u2 - u1;
    const double B = (d2 - q * d1) / ((q * q - 1.0) * (q * q - q));
    const double A = (d1 - B * (q * q - 1.0)) / (q - 1.0);
    return u0 - A - B;
}

LocalSolution solve_branch(double alpha, Chart chart, const SolitonParams& p, const PicardOptions& opts) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("picard: alpha must be positive and finite");
    if (opts.grid_points < 16) throw DomainError("picard: at least 16 grid points required");
    const Branch b = make_branch(alpha, chart, p);
    const Thresholds thr = thresholds(alpha, p, chart);
    const double shift = std::log(2.0) / 2.0;

    for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
        LocalSolution sol;
        sol.alpha = alpha;
        sol.k = p.k;
        sol.thresholds = thr;
        sol.retries = attempt;
        sol.s0 = thr.s0 - attempt * shift;
        const double smin = sol.s0 - opts.window;
        const int N = opts.grid_points;

        WeightedTail y;
        y.chart = chart;
        y.t.resize(N);
        for (int i = 0; i < N; ++i) y.t[i] = smin + (sol.s0 - smin) * i / (N - 1);
        y.X.assign(N, b.amp);
        y.Z.assign(N, b.zamp);

        double rate = 0.0;
        bool converged = false;
        for (int it = 0; it < opts.max_iterations; ++it) {
            WeightedTail next = apply_E_branch(b, y);
            const double d = sup_diff(b, next, y);
            sol.update_norms.push_back(d);
            y = std::move(next);
            sol.iterations = it + 1;
            const std::size_t m = sol.update_norms.size();
            if (m >= 2 && sol.update_norms[m - 2] > 1e3 * opts.tol)
                rate = std::max(rate, d / sol.update_norms[m - 2]);
            if (d < opts.tol) {
                converged = true;
                break;
            }
        }
        sol.contraction_rate = rate;
        if (!converged || rate > opts.max_rate) continue;

        sol.residual = sup_diff(b, apply_E_branch(b, y), y);
        sol.tail = std::move(y);
        sol.limit_X = richardson_left(sol.tail.t, sol.tail.X);
        sol.limit_Z = richardson_left(sol.tail.t, sol.tail.Z);
        std::vector<double> ratio(sol.tail.t.size());
        for (std::size_t i = 0; i < ratio.size(); ++i) ratio[i] = sol.tail.Z[i] / sol.tail.X[i];
        sol.limit_ratio = richardson_left(sol.tail.t, ratio);
        return sol;
    }
    throw ConvergenceError("picard: no contraction after shifting s0 " + std::to_string(opts.max_retries) +
                           " times");
}

}  // namespace

PhaseState LocalSolution::state(std::size_t i) const {
    const double w = std::exp(2.0 * k * tail.t[i]);
    return {w * tail.X[i], w * tail.Z[i]};
}

double seed_amplitude(double alpha, Chart chart, const SolitonParams& p) {
    if (chart == Chart::A) return alpha;
    return std::pow(alpha, (1.0 - p.m) * p.k);
}

double center_value_for_seed(double alpha, const SolitonParams& p) {
    return alpha * std::pow(p.n / p.f0, 1.0 / ((1.0 - p.m) * p.k));
}

double seed_for_center_value(double u0, const SolitonParams& p) {
    if (!(u0 > 0.0)) throw DomainError("seed_for_center_value: u(0) must be positive");
    return u0 * std::pow(p.f0 / p.n, 1.0 / ((1.0 - p.m) * p.k));
}

Thresholds thresholds(double alpha, const SolitonParams& p, Chart chart) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("thresholds: alpha must be positive and finite");
    const Branch b = make_branch(alpha, chart, p);
    if (!(b.P0 > 0.0)) throw DomainError("thresholds: profile must be positive at 0");
    Thresholds thr;
    thr.amplitude = b.amp;
    thr.z_amplitude = b.zamp;
    const double k = p.k, n = p.n;
    thr.x_range = chart == Chart::Origin ? std::min(p.gamma, p.a / 2.0) : p.a / 2.0;
    thr.s1 = std::log(ipow(thr.x_range, p.k) / (2.0 * b.amp)) / (2.0 * k);

    double M = 0.0;
    constexpr int samples = 2000;
    for (int i = 0; i <= samples; ++i) {
        const double x = thr.x_range * i / samples;
        M = std::max(M, std::abs(branch_profile_derivative(chart, x, p)));
    }
    const double Xmax = 2.0 * b.amp, Xmin = 0.5 * b.amp, Zmax = 2.0 * b.zamp;
    const double rX = kth_root(Xmax, p.k);
    const double g = k * (1.0 - p.m) * Zmax * rX;
    const double phi = std::abs(k * p.m) * Xmax * rX + Zmax * M * rX;
    const double D1 = (phi + b.P0 * g / n) / (n + 2.0) + b.P0 * g / (2.0 * n);
    const double D2 = g / 2.0;
    thr.s2 = 0.5 * std::log(std::min(b.amp / (2.0 * D1), b.zamp / (2.0 * D2)));

    const double rXmin_pow = std::pow(Xmin, 1.0 / k - 1.0);
    const double LF = std::abs(p.m) * (k + 1.0) * rX + Zmax * M / k * rXmin_pow + M * rX;
    const double LG = (1.0 - p.m) * Zmax * rXmin_pow + k * (1.0 - p.m) * rX;
    const double C = std::max((LF + b.P0 * LG / n) / (n + 2.0) + b.P0 * LG / (2.0 * n), LG / 2.0);
    thr.lipschitz = C;
    thr.s3 = 0.5 * std::log(1.0 / (2.0 * C));
    thr.s0 = std::min({thr.s1, thr.s2, thr.s3});
    return thr;
}

WeightedTail apply_E(const WeightedTail& in, double alpha, const SolitonParams& p) {
    return apply_E_branch(make_branch(alpha, in.chart, p), in);
}

LocalSolution picard_solve(double alpha, const SolitonParams& p, const PicardOptions& opts) {
    return solve_branch(alpha, Chart::Origin, p, opts);
}

LocalSolution picard_solve_at_A(double alpha_bar, const SolitonParams& p, const PicardOptions& opts) {
    if (p.rho < 2.0 * p.theta) throw NotApplicable("picard_solve_at_A: needs rho >= 2 theta");
    if (p.rho == 2.0 * p.theta) throw DomainError("picard_solve_at_A: h(0) = 0 when rho = 2 theta");
    return solve_branch(alpha_bar, Chart::A, p, opts);
}

MembershipReport verify_membership(const WeightedTail& tail, double alpha, const SolitonParams& p) {
    const Branch b = make_branch(alpha, tail.chart, p);
    const Thresholds thr = thresholds(alpha, p, tail.chart);
    MembershipReport r;
    for (std::size_t i = 0; i < tail.t.size(); ++i) {
        r.worst_X = std::max(r.worst_X, std::abs(tail.X[i] - b.amp) / (0.5 * b.amp));
        r.worst_Z = std::max(r.worst_Z, std::abs(tail.Z[i] - b.zamp) / (0.5 * b.zamp));
        r.max_x = std::max(r.max_x, std::exp(2.0 * tail.t[i]) * kth_root(std::max(tail.X[i], 0.0), p.k));
    }
    r.inside = r.worst_X <= 1.0 && r.worst_Z <= 1.0 && r.max_x <= thr.x_range * (1.0 + 1e-12);
    return r;
}

}  // namespace ksol
