#pragma once

#include <vector>

#include "ksol/phase_plane.hpp"

namespace ksol {

struct PicardOptions {
    int grid_points = 2049;
    double tol = 1e-13;       // sup-norm of successive updates, relative to the seed
    int max_iterations = 200;
    int max_retries = 8;      // each retry moves s0 left by ln(2)/2
    double window = 6.0;      // s0 - s_min; weighted deviations shrink by e^{-12} across it
    double max_rate = 0.9;
};

// Existence thresholds. s1 keeps x inside its range, s2 keeps the iterates in the
// ball around the seed, s3 makes the operator a contraction with constant 1/2.
struct Thresholds {
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;
    double s0 = 0.0;
    double amplitude = 0.0;   // seed value of the first weighted component
    double z_amplitude = 0.0; // seed value of the second one, n * amplitude / P(0)
    double x_range = 0.0;     // x stays in [0, x_range] below s1
    double lipschitz = 0.0;   // C with |E y - E y'| <= C e^{2s} |y - y'|
};

// Weighted unknowns e^{-2ks} X and e^{-2ks} Z on a uniform grid in the chart's own time.
// For Chart::A the time is t = -s and the unknowns are W, V.
struct WeightedTail {
    Chart chart = Chart::Origin;
    std::vector<double> t;
    std::vector<double> X;
    std::vector<double> Z;
};

struct LocalSolution {
    WeightedTail tail;
    double alpha = 0.0;
    int k = 1;
    Thresholds thresholds;
    double s0 = 0.0;  // right end of the grid (chart time)
    int iterations = 0;
    int retries = 0;
    double contraction_rate = 0.0;
    double residual = 0.0;  // sup |E y - y| at the returned iterate, relative
    std::vector<double> update_norms;
    // Richardson limits at t -> -infinity.
    double limit_X = 0.0;
    double limit_Z = 0.0;
    double limit_ratio = 0.0;  // lim Z/X

    // Unweighted state at grid index i.
    PhaseState state(std::size_t i) const;
    PhaseState end_state() const { return state(tail.t.size() - 1); }
};

// Seed amplitude alpha^{(1-m)k} for the origin chart; the A chart uses alpha itself.
double seed_amplitude(double alpha, Chart chart, const SolitonParams& p);

// u(0) of the soliton produced from the seed alpha, and its inverse.
double center_value_for_seed(double alpha, const SolitonParams& p);
double seed_for_center_value(double u0, const SolitonParams& p);

Thresholds thresholds(double alpha, const SolitonParams& p, Chart chart = Chart::Origin);

WeightedTail apply_E(const WeightedTail& in, double alpha, const SolitonParams& p);

LocalSolution picard_solve(double alpha, const SolitonParams& p, const PicardOptions& opts = {});
LocalSolution picard_solve_at_A(double alpha_bar, const SolitonParams& p, const PicardOptions& opts = {});

struct MembershipReport {
    bool inside = false;
    double worst_X = 0.0;  // max |X~ - amplitude| / (amplitude / 2)
    double worst_Z = 0.0;
    double max_x = 0.0;    // largest unweighted x on the grid
};

MembershipReport verify_membership(const WeightedTail& tail, double alpha, const SolitonParams& p);

}  // namespace ksol
