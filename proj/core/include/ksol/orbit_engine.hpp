#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ksol/local_existence.hpp"
#include "ksol/ode.hpp"
#include "ksol/phase_plane.hpp"

namespace ksol {

struct IntegratorControls {
    double rtol = 1e-10;
    double atol = 1e-12;
    double s_max = 200.0;
    double blow_up_Z = 1e12;
    double h_init = 1e-3;
    double h_min = 1e-13;
    double h_max = 0.1;  // keeps the profile grid dense in the tail
    double asymptote_band = 1e-3;  // in x
    double stiff_on = 200.0;       // spectral radius switching to Rosenbrock
    double stiff_off = 100.0;
    double converge_dist = 1e-7;
    double converge_rhs = 1e-9;
    double converge_span = 2.0;
    double event_tol = 1e-12;
    bool stop_at_X_B = false;
    std::size_t max_steps = 5'000'000;
    std::size_t local_stride = 16;  // keep every n-th Picard grid point in the trace
};

enum class EventKind { CrossedXB, ReachedAsymptote, ExitedRegion, ConvergedCritical, BlowUpZ, StepFloor, ReachedSMax };

std::string to_string(EventKind kind);

struct OrbitEvent {
    EventKind kind = EventKind::ReachedSMax;
    double s = 0.0;
    PhaseState at;
    std::string detail;
};

struct OrbitSample {
    double s = 0.0;
    double X = 0.0;
    double Z = 0.0;
    double dX = 0.0;
    double dZ = 0.0;
    bool local = false;  // from the Picard tail rather than the integrator
};

// Time is the chart's own: s for Chart::Origin, -s for Chart::A.
struct OrbitTrace {
    SolitonParams params;
    IntegratorControls controls;
    Chart chart = Chart::Origin;
    double alpha = 0.0;
    std::vector<OrbitSample> samples;
    std::vector<OrbitEvent> events;
    std::vector<ode::DenseStep<2>> steps;  // state (X, ln Z)
    EventKind termination = EventKind::ReachedSMax;
    std::size_t first_integrated = 0;
    std::size_t rejected_steps = 0;
    std::size_t stiff_steps = 0;
    std::size_t rhs_evaluations = 0;

    bool has_event(EventKind kind) const;
    const OrbitSample& last() const { return samples.back(); }
};

OrbitTrace integrate(const LocalSolution& start, const SolitonParams& p, const IntegratorControls& controls = {});
// Integrate from an arbitrary state with Z > 0.
OrbitTrace integrate_from(PhaseState start, double s_start, Chart chart, const SolitonParams& p,
                          const IntegratorControls& controls = {});

enum class OrbitKind { TypeGamma, TypeB, GeneralizedB, TypeA, GeneralizedA, NonAdmissible, Undetermined };

std::string to_string(OrbitKind kind);

struct OrbitClass {
    OrbitKind kind = OrbitKind::Undetermined;
    std::optional<double> X_inf;
    std::optional<double> s_exit;
    std::string reason;
    // Tail diagnostics over the integrated part.
    double log_z_slope = 0.0;  // d ln Z / ds over the last 5 units of s
    double root_z_slope = 0.0; // d Z^{1/k} / ds over the second half
    double root_z_r2 = 0.0;
};

OrbitClass classify_orbit(const OrbitTrace& trace, const SolitonParams& p);

// Kinds an origin orbit may take for these parameters.
std::vector<OrbitKind> expected_kinds(const SolitonParams& p);

struct Violation {
    std::string monitor;
    double s = 0.0;
    double value = 0.0;
    std::string detail;
};

// X nondecreasing until it first reaches X_B; Z nondecreasing wherever X < X_B.
std::vector<Violation> monotonicity_monitor(const OrbitTrace& trace, const SolitonParams& p);
// Z(s) >= Z(s') exp(-k rho/theta (s - s')) for s > s' while the orbit is admissible.
std::vector<Violation> z_lower_bound_monitor(const OrbitTrace& trace, const SolitonParams& p);
// Proper crossings between non-adjacent segments of the (X, ln Z) polyline.
std::vector<Violation> self_intersection_monitor(const OrbitTrace& trace);

struct IdentityReport {
    double max_abs_error = 0.0;
    double max_tolerance_ratio = 0.0;  // error / (atol + rtol (max |ln Z| + integral of |rate|))
    std::size_t steps_checked = 0;
    std::size_t violations = 0;        // steps with ratio > 10
};

// ln Z(s1) - ln Z(s0) against the 8-point Gauss quadrature of 2k(1 - 2kx/(n+2k)) over each
// accepted step, measured in units of the trace's integrator tolerance.
IdentityReport log_z_identity(const OrbitTrace& trace, const SolitonParams& p);

struct BarrierReport {
    bool holds = false;
    double min_gap = 0.0;  // min of V_-(X) - Z(X), scaled by V_-(X)
    std::size_t matched = 0;
    double X_lo = 0.0;
    double X_hi = 0.0;
    bool f_above_h = false;
    double min_f_minus_h = 0.0;
};

BarrierReport barrier_compare(const SolitonParams& p, double alpha, double alpha_bar,
                              const IntegratorControls& controls = {});

}  // namespace ksol
