#include <gtest/gtest.h>

#include <cmath>

#include "ksol/errors.hpp"
#include "ksol/pipeline.hpp"

namespace ksol {
namespace {

TEST(Profile, ElementaryColumnsAreConsistent) {
    const auto run = solve_soliton(make_params(4, 1, 1.0, 1.0), 2.0);
    const auto& rows = run.table.rows;
    ASSERT_GT(rows.size(), 100u);
    EXPECT_DOUBLE_EQ(run.table.alpha, 2.0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_GT(rows[i].r, rows[i - 1].r);
        EXPECT_LE(rows[i].u, rows[i - 1].u);
    }
    for (const auto& r : rows) {
        EXPECT_NEAR(r.ln_r, std::log(r.r), 1e-12 * (1 + std::abs(r.ln_r)));
        if (r.u > 1e-300) {
            EXPECT_NEAR(r.p, r.r * r.u_r / r.u, 1e-10 * (1 + std::abs(r.p)));
        }
        EXPECT_LT(r.p, 0.0);
        EXPECT_NEAR(r.p, -kth_root(r.X, 1), 1e-12 * (1 + r.X));
    }
}

TEST(Profile, OriginExpansion) {
    for (auto [n, k, rho] : {std::tuple{4, 1, 1.0}, {5, 2, -1.0}, {4, 2, 0.0}, {3, 2, 3.0}}) {
        const auto p = make_params(n, k, rho, 1.0);
        const auto oc = origin_expansion_check(solve_soliton(p, 1.5).table, p);
        EXPECT_NEAR(oc.u0, 1.5, 1e-8);
        EXPECT_LT(oc.rel_coefficient_error, 1e-4);
    }
}

TEST(Profile, EllipticResidualVanishes) {
    for (auto [n, k, rho] : {std::tuple{4, 1, -1.0}, {4, 1, 0.0}, {4, 1, 1.0}, {4, 2, 1.0}, {5, 2, 0.0}, {3, 2, 1.0}}) {
        const auto p = make_params(n, k, rho, 1.0);
        const auto res = elliptic_residual(solve_soliton(p, 1.0).table, p);
        EXPECT_TRUE(res.accepted());
        EXPECT_LT(res.max_rel_residual, 1e-10) << n << "," << k << "," << rho;
    }
}

// A profile off by a constant factor no longer solves the equation.
TEST(Profile, EllipticResidualCatchesWrongProfile) {
    const auto p = make_params(4, 1, 1.0, 1.0);
    auto table = solve_soliton(p, 1.0).table;
    for (auto& row : table.rows) row.ln_u += 1e-3;
    EXPECT_GT(elliptic_residual(table, p).max_rel_residual, 1e-4);
}

TEST(Profile, PotentialSolvesItsEquation) {
    for (auto [n, k, rho] : {std::tuple{4, 1, 1.0}, {5, 2, -1.0}, {4, 2, 1.0}}) {
        const auto p = make_params(n, k, rho, 1.0);
        const auto pot = potential_phi(solve_soliton(p, 1.0).table, p);
        ASSERT_GT(pot.phi.size(), 10u);
        EXPECT_LT(pot.max_rel_residual, 1e-10);
        for (std::size_t i = 1; i < pot.phi.size(); ++i) EXPECT_GE(pot.phi[i], pot.phi[i - 1]);
    }
}

TEST(Rates, TypeBTail) {
    const auto p = make_params(4, 1, 1.0, 1.0);
    const auto run = solve_soliton(p, 1.0);
    const auto pred = expected_rate(p, run.cls);
    EXPECT_NEAR(pred.u_exponent, -3.0, 1e-12);
    const auto fit = tail_rate(run.table);
    EXPECT_NEAR(fit.pure.exponent, -3.0, 0.03);
}

TEST(Rates, SteadyTailCarriesLogarithm) {
    const auto p = make_params(4, 1, 0.0, 1.0);
    const auto run = solve_soliton(p, 1.0);
    const auto pred = expected_rate(p, run.cls);
    ASSERT_TRUE(pred.log_power.has_value());
    EXPECT_NEAR(*pred.log_power, 1.5, 1e-12);
    const auto fit = tail_rate(run.table);
    ASSERT_TRUE(fit.with_log.has_value());
    EXPECT_TRUE(fit.log_selected);
    EXPECT_NEAR(fit.with_log->exponent, -3.0, 0.06);
    EXPECT_NEAR(fit.with_log->log_power, 1.5, 0.03);
}

TEST(Rates, ShortTailIsReported) {
    SolveOptions o;
    o.controls.s_max = 0.5;
    const auto p = make_params(4, 1, 1.0, 1.0);
    EXPECT_THROW(tail_rate(solve_soliton(p, 1.0, o).table), DomainError);
}

// (1-m) u_t / u = -sigma_k(g)^{1/k} for g = u^{1-m} |dx|^2, checked at a profile node.
void check_flow(double rho) {
    const auto p = make_params(4, 1, rho, 1.0);
    const auto table = solve_soliton(p, 1.0).table;
    const double T = rho != 0.0 ? 1.0 / rho : 0.0;
    const FlowSolution flow(table, T);
    // first row past r = 1
    std::size_t i = 0;
    while (table.rows[i].r < 1.0) ++i;
    const auto& row = table.rows[i];
    for (double tau : {0.5, 1.0, 2.0}) {
        const double t = rho != 0.0 ? T - tau / rho : -std::log(tau);
        const double r = row.r * std::pow(tau, -flow.radius_exponent());
        const double u = flow(r, t);
        const double a = flow.amplitude_exponent(), b = flow.radius_exponent();
        EXPECT_NEAR(u, std::pow(tau, a) * row.u, 1e-12 * u);
        const double dt = 1e-5;
        const double ut = (flow(r, t + dt) - flow(r, t - dt)) / (2 * dt);
        const double ur = std::pow(tau, a + b) * row.u_r, urr = std::pow(tau, a + 2 * b) * row.u_rr;
        const auto pair = radial_schouten_eigenvalues(u, ur, urr, r, p.n, p.k);
        const double sg = radial_sigma_l(pair, p.k) * std::pow(u, -(1.0 - p.m) * p.k);
        EXPECT_NEAR((1.0 - p.m) * ut / u, -std::pow(sg, 1.0 / p.k), 1e-6 * std::pow(sg, 1.0 / p.k))
            << "rho " << rho << " tau " << tau;
    }
}

TEST(Flow, SelfSimilarSolutionSolvesTheFlow) {
    check_flow(1.0);
    check_flow(0.0);
    check_flow(-1.0);
}

TEST(Flow, DomainOfTime) {
    const auto shr = solve_soliton(make_params(4, 1, 1.0, 1.0), 1.0).table;
    const FlowSolution f(shr, 1.0);
    EXPECT_THROW(f(1.0, 1.0), DomainError);
    EXPECT_THROW(f(1.0, 2.0), DomainError);
    EXPECT_NO_THROW(f(1.0, 0.5));
    const auto exp = solve_soliton(make_params(4, 1, -1.0, 1.0), 1.0).table;
    const FlowSolution g(exp, -1.0);
    EXPECT_THROW(g(1.0, -1.5), DomainError);
    EXPECT_NO_THROW(g(1.0, 0.0));
    EXPECT_THROW(f.profile(f.r_max() * 2.0), DomainError);
    EXPECT_NEAR(f.profile(0.0), 1.0, 1e-15);
}

TEST(Profile, RejectsMirroredChart) {
    const auto p = make_params(4, 1, 5.0, 1.0);
    const auto trace = integrate(picard_solve_at_A(1.0, p), p);
    EXPECT_THROW(reconstruct_u(trace, p), ParameterError);
}

}  // namespace
}  // namespace ksol
