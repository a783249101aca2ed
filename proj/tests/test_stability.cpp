#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cmcflow/errors.hpp"
#include "cmcflow/flow.hpp"
#include "cmcflow/graph_surface.hpp"
#include "cmcflow/stability.hpp"

#include "helpers.hpp"

#include <cmath>

using namespace cmcflow;
using namespace test_helpers;

namespace {

GraphSurface flat_leaf(int n, double r, double lx = kTwoPi, double ly = kTwoPi) {
    const auto chart = build_chart(fuchsian_data(n, lx, ly));
    return graph_geometry(chart, Field(chart.grid().size(), r), false);
}

double weighted_dot(const GraphSurface& s, const Field& a, const Field& b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k] * s.w[k];
    return acc * s.grid.cell_area();
}

} // namespace

TEST_CASE("stability operator on constants reduces to the curvature potential") {
    // Lap 1 = 0, so L 1 = -(|A|^2 - 2); on the leaf at height r this is
    // 2 sech^2 r pointwise.
    for (double r : {0.0, 1.0, -1.7}) {
        const GraphSurface s = flat_leaf(32, r);
        const Field out = apply_stability_operator(s, Field(s.u.size(), 1.0));
        const double expect = 2.0 / std::pow(std::cosh(r), 2);
        for (double v : out) CHECK(v == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("stability operator reproduces the flat-torus eigenfunctions") {
    // At r = 0 the leaf is the unit flat torus with |A|^2 = 0, so
    // L sin(x) = (1 + 2) sin(x).
    const GraphSurface s = flat_leaf(64, 0.0);
    const Grid& g = s.grid;
    Field phi(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) phi[g.at(i, j)] = std::sin(g.x1(i));
    const Field out = apply_stability_operator(s, phi);
    for (std::size_t k = 0; k < phi.size(); ++k)
        CHECK(out[k] == doctest::Approx(3.0 * phi[k]).epsilon(1e-8).scale(1.0));
}

TEST_CASE("stability operator is linear and self-adjoint") {
    const auto data = bumpy_data(32, 0.5, 41);
    const auto chart = build_chart(data);
    const GraphSurface s = graph_geometry(chart, sine_height(data.grid, 0.5, 0.15),
                                          false);
    const Grid& g = data.grid;
    Field phi(g.size()), psi(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            phi[g.at(i, j)] = std::sin(g.x1(i)) + 0.3 * std::cos(2.0 * g.x2(j));
            psi[g.at(i, j)] = std::cos(g.x1(i) - g.x2(j));
        }

    const Field lphi = apply_stability_operator(s, phi);
    const Field lpsi = apply_stability_operator(s, psi);
    Field combo(g.size());
    for (std::size_t k = 0; k < combo.size(); ++k)
        combo[k] = 2.0 * phi[k] - 0.5 * psi[k];
    const Field lcombo = apply_stability_operator(s, combo);
    for (std::size_t k = 0; k < combo.size(); ++k)
        CHECK(lcombo[k] ==
              doctest::Approx(2.0 * lphi[k] - 0.5 * lpsi[k]).epsilon(1e-12).scale(1.0));

    CHECK(weighted_dot(s, phi, lpsi) ==
          doctest::Approx(weighted_dot(s, psi, lphi)).epsilon(1e-10));
}

TEST_CASE("zero-mean projection is idempotent and annihilates constants") {
    const auto data = bumpy_data(32, 0.5, 52);
    const auto chart = build_chart(data);
    const GraphSurface s = graph_geometry(chart, sine_height(data.grid, 0.3, 0.1),
                                          false);
    const Field pc = project_zero_mean(s, Field(s.u.size(), 4.2));
    CHECK(field_max_abs(pc) < 1e-13);

    Field phi(s.u.size());
    for (std::size_t k = 0; k < phi.size(); ++k) phi[k] = std::sin(0.01 * k) + 1.0;
    const Field p1 = project_zero_mean(s, phi);
    const Field p2 = project_zero_mean(s, p1);
    for (std::size_t k = 0; k < phi.size(); ++k)
        CHECK(p2[k] == doctest::Approx(p1[k]).epsilon(1e-14).scale(1.0));
    CHECK(std::abs(weighted_dot(s, p1, Field(phi.size(), 1.0))) < 1e-12);
}

TEST_CASE("lowest eigenvalue on the unit flat torus leaf") {
    // Zero-mean subspace of the r=0 leaf: lambda_min = 1 + 2 = 3 from the
    // k = 1 Fourier modes.
    const StabilityReport rep = lowest_eigenvalue(flat_leaf(64, 0.0));
    CHECK(rep.lambda_min == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(rep.strictly_stable);

    const GraphSurface s = flat_leaf(64, 0.0);
    CHECK(std::abs(weighted_dot(s, rep.eigenfunction, Field(s.u.size(), 1.0))) <
          1e-8);
    CHECK(weighted_dot(s, rep.eigenfunction, rep.eigenfunction) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("lowest eigenvalue tracks the domain geometry") {
    // On a 2pi x 4pi leaf at r = 0 the lowest zero-mean mode lives along the
    // long direction: lambda_min = (1/2)^2 + 2 = 2.25.
    const StabilityReport rep = lowest_eigenvalue(flat_leaf(48, 0.0, kTwoPi,
                                                            2.0 * kTwoPi));
    CHECK(rep.lambda_min == doctest::Approx(2.25).epsilon(1e-6));
}

TEST_CASE("lowest eigenvalue on displaced leaves follows the leaf metric") {
    // The leaf at height r is a flat torus with metric cosh^2 r times the
    // base and |A|^2 - 2 = -2 sech^2 r constant, so
    // lambda_min = (1 + 2) sech^2 r = 3 sech^2 r.
    for (double r : {0.5, 1.0, 2.0}) {
        const StabilityReport rep = lowest_eigenvalue(flat_leaf(64, r));
        const double expect = 3.0 / std::pow(std::cosh(r), 2);
        CHECK(rep.lambda_min == doctest::Approx(expect).epsilon(1e-6));
        CHECK(rep.strictly_stable);
    }
    // sanity: the value decreases away from the totally geodesic leaf
    const double l0 = lowest_eigenvalue(flat_leaf(32, 0.0)).lambda_min;
    const double l1 = lowest_eigenvalue(flat_leaf(32, 1.0)).lambda_min;
    const double l2 = lowest_eigenvalue(flat_leaf(32, 2.0)).lambda_min;
    CHECK(l0 > l1);
    CHECK(l1 > l2);
}

TEST_CASE("perturbed reference data keeps the leaf strictly stable") {
    const auto data = bumpy_data(48, 0.4, 61, true);
    const auto chart = build_chart(data);
    const GraphSurface s = graph_geometry(chart, Field(data.grid.size(), 0.3),
                                          false);
    CHECK(field_max(s.a2norm) < 2.0);
    const StabilityReport rep = lowest_eigenvalue(s);
    CHECK(rep.lambda_min > 0.0);
    CHECK(rep.strictly_stable);
}

TEST_CASE("rate check needs a usable late-time window") {
    StabilityReport rep;
    rep.lambda_min = 3.0;
    FlowHistory tiny(3);
    CHECK_THROWS_AS(exponential_rate_check(rep, tiny), InsufficientDataError);
}

TEST_CASE("rate check recovers a synthetic exponential decay exactly") {
    StabilityReport rep;
    rep.lambda_min = 1.25;
    FlowHistory hist;
    const double rate = 2.6;
    for (int i = 0; i <= 400; ++i) {
        FlowRecord r;
        r.t = 0.01 * i;
        r.sq_dev = 1e-3 * std::exp(-rate * r.t);
        hist.push_back(r);
    }
    const RateCheckReport rc = exponential_rate_check(rep, hist);
    CHECK(rc.fitted_rate == doctest::Approx(rate).epsilon(1e-10));
    CHECK(rc.two_lambda_min == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(rc.rate_at_least_2lambda);
    CHECK(rc.window_records >= 10);

    // scaling the amplitude must not move the fitted slope
    for (FlowRecord& r : hist) r.sq_dev *= 7.3;
    CHECK(exponential_rate_check(rep, hist).fitted_rate ==
          doctest::Approx(rate).epsilon(1e-10));
}

TEST_CASE("measured decay rate of the flow is twice the spectral gap") {
    const auto chart = build_chart(fuchsian_data(48));
    FlowConfig config;
    config.dt_init = 2e-3;
    config.record_every = 5;
    const FlowOutcome out = run_flow(chart, sine_height(chart.grid(), 0.0, 0.05),
                                     config);
    REQUIRE(out.status == FlowStatus::Converged);
    const StabilityReport rep = lowest_eigenvalue(out.final.surface);
    const RateCheckReport rc = exponential_rate_check(rep, out.final.history);
    CHECK(rc.rate_at_least_2lambda);
    // the k=1 perturbation of the flat leaf decays at exactly 2 lambda_min
    CHECK(rc.fitted_rate == doctest::Approx(2.0 * rep.lambda_min).epsilon(0.05));
}
