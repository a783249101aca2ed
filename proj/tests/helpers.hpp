#pragma once

#include "cmcflow/datagen.hpp"
#include "cmcflow/reference_data.hpp"

#include <cmath>
#include <numbers>

namespace test_helpers {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline cmcflow::ReferenceSurfaceData constant_data(int n, double v, double l1,
                                                   double l2,
                                                   double lx = kTwoPi,
                                                   double ly = kTwoPi) {
    cmcflow::ReferenceSurfaceData data;
    data.grid = {n, n, lx, ly};
    data.v.assign(data.grid.size(), v);
    data.lam1.assign(data.grid.size(), l1);
    data.lam2.assign(data.grid.size(), l2);
    return data;
}

inline cmcflow::ReferenceSurfaceData fuchsian_data(int n, double lx = kTwoPi,
                                                   double ly = kTwoPi) {
    return constant_data(n, 0.0, 0.0, 0.0, lx, ly);
}

inline cmcflow::ReferenceSurfaceData bumpy_data(int n, double amp, unsigned seed,
                                                bool zero_mean_trace = false) {
    cmcflow::GeneratorSpec spec;
    spec.kind = cmcflow::GeneratorKind::FourierBump;
    spec.amp1 = amp;
    spec.amp2 = 0.8 * amp;
    spec.v_amp = 0.3 * amp;
    spec.zero_mean_trace = zero_mean_trace;
    spec.seed = seed;
    return cmcflow::generate(spec, n, n, kTwoPi, kTwoPi);
}

inline cmcflow::Field sine_height(const cmcflow::Grid& g, double base, double amp,
                                  int kx = 1) {
    cmcflow::Field u(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            u[g.at(i, j)] = base + amp * std::sin(kTwoPi * kx * g.x1(i) / g.lx);
    return u;
}

} // namespace test_helpers
