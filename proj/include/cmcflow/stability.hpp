#pragma once

#include "cmcflow/flow.hpp"
#include "cmcflow/graph_surface.hpp"

#include <optional>

namespace cmcflow {

struct StabilityReport {
    double lambda_min = 0.0;       // lowest eigenvalue on the zero-mean subspace
    Field eigenfunction;           // zero dmu-mean, unit L2(dmu) norm
    std::optional<double> fitted_decay_rate;
    bool strictly_stable = false;  // lambda_min > 0
};

/// Applies L = -Lap - (|A|^2 - 2) with the Laplace-Beltrami operator of the
/// induced metric in divergence form, differentiated spectrally (the flat-leaf
/// eigenvalue tolerances require better than second order).
Field apply_stability_operator(const GraphSurface& surface, const Field& phi);

/// Minimizes the Rayleigh quotient over zero-dmu-mean functions by inverse
/// iteration with mean projection after every inner solve. The seed is the
/// lowest nonconstant Fourier mode of the longer domain direction. Throws
/// IterationFailureError if the iteration budget is exhausted.
StabilityReport lowest_eigenvalue(const GraphSurface& surface);

/// dmu-weighted mean projection; idempotent to rounding.
Field project_zero_mean(const GraphSurface& surface, const Field& phi);

struct RateCheckReport {
    double fitted_rate = 0.0;   // decay rate of int (H-h)^2 dmu
    double two_lambda_min = 0.0;
    int window_records = 0;
    bool rate_at_least_2lambda = false;
};

/// Least-squares fit of log int(H-h)^2 dmu over the late-time window
/// (records with sq_dev between 100x the final level and 1e-2x the peak).
/// Throws InsufficientDataError when fewer than 10 usable records exist.
RateCheckReport exponential_rate_check(const StabilityReport& report,
                                       const FlowHistory& history,
                                       double tolerance = 0.1);

} // namespace cmcflow
