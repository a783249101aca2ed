#pragma once

#include "cmcflow/grid.hpp"

#include <string>

namespace cmcflow {

/// Conformal factor and principal-curvature fields of the reference surface S,
/// stored diagonally in the isothermal frame. Valid data has |lam| < 1 with a
/// guard band (see validate).
struct ReferenceSurfaceData {
    Grid grid;
    Field v;    // log conformal factor
    Field lam1; // principal curvature field
    Field lam2;

    /// Throws InvalidDataError unless nx,ny >= 8, sizes match, all fields
    /// finite, and max|lam| <= 1 - 1e-6 (keeps 1 + lam*tanh(r) away from 0).
    void validate() const;
};

constexpr double kLambdaGuard = 1.0 - 1e-6;

struct SmallCurvatureConstants {
    double alpha = 0.0; // grid max of |lam_j|
    double beta = 0.0;  // artanh(alpha)
};

/// alpha = max|lam_j| over the grid, beta = artanh(alpha) computed as
/// 0.5*ln((1+a)/(1-a)). Throws InvalidDataError when alpha exceeds the guard.
SmallCurvatureConstants small_curvature_constants(const ReferenceSurfaceData& data);

} // namespace cmcflow
