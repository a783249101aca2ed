#include "cmcflow/reference_data.hpp"

#include "cmcflow/errors.hpp"

#include <cmath>

namespace cmcflow {

void ReferenceSurfaceData::validate() const {
    if (grid.nx < 8 || grid.ny < 8)
        throw InvalidDataError("grid must be at least 8x8, got " +
                               std::to_string(grid.nx) + "x" + std::to_string(grid.ny));
    if (!(grid.lx > 0.0) || !(grid.ly > 0.0))
        throw InvalidDataError("domain periods must be positive");
    const std::size_t n = grid.size();
    if (v.size() != n || lam1.size() != n || lam2.size() != n)
        throw InvalidDataError("field sizes do not match grid");
    if (!field_finite(v) || !field_finite(lam1) || !field_finite(lam2))
        throw InvalidDataError("non-finite values in reference data");
    const double a = std::max(field_max_abs(lam1), field_max_abs(lam2));
    if (a > kLambdaGuard)
        throw InvalidDataError("small-curvature condition violated: max|lambda| = " +
                               std::to_string(a));
}

SmallCurvatureConstants small_curvature_constants(const ReferenceSurfaceData& data) {
    data.validate();
    const double alpha = std::max(field_max_abs(data.lam1), field_max_abs(data.lam2));
    return {alpha, 0.5 * std::log((1.0 + alpha) / (1.0 - alpha))};
}

} // namespace cmcflow
