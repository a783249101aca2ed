#pragma once

#include "cmcflow/grid.hpp"
#include "cmcflow/reference_data.hpp"

namespace cmcflow {

/// Pointwise evaluation of the ambient chart metric gbar = dr^2 + g(x,r).
/// g is diagonal in the isothermal frame; the r-dependence is analytic, the
/// x-derivatives use the chart's cached central-difference fields.
struct ChartMetric {
    double g11, g22;       // leaf metric at (x, r)
    double dr_g11, dr_g22; // analytic d/dr
    double d1_g11, d2_g11; // d/dx1, d/dx2 at fixed r
    double d1_g22, d2_g22;
    double sqrt_det;       // e^{2v} (cosh r + l1 sinh r)(cosh r + l2 sinh r)
};

/// Evaluator of the normal-coordinate ambient metric built from reference
/// data. Immutable after construction and shareable across threads.
class FoliationChart {
  public:
    explicit FoliationChart(ReferenceSurfaceData data);

    const ReferenceSurfaceData& data() const { return data_; }
    const Grid& grid() const { return data_.grid; }

    ChartMetric metric(std::size_t point_index, double r) const;

    /// sqrt(det g(x,r)) only — the enclosed-volume integrand.
    double area_density(std::size_t point_index, double r) const;

  private:
    ReferenceSurfaceData data_;
    Field e2v_;                      // e^{2v}
    Field vx_, vy_, l1x_, l1y_, l2x_, l2y_; // cached spatial derivatives
};

FoliationChart build_chart(ReferenceSurfaceData data);

} // namespace cmcflow
