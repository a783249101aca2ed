#include "cmcflow/chart.hpp"

#include <cmath>
#include <utility>

namespace cmcflow {

FoliationChart::FoliationChart(ReferenceSurfaceData data) : data_(std::move(data)) {
    data_.validate();
    const Grid& g = data_.grid;
    e2v_.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) e2v_[k] = std::exp(2.0 * data_.v[k]);
    vx_ = d_dx1(g, data_.v);
    vy_ = d_dx2(g, data_.v);
    l1x_ = d_dx1(g, data_.lam1);
    l1y_ = d_dx2(g, data_.lam1);
    l2x_ = d_dx1(g, data_.lam2);
    l2y_ = d_dx2(g, data_.lam2);
}

ChartMetric FoliationChart::metric(std::size_t k, double r) const {
    const double er = std::exp(r), inv = 1.0 / er;
    const double c = 0.5 * (er + inv), s = 0.5 * (er - inv);
    const double e2v = e2v_[k];
    const double l1 = data_.lam1[k], l2 = data_.lam2[k];
    const double p1 = c + l1 * s, p2 = c + l2 * s;

    ChartMetric m;
    m.g11 = e2v * p1 * p1;
    m.g22 = e2v * p2 * p2;
    m.dr_g11 = 2.0 * e2v * p1 * (s + l1 * c);
    m.dr_g22 = 2.0 * e2v * p2 * (s + l2 * c);
    // d/dx [e^{2v} p^2] = 2 g vx + 2 e^{2v} p s lam_x
    m.d1_g11 = 2.0 * m.g11 * vx_[k] + 2.0 * e2v * p1 * s * l1x_[k];
    m.d2_g11 = 2.0 * m.g11 * vy_[k] + 2.0 * e2v * p1 * s * l1y_[k];
    m.d1_g22 = 2.0 * m.g22 * vx_[k] + 2.0 * e2v * p2 * s * l2x_[k];
    m.d2_g22 = 2.0 * m.g22 * vy_[k] + 2.0 * e2v * p2 * s * l2y_[k];
    m.sqrt_det = e2v * p1 * p2;
    return m;
}

double FoliationChart::area_density(std::size_t k, double r) const {
    const double er = std::exp(r), inv = 1.0 / er;
    const double c = 0.5 * (er + inv), s = 0.5 * (er - inv);
    return e2v_[k] * (c + data_.lam1[k] * s) * (c + data_.lam2[k] * s);
}

FoliationChart build_chart(ReferenceSurfaceData data) {
    return FoliationChart(std::move(data));
}

} // namespace cmcflow
