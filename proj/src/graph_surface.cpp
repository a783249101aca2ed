#include "cmcflow/graph_surface.hpp"

#include "cmcflow/errors.hpp"

#include <algorithm>
#include <atomic>
#include <vector>
#include <cmath>

namespace cmcflow {

GraphSurface graph_geometry(const FoliationChart& chart, const Field& u,
                            bool with_volume) {
    const Grid& grid = chart.grid();
    if (u.size() != grid.size())
        throw InvalidDataError("graph_geometry: height field size mismatch");
    if (!field_finite(u))
        throw StepFailureError("graph_geometry: non-finite height field");

    GraphSurface s;
    s.grid = grid;
    s.u = u;
    const std::size_t n = grid.size();
    s.theta.resize(n);
    s.hmean.resize(n);
    s.a2norm.resize(n);
    s.G11.resize(n);
    s.G12.resize(n);
    s.G22.resize(n);
    s.Gi11.resize(n);
    s.Gi12.resize(n);
    s.Gi22.resize(n);
    s.w.resize(n);
    s.u1 = d_dx1(grid, u);
    s.u2 = d_dx2(grid, u);
    const Field u11 = d2_dx1x1(grid, u);
    const Field u22 = d2_dx2x2(grid, u);
    const Field u12 = d2_dx1x2(grid, u);
    Field drw(n), flux1(n), flux2(n);

    // Per-point writes only; the area reduction runs serially afterwards so
    // results do not depend on the thread count.
    std::atomic<bool> degenerate{false};
#pragma omp parallel for schedule(static)
    for (long long kk = 0; kk < static_cast<long long>(n); ++kk) {
        const std::size_t k = static_cast<std::size_t>(kk);
        if (degenerate.load(std::memory_order_relaxed)) continue;
        const ChartMetric m = chart.metric(k, u[k]);
        const double a = m.g11, b = m.g22;
        const double p1 = s.u1[k], p2 = s.u2[k];

        const double q = p1 * p1 / a + p2 * p2 / b; // |grad u|^2 in the leaf metric
        const double theta = 1.0 / std::sqrt(1.0 + q);

        const double G11 = a + p1 * p1;
        const double G12 = p1 * p2;
        const double G22 = b + p2 * p2;
        const double detG = G11 * G22 - G12 * G12;
        if (!(detG > kDetGuard) || !(theta > kThetaGuard)) {
            degenerate.store(true, std::memory_order_relaxed);
            continue;
        }
        const double Gi11 = G22 / detG, Gi12 = -G12 / detG, Gi22 = G11 / detG;

        // h_ij = gbar(nabla_{e_i} nu, e_j) with the upward normal; Christoffel
        // symbols of gbar assembled analytically from g, dg/dr, dg/dx.
        const double h11 = theta * (0.5 * m.dr_g11 - u11[k] +
                                    p1 * m.d1_g11 / (2.0 * a) - p2 * m.d2_g11 / (2.0 * b) +
                                    p1 * p1 * m.dr_g11 / a);
        const double h22 = theta * (0.5 * m.dr_g22 - u22[k] -
                                    p1 * m.d1_g22 / (2.0 * a) + p2 * m.d2_g22 / (2.0 * b) +
                                    p2 * p2 * m.dr_g22 / b);
        const double h12 = theta * (-u12[k] + p1 * m.d2_g11 / (2.0 * a) +
                                    p2 * m.d1_g22 / (2.0 * b) +
                                    p1 * p2 * (m.dr_g11 / (2.0 * a) + m.dr_g22 / (2.0 * b)));

        // |A|^2 = tr(S^2) with the mixed shape operator S = G^{-1} h.
        const double s11 = Gi11 * h11 + Gi12 * h12;
        const double s12 = Gi11 * h12 + Gi12 * h22;
        const double s21 = Gi12 * h11 + Gi22 * h12;
        const double s22 = Gi12 * h12 + Gi22 * h22;
        const double a2 = s11 * s11 + s22 * s22 + 2.0 * s12 * s21;

        const double w = std::sqrt(detG);
        drw[k] = 0.5 * w * (Gi11 * m.dr_g11 + Gi22 * m.dr_g22);
        flux1[k] = w * (Gi11 * p1 + Gi12 * p2);
        flux2[k] = w * (Gi12 * p1 + Gi22 * p2);

        s.theta[k] = theta;
        s.a2norm[k] = a2;
        s.G11[k] = G11;
        s.G12[k] = G12;
        s.G22[k] = G22;
        s.Gi11[k] = Gi11;
        s.Gi12[k] = Gi12;
        s.Gi22[k] = Gi22;
        s.w[k] = w;
    }
    if (degenerate.load())
        throw GraphViolationError("surface left graph form (degenerate metric)");
    // H as the exact variational derivative of the discrete area sum,
    // H = (dw/dr - div flux) / (Theta w): the area dissipation identity
    // d|S|/dt = -int (H-h)^2 dmu then holds exactly for the semi-discrete
    // flow, not just in the continuum limit. Central differences throughout,
    // so the flux divergence is the exact adjoint of the gradient in w.
    const Field div1 = d_dx1(grid, flux1);
    const Field div2 = d_dx2(grid, flux2);
    for (std::size_t k = 0; k < n; ++k)
        s.hmean[k] = (drw[k] - div1[k] - div2[k]) / (s.theta[k] * s.w[k]);
    if (!field_finite(s.hmean) || !field_finite(s.a2norm))
        throw StepFailureError("graph_geometry: non-finite curvature fields");
    double area_acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) area_acc += s.w[k];
    s.area = area_acc * grid.cell_area();
    if (with_volume) s.volume = enclosed_volume(chart, u);
    return s;
}

namespace {

// Symmetric halves of the Gauss-Legendre rules on [-1, 1].
constexpr double kGl16[8][2] = {
    {0.095012509837637454, 0.18945061045506859},
    {0.28160355077925892, 0.18260341504492361},
    {0.45801677765722737, 0.16915651939500262},
    {0.61787624440264377, 0.14959598881657676},
    {0.755404408355003, 0.12462897125553403},
    {0.86563120238783176, 0.095158511682492591},
    {0.9445750230732326, 0.062253523938647706},
    {0.98940093499164994, 0.027152459411754037},
};
constexpr double kGl32[16][2] = {
    {0.04830766568773831, 0.096540088514727812},
    {0.14447196158279649, 0.095638720079274833},
    {0.23928736225213706, 0.093844399080804566},
    {0.33186860228212767, 0.091173878695763863},
    {0.42135127613063533, 0.087652093004403908},
    {0.50689990893222936, 0.083311924226946846},
    {0.5877157572407623, 0.078193895787070311},
    {0.66304426693021523, 0.072345794108848449},
    {0.73218211874028971, 0.065822222776361752},
    {0.79448379596794239, 0.058684093478535704},
    {0.84936761373256997, 0.050998059262376244},
    {0.8963211557660522, 0.042835898022226426},
    {0.93490607593773967, 0.034273862913021626},
    {0.96476225558750639, 0.025392065309262427},
    {0.98561151154526838, 0.016274394730905965},
    {0.99726386184948157, 0.0070186100094692984},
};

// One panel of the embedded 32/16-point Gauss rule; *err gets the
// disagreement between the two orders.
double gauss_panel(const FoliationChart& chart, std::size_t k, double a, double b,
                   double* err) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double g16 = 0.0, g32 = 0.0;
    for (const auto& nw : kGl16)
        g16 += nw[1] * (chart.area_density(k, mid - half * nw[0]) +
                        chart.area_density(k, mid + half * nw[0]));
    for (const auto& nw : kGl32)
        g32 += nw[1] * (chart.area_density(k, mid - half * nw[0]) +
                        chart.area_density(k, mid + half * nw[0]));
    *err = std::abs(half * (g32 - g16));
    return half * g32;
}

double adaptive_gauss(const FoliationChart& chart, std::size_t k, double a, double b,
                      double tol, int depth) {
    double err = 0.0;
    const double whole = gauss_panel(chart, k, a, b, &err);
    // The embedded estimate bottoms out at rounding level; tolerances below
    // that would otherwise force full-depth bisection for no gain.
    if (err <= tol || err <= 4e-16 * std::abs(whole) || depth >= 20) return whole;
    const double mid = 0.5 * (a + b);
    return adaptive_gauss(chart, k, a, mid, 0.5 * tol, depth + 1) +
           adaptive_gauss(chart, k, mid, b, 0.5 * tol, depth + 1);
}

// >= 48 integrand samples per column; the high-order rule is at rounding
// level for these analytic integrands on height ranges of a few units, so
// bisection almost never triggers.
double column_volume(const FoliationChart& chart, std::size_t k, double upper,
                     double tol) {
    if (upper == 0.0) return 0.0;
    return adaptive_gauss(chart, k, 0.0, upper, tol, 0);
}

} // namespace

double enclosed_volume(const FoliationChart& chart, const Field& u, double tol) {
    const Grid& grid = chart.grid();
    if (u.size() != grid.size())
        throw InvalidDataError("enclosed_volume: height field size mismatch");
    const double col_tol = tol / static_cast<double>(grid.size());
    std::vector<double> cols(grid.size());
#pragma omp parallel for schedule(static)
    for (long long kk = 0; kk < static_cast<long long>(grid.size()); ++kk)
        cols[kk] = column_volume(chart, static_cast<std::size_t>(kk), u[kk], col_tol);
    // Serial Kahan summation: volume drift diagnostics difference two nearby
    // totals, and the result must not depend on the thread count.
    double acc = 0.0, comp = 0.0;
    for (double c : cols) {
        const double y = c - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    return acc * grid.cell_area();
}

ThetaIdentityReport theta_gradient_identity_check(const GraphSurface& s) {
    ThetaIdentityReport rep;
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        const double gradG = s.Gi11[k] * s.u1[k] * s.u1[k] +
                             2.0 * s.Gi12[k] * s.u1[k] * s.u2[k] +
                             s.Gi22[k] * s.u2[k] * s.u2[k];
        const double residual = std::abs(s.theta[k] - 1.0 / std::sqrt(1.0 + gradG));
        rep.max_residual = std::max(rep.max_residual, residual);
    }
    return rep;
}

} // namespace cmcflow
