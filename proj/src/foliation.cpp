#include "cmcflow/foliation.hpp"

#include "cmcflow/errors.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace cmcflow {

TensorField parallel_metric(const ReferenceSurfaceData& data, double r) {
    data.validate();
    const double c = std::cosh(r), s = std::sinh(r);
    TensorField out(data.grid.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double e2v = std::exp(2.0 * data.v[k]);
        const double p1 = c + data.lam1[k] * s;
        const double p2 = c + data.lam2[k] * s;
        out[k] = {e2v * p1 * p1, 0.0, e2v * p2 * p2};
        assert(out[k].a11 > 0.0 && out[k].det() > 0.0);
    }
    return out;
}

TensorField parallel_second_fundamental(const ReferenceSurfaceData& data, double r) {
    data.validate();
    const double c = std::cosh(r), s = std::sinh(r);
    TensorField out(data.grid.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double e2v = std::exp(2.0 * data.v[k]);
        const double l1 = data.lam1[k], l2 = data.lam2[k];
        out[k] = {e2v * (c + l1 * s) * (s + l1 * c), 0.0,
                  e2v * (c + l2 * s) * (s + l2 * c)};
    }
    return out;
}

static double mu_of(double lam, double t) { return (t + lam) / (1.0 + lam * t); }

std::pair<double, double> principal_curvatures(double lam1, double lam2, double r) {
    if (std::abs(lam1) > kLambdaGuard || std::abs(lam2) > kLambdaGuard)
        throw PreconditionError("principal_curvatures: |lambda| out of the guard band");
    const double t = std::tanh(r);
    return {mu_of(lam1, t), mu_of(lam2, t)};
}

double mean_curvature_parallel(double lam1, double lam2, double r) {
    auto [m1, m2] = principal_curvatures(lam1, lam2, r);
    return m1 + m2;
}

LeafGeometry leaf_geometry(const ReferenceSurfaceData& data, double r) {
    LeafGeometry leaf;
    leaf.r = r;
    leaf.g = parallel_metric(data, r);
    leaf.a2ff = parallel_second_fundamental(data, r);
    const std::size_t n = data.grid.size();
    leaf.mu1.resize(n);
    leaf.mu2.resize(n);
    leaf.hmean.resize(n);
    leaf.area_element.resize(n);
    const double t = std::tanh(r);
    for (std::size_t k = 0; k < n; ++k) {
        leaf.mu1[k] = mu_of(data.lam1[k], t);
        leaf.mu2[k] = mu_of(data.lam2[k], t);
        leaf.hmean[k] = leaf.mu1[k] + leaf.mu2[k];
        leaf.area_element[k] = std::sqrt(leaf.g[k].det());
    }
    return leaf;
}

double leaf_area(const ReferenceSurfaceData& data, double r) {
    data.validate();
    const double c = std::cosh(r), s = std::sinh(r);
    double acc = 0.0;
    for (std::size_t k = 0; k < data.grid.size(); ++k) {
        const double l1 = data.lam1[k], l2 = data.lam2[k];
        acc += std::exp(2.0 * data.v[k]) *
               (c * c + (l1 + l2) * s * c + l1 * l2 * s * s);
    }
    return acc * data.grid.cell_area();
}

double leaf_area_derivative(const ReferenceSurfaceData& data, double r,
                            double zero_mean_tol) {
    data.validate();
    double trace_mean = 0.0, weight = 0.0, kernel = 0.0;
    for (std::size_t k = 0; k < data.grid.size(); ++k) {
        const double w = std::exp(2.0 * data.v[k]);
        trace_mean += (data.lam1[k] + data.lam2[k]) * w;
        kernel += (1.0 + data.lam1[k] * data.lam2[k]) * w;
        weight += w;
    }
    if (std::abs(trace_mean) > zero_mean_tol * weight)
        throw PreconditionError(
            "leaf_area_derivative: average mean curvature of S is not zero");
    return 2.0 * std::sinh(r) * std::cosh(r) * kernel * data.grid.cell_area();
}

double average_mean_curvature_leaf(const ReferenceSurfaceData& data, double r) {
    const LeafGeometry leaf = leaf_geometry(data, r);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < leaf.hmean.size(); ++k) {
        num += leaf.hmean[k] * leaf.area_element[k];
        den += leaf.area_element[k];
    }
    return num / den;
}

double paper_average_formula(double h0, double kappa0, double r) {
    const double t = std::tanh(r);
    const double den = 1.0 + h0 * t + kappa0 * t * t;
    if (!(den > 0.0))
        throw PreconditionError("paper_average_formula: non-positive denominator");
    return (2.0 * (1.0 + kappa0) * t + h0 * (1.0 + t * t)) / den;
}

std::pair<double, double> reference_averages(const ReferenceSurfaceData& data) {
    data.validate();
    double h0 = 0.0, k0 = 0.0, w = 0.0;
    for (std::size_t k = 0; k < data.grid.size(); ++k) {
        const double e2v = std::exp(2.0 * data.v[k]);
        h0 += (data.lam1[k] + data.lam2[k]) * e2v;
        k0 += data.lam1[k] * data.lam2[k] * e2v;
        w += e2v;
    }
    return {h0 / w, k0 / w};
}

NonsingularityReport foliation_nonsingularity(const ReferenceSurfaceData& data,
                                              const std::vector<double>& r_samples) {
    data.validate();
    NonsingularityReport rep;
    rep.min_value = std::numeric_limits<double>::infinity();
    for (double r : r_samples) {
        const double t = std::tanh(r);
        for (std::size_t k = 0; k < data.grid.size(); ++k) {
            const double l1 = data.lam1[k], l2 = data.lam2[k];
            const double q = 1.0 + (l1 + l2) * t + l1 * l2 * t * t;
            if (q < rep.min_value) {
                rep.min_value = q;
                rep.argmin_r = r;
            }
        }
    }
    rep.all_positive = rep.min_value > 0.0;
    return rep;
}

} // namespace cmcflow
