#pragma once

#include "cmcflow/grid.hpp"
#include "cmcflow/reference_data.hpp"

#include <utility>
#include <vector>

namespace cmcflow {

/// Symmetric 2x2 tensor at a grid point.
struct Sym2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    double det() const { return a11 * a22 - a12 * a12; }
    double trace() const { return a11 + a22; }
};

using TensorField = std::vector<Sym2>;

/// Exact geometry of the equidistant leaf S(r).
struct LeafGeometry {
    double r = 0.0;
    TensorField g;      // induced metric
    TensorField a2ff;   // second fundamental form
    Field mu1, mu2;     // principal curvatures, each in (-1,1)
    Field hmean;        // mean curvature H(x,r) = mu1 + mu2
    Field area_element; // sqrt(det g)
};

/// Induced metric of the parallel surface at signed distance r:
/// e^{2v} [cosh(r) I + sinh(r) e^{-2v} A]^2, diagonal in the isothermal frame.
TensorField parallel_metric(const ReferenceSurfaceData& data, double r);

/// Second fundamental form of S(r):
/// e^{2v} [cosh(r) I + sinh(r) e^{-2v} A][sinh(r) I + cosh(r) e^{-2v} A].
TensorField parallel_second_fundamental(const ReferenceSurfaceData& data, double r);

/// mu_j = (tanh r + lam_j) / (1 + lam_j tanh r). Throws PreconditionError when
/// |lam_j| exceeds the guard band.
std::pair<double, double> principal_curvatures(double lam1, double lam2, double r);

/// H(x,r) = mu_1 + mu_2, evaluated through the rational closed form.
double mean_curvature_parallel(double lam1, double lam2, double r);

LeafGeometry leaf_geometry(const ReferenceSurfaceData& data, double r);

/// |S(r)| = int (cosh^2 r + (l1+l2) sinh r cosh r + l1 l2 sinh^2 r) e^{2v} dx.
double leaf_area(const ReferenceSurfaceData& data, double r);

/// d|S(r)|/dr = 2 sinh(r) cosh(r) int (1 + l1 l2) e^{2v} dx, valid only when
/// the average mean curvature of S vanishes. Throws PreconditionError when
/// |int (l1+l2) e^{2v} dx| exceeds tol relative to the reference area.
double leaf_area_derivative(const ReferenceSurfaceData& data, double r,
                            double zero_mean_tol = 1e-10);

/// Direct-integral average: int H(x,r) dmu(r) / |S(r)|.
double average_mean_curvature_leaf(const ReferenceSurfaceData& data, double r);

/// Rational closed form [2(1+k0) tanh r + h0 (1+tanh^2 r)] /
/// [1 + h0 tanh r + k0 tanh^2 r]; exact only for spatially constant lambdas.
/// Throws PreconditionError when the denominator is not positive.
double paper_average_formula(double h0, double kappa0, double r);

/// Average exterior curvature k0 = int l1 l2 e^{2v} dx / |S| and the average
/// mean curvature h0 of S, as inputs to paper_average_formula.
std::pair<double, double> reference_averages(const ReferenceSurfaceData& data);

struct NonsingularityReport {
    bool all_positive = true;
    double min_value = 0.0; // min over grid and r samples of the leaf quadratic
    double argmin_r = 0.0;
};

/// Pointwise positivity of 1 + (l1+l2) tanh r + l1 l2 tanh^2 r across samples.
NonsingularityReport foliation_nonsingularity(const ReferenceSurfaceData& data,
                                              const std::vector<double>& r_samples);

} // namespace cmcflow
