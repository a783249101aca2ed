#include "cmcflow/datagen.hpp"

#include "cmcflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cmcflow {

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

GeneratorKind GeneratorSpec::kind_from_name(const std::string& name) {
    if (name == "fuchsian") return GeneratorKind::Fuchsian;
    if (name == "constant-lambda") return GeneratorKind::ConstantLambda;
    if (name == "fourier-bump") return GeneratorKind::FourierBump;
    throw InvalidDataError("unknown generator kind: " + name);
}

std::string GeneratorSpec::kind_name(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::Fuchsian: return "fuchsian";
        case GeneratorKind::ConstantLambda: return "constant-lambda";
        case GeneratorKind::FourierBump: return "fourier-bump";
    }
    return "?";
}

namespace {

struct Mode {
    int kx, ky;
    double amp, phase;
};

// Band-limited random trig polynomial, normalized so sup|f| <= 1 via the
// grid-independent bound sum|amp|. Evaluating the modes directly keeps the
// continuum function identical across grid resolutions.
std::vector<Mode> draw_modes(SplitMix64& rng, int kmax, int n_modes) {
    std::vector<Mode> modes;
    modes.reserve(n_modes);
    double norm = 0.0;
    for (int m = 0; m < n_modes; ++m) {
        Mode md;
        md.kx = static_cast<int>(rng.next() % static_cast<std::uint64_t>(2 * kmax + 1)) - kmax;
        md.ky = static_cast<int>(rng.next() % static_cast<std::uint64_t>(2 * kmax + 1)) - kmax;
        if (md.kx == 0 && md.ky == 0) md.ky = 1;
        md.amp = rng.uniform(0.2, 1.0);
        md.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        norm += std::abs(md.amp);
        modes.push_back(md);
    }
    for (Mode& md : modes) md.amp /= norm;
    return modes;
}

Field eval_modes(const Grid& g, const std::vector<Mode>& modes, double scale) {
    Field f(g.size(), 0.0);
    const double tp = 2.0 * std::numbers::pi;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double acc = 0.0;
            const double sx = static_cast<double>(i) / g.nx;
            const double sy = static_cast<double>(j) / g.ny;
            for (const Mode& md : modes)
                acc += md.amp * std::cos(tp * (md.kx * sx + md.ky * sy) + md.phase);
            f[g.at(i, j)] = scale * acc;
        }
    return f;
}

} // namespace

ReferenceSurfaceData generate(const GeneratorSpec& spec, int nx, int ny, double lx,
                              double ly) {
    if (std::abs(spec.amp1) >= 1.0 || std::abs(spec.amp2) >= 1.0)
        throw InvalidDataError("generator amplitude must satisfy |a| < 1");
    ReferenceSurfaceData data;
    data.grid = {nx, ny, lx, ly};
    const std::size_t n = data.grid.size();
    data.v.assign(n, 0.0);
    data.lam1.assign(n, 0.0);
    data.lam2.assign(n, 0.0);

    switch (spec.kind) {
        case GeneratorKind::Fuchsian:
            break;
        case GeneratorKind::ConstantLambda:
            data.v.assign(n, spec.v_amp);
            data.lam1.assign(n, spec.amp1);
            data.lam2.assign(n, spec.amp2);
            break;
        case GeneratorKind::FourierBump: {
            const int kmax = std::max(1, std::min({spec.max_wavenumber, nx / 8, ny / 8}));
            SplitMix64 rng(spec.seed);
            const auto mv = draw_modes(rng, kmax, 6);
            const auto m1 = draw_modes(rng, kmax, 6);
            const auto m2 = draw_modes(rng, kmax, 6);
            data.v = eval_modes(data.grid, mv, spec.v_amp);
            data.lam1 = eval_modes(data.grid, m1, spec.amp1);
            data.lam2 = eval_modes(data.grid, m2, spec.amp2);
            break;
        }
    }

    if (spec.zero_mean_trace) {
        double trace = 0.0, weight = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double w = std::exp(2.0 * data.v[k]);
            trace += (data.lam1[k] + data.lam2[k]) * w;
            weight += w;
        }
        const double half_mean = 0.5 * trace / weight;
        for (std::size_t k = 0; k < n; ++k) {
            data.lam1[k] -= half_mean;
            data.lam2[k] -= half_mean;
        }
    }

    data.validate();
    return data;
}

std::pair<double, double> generalized_eigenvalues(const Sym2& g, const Sym2& a) {
    // det(A - mu G) = 0  ->  detG mu^2 - (g11 a22 + g22 a11 - 2 g12 a12) mu + detA = 0
    // Extended precision: near-coincident eigenvalues cancel catastrophically
    // in the discriminant.
    const long double qa = (long double)g.a11 * g.a22 - (long double)g.a12 * g.a12;
    const long double qb = -((long double)g.a11 * a.a22 + (long double)g.a22 * a.a11 -
                             2.0L * g.a12 * a.a12);
    const long double qc = (long double)a.a11 * a.a22 - (long double)a.a12 * a.a12;
    // qb^2 - 4 qa qc rewritten as u^2 + 4 v w, which does not cancel when the
    // two eigenvalues nearly coincide.
    const long double u = (long double)g.a11 * a.a22 - (long double)g.a22 * a.a11;
    const long double v = (long double)g.a11 * a.a12 - (long double)g.a12 * a.a11;
    const long double w = (long double)g.a22 * a.a12 - (long double)g.a12 * a.a22;
    const long double disc = std::sqrt(std::max(0.0L, u * u + 4.0L * v * w));
    const long double q = -0.5L * (qb + std::copysign(disc, qb));
    double r1, r2;
    if (q != 0.0L) {
        r1 = static_cast<double>(q / qa);
        r2 = static_cast<double>(qc / q);
    } else {
        r1 = r2 = 0.0;
    }
    return {std::min(r1, r2), std::max(r1, r2)};
}

std::pair<double, double> eigen_oracle(const ReferenceSurfaceData& data,
                                       std::size_t point_index, double r) {
    const double c = std::cosh(r), s = std::sinh(r);
    const double e2v = std::exp(2.0 * data.v[point_index]);
    const double l1 = data.lam1[point_index], l2 = data.lam2[point_index];
    const Sym2 g{e2v * (c + l1 * s) * (c + l1 * s), 0.0,
                 e2v * (c + l2 * s) * (c + l2 * s)};
    const Sym2 a{e2v * (c + l1 * s) * (s + l1 * c), 0.0,
                 e2v * (c + l2 * s) * (s + l2 * c)};
    return generalized_eigenvalues(g, a);
}

ConvergenceOrder refinement_order_from_errors(const std::vector<double>& errors) {
    ConvergenceOrder out;
    out.errors = errors;
    if (errors.size() < 2) return out;
    // Rounding-dominated errors give an indeterminate (reported, not failed) order.
    for (std::size_t i = 1; i < errors.size(); ++i)
        if (!(errors[i - 1] > errors[i]) || errors[i] <= 0.0) return out;
    double order_sum = 0.0;
    for (std::size_t i = 1; i < errors.size(); ++i)
        order_sum += std::log2(errors[i - 1] / errors[i]);
    out.order = order_sum / static_cast<double>(errors.size() - 1);
    out.determinate = true;
    return out;
}

ConvergenceOrder refinement_order(const std::vector<double>& values) {
    if (values.size() < 3)
        throw PreconditionError("refinement_order: need values on >= 3 nested grids");
    std::vector<double> diffs;
    for (std::size_t i = 1; i < values.size(); ++i)
        diffs.push_back(std::abs(values[i] - values[i - 1]));
    return refinement_order_from_errors(diffs);
}

} // namespace cmcflow
