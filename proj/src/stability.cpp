#include "cmcflow/stability.hpp"

#include "cmcflow/datagen.hpp"
#include "cmcflow/errors.hpp"
#include "cmcflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cmcflow {

namespace {

double weighted_dot(const GraphSurface& s, const Field& a, const Field& b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k] * s.w[k];
    return acc * s.grid.cell_area();
}

Field apply_op(const GraphSurface& s, const SpectralDerivative& spec,
               const Field& phi) {
    const Field phi_x = spec.d_dx1(phi);
    const Field phi_y = spec.d_dx2(phi);
    const std::size_t n = phi.size();
    Field fx(n), fy(n);
    for (std::size_t k = 0; k < n; ++k) {
        fx[k] = s.w[k] * (s.Gi11[k] * phi_x[k] + s.Gi12[k] * phi_y[k]);
        fy[k] = s.w[k] * (s.Gi12[k] * phi_x[k] + s.Gi22[k] * phi_y[k]);
    }
    const Field div_x = spec.d_dx1(fx);
    const Field div_y = spec.d_dx2(fy);
    Field out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = -(div_x[k] + div_y[k]) / s.w[k] - (s.a2norm[k] - 2.0) * phi[k];
    return out;
}

} // namespace

Field apply_stability_operator(const GraphSurface& surface, const Field& phi) {
    if (phi.size() != surface.grid.size())
        throw InvalidDataError("apply_stability_operator: field size mismatch");
    SpectralDerivative spec(surface.grid);
    return apply_op(surface, spec, phi);
}

Field project_zero_mean(const GraphSurface& s, const Field& phi) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        num += phi[k] * s.w[k];
        den += s.w[k];
    }
    const double mean = num / den;
    Field out(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k) out[k] = phi[k] - mean;
    return out;
}

StabilityReport lowest_eigenvalue(const GraphSurface& s) {
    const Grid& grid = s.grid;
    SpectralDerivative spec(grid);
    const std::size_t n = grid.size();

    // Work with the symmetrized operator B = W^{1/2} L W^{-1/2} (W = diag of
    // the area density), which is self-adjoint in the plain inner product, and
    // restrict to Nyquist-free functions orthogonal to sqrt(w): the first
    // derivative annihilates Nyquist modes, so the div-form operator has a
    // spurious kernel there, and sqrt(w) encodes the zero-dmu-mean constraint
    // in these coordinates.
    Field sqw(n);
    for (std::size_t k = 0; k < n; ++k) sqw[k] = std::sqrt(s.w[k]);

    auto dot = [&](const Field& a, const Field& b) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
        return acc * grid.cell_area();
    };

    Field cvec = spec.drop_nyquist(sqw);
    {
        const double cn = std::sqrt(dot(cvec, cvec));
        for (double& v : cvec) v /= cn;
    }

    auto restrict_sub = [&](const Field& phi) {
        Field out = spec.drop_nyquist(phi);
        const double c = dot(out, cvec);
        for (std::size_t k = 0; k < n; ++k) out[k] -= c * cvec[k];
        return out;
    };

    auto apply_plp = [&](const Field& phi) {
        const Field inner = restrict_sub(phi);
        Field psi(n);
        for (std::size_t k = 0; k < n; ++k) psi[k] = inner[k] / sqw[k];
        Field lpsi = apply_op(s, spec, psi);
        for (std::size_t k = 0; k < n; ++k) lpsi[k] *= sqw[k];
        return restrict_sub(lpsi);
    };

    // Diagonal preconditioner from the finite-difference stencil scale of the
    // constrained operator; any positive diagonal keeps CG consistent.
    Field diag(n);
    const double idx2 = 1.0 / (grid.dx() * grid.dx());
    const double idy2 = 1.0 / (grid.dy() * grid.dy());
    for (std::size_t k = 0; k < n; ++k)
        diag[k] = 2.0 * (s.Gi11[k] * idx2 + s.Gi22[k] * idy2) +
                  std::max(0.1, -(s.a2norm[k] - 2.0));

    // Signals that the shift overtook the lowest eigenvalue, making the
    // shifted operator indefinite on the subspace.
    struct BadShift {};

    auto solve = [&](const Field& rhs, double sigma) {
        Field x(n, 0.0), r = rhs, z(n);
        for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / diag[k];
        z = restrict_sub(z);
        Field p = z;
        double rz = dot(r, z);
        const double b_norm = std::sqrt(dot(rhs, rhs));
        const int max_iter = 40 * (grid.nx + grid.ny);
        for (int it = 0; it < max_iter; ++it) {
            Field ap = apply_plp(p);
            for (std::size_t k = 0; k < n; ++k) ap[k] -= sigma * p[k];
            const double pap = dot(p, ap);
            if (!(pap > 0.0)) throw BadShift{};
            const double alpha = rz / pap;
            for (std::size_t k = 0; k < n; ++k) {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            if (std::sqrt(dot(r, r)) <= 1e-10 * b_norm) return x;
            for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / diag[k];
            z = restrict_sub(z);
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
        }
        throw IterationFailureError("stability inner solve: CG stalled");
    };

    // Deterministic seed: lowest nonconstant Fourier mode of the longer
    // direction (the candidate ground state on near-flat surfaces) plus fixed
    // broadband noise, so modes the sine is orthogonal to still get an O(1/n)
    // starting component.
    Field phi(n);
    const double tp = 2.0 * std::numbers::pi;
    const bool along_x = grid.lx >= grid.ly;
    SplitMix64 rng(0x5eedu);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            phi[grid.at(i, j)] = (along_x ? std::sin(tp * i / grid.nx)
                                          : std::sin(tp * j / grid.ny)) +
                                 0.1 * rng.uniform(-1.0, 1.0);
    phi = restrict_sub(phi);

    // Inverse iteration with a trailing Rayleigh shift: the shift hugs the
    // eigenvalue from below by a margin tied to the current residual, which
    // keeps the solve positive definite while separating near-degenerate
    // ground states that plain inverse iteration cannot resolve.
    double lambda = 0.0;
    double margin = 1.0;
    const int budget = 200;
    for (int it = 0; it < budget; ++it) {
        const double norm = std::sqrt(dot(phi, phi));
        for (std::size_t k = 0; k < n; ++k) phi[k] /= norm;
        const Field lphi = apply_plp(phi);
        lambda = dot(phi, lphi);
        double resid = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double d = lphi[k] - lambda * phi[k];
            resid += d * d;
        }
        resid = std::sqrt(resid * grid.cell_area());
        if (resid <= 1e-9 * std::max(1.0, std::abs(lambda))) {
            StabilityReport rep;
            rep.lambda_min = lambda;
            // Undo the symmetrization; the plain unit norm of phi is the
            // L2(dmu) unit norm of the eigenfunction.
            rep.eigenfunction.resize(n);
            for (std::size_t k = 0; k < n; ++k)
                rep.eigenfunction[k] = phi[k] / sqw[k];
            rep.strictly_stable = lambda > 0.0;
            return rep;
        }
        try {
            phi = restrict_sub(solve(phi, lambda - margin));
            margin = std::max(2.0 * resid, 1e-8 * std::max(1.0, std::abs(lambda)));
        } catch (const BadShift&) {
            margin *= 4.0;
        }
    }
    throw IterationFailureError("lowest_eigenvalue: inverse iteration did not converge");
}

RateCheckReport exponential_rate_check(const StabilityReport& report,
                                       const FlowHistory& history, double tolerance) {
    double sq_max = 0.0;
    for (const FlowRecord& r : history) sq_max = std::max(sq_max, r.sq_dev);
    const double sq_end = history.empty() ? 0.0 : history.back().sq_dev;
    const double lo = std::max(100.0 * sq_end, 1e-22);
    const double hi = 1e-2 * sq_max;

    std::vector<double> ts, logs;
    for (const FlowRecord& r : history)
        if (r.sq_dev > lo && r.sq_dev < hi) {
            ts.push_back(r.t);
            logs.push_back(std::log(r.sq_dev));
        }
    if (ts.size() < 10)
        throw InsufficientDataError(
            "exponential_rate_check: fewer than 10 late-time records above the noise floor");

    // Least-squares slope of log sq_dev vs t.
    const double m = static_cast<double>(ts.size());
    double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        st += ts[k];
        sl += logs[k];
        stt += ts[k] * ts[k];
        stl += ts[k] * logs[k];
    }
    const double slope = (m * stl - st * sl) / (m * stt - st * st);

    RateCheckReport out;
    out.fitted_rate = -slope;
    out.two_lambda_min = 2.0 * report.lambda_min;
    out.window_records = static_cast<int>(ts.size());
    out.rate_at_least_2lambda = out.fitted_rate >= out.two_lambda_min - tolerance;
    return out;
}

} // namespace cmcflow
