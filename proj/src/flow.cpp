#include "cmcflow/flow.hpp"

#include "cmcflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmcflow {

void FlowConfig::validate() const {
    if (!(dt_init > 0.0) || !(t_max > 0.0) || !(eps_converge > 0.0) ||
        !(eps_volume_drift > 0.0) || record_every < 1)
        throw InvalidDataError("flow config: tolerances and steps must be positive");
    if (!(cfl_safety > 0.0) || cfl_safety > 1.0)
        throw InvalidDataError("flow config: cfl_safety must be in (0, 1]");
}

TimeScheme FlowConfig::scheme_from_name(const std::string& name) {
    if (name == "explicit-rk2") return TimeScheme::ExplicitRk2;
    if (name == "semi-implicit") return TimeScheme::SemiImplicit;
    throw InvalidDataError("unknown time scheme: " + name);
}

std::string FlowConfig::scheme_name(TimeScheme s) {
    return s == TimeScheme::ExplicitRk2 ? "explicit-rk2" : "semi-implicit";
}

std::string flow_status_name(FlowStatus s) {
    switch (s) {
        case FlowStatus::Converged: return "converged";
        case FlowStatus::TMaxReached: return "t_max_reached";
        case FlowStatus::GraphViolation: return "graph_violation";
        case FlowStatus::StepFailure: return "step_failure";
    }
    return "?";
}

double compute_average_mean_curvature(const GraphSurface& s) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < s.w.size(); ++k) {
        num += s.hmean[k] * s.w[k];
        den += s.w[k];
    }
    return num / den;
}

Field flow_rhs(const GraphSurface& s, double h) {
    Field f(s.u.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        f[k] = (h - s.hmean[k]) / s.theta[k];
    return f;
}

double stable_dt(const GraphSurface& s, const FlowConfig& config) {
    const double idx2 = 1.0 / (s.grid.dx() * s.grid.dx());
    const double idy2 = 1.0 / (s.grid.dy() * s.grid.dy());
    const double idxy = 1.0 / (s.grid.dx() * s.grid.dy());
    double coeff = 0.0;
    for (std::size_t k = 0; k < s.u.size(); ++k)
        coeff = std::max(coeff, s.Gi11[k] * idx2 + s.Gi22[k] * idy2 +
                                    2.0 * std::abs(s.Gi12[k]) * idxy);
    return config.cfl_safety / (2.0 * coeff);
}

namespace {

double sup_deviation(const GraphSurface& s, double h) {
    double m = 0.0;
    for (double v : s.hmean) m = std::max(m, std::abs(v - h));
    return m;
}

FlowRecord make_record(const FoliationChart& chart, const FlowState& state,
                       const FlowConfig& config) {
    const GraphSurface& s = state.surface;
    FlowRecord rec;
    rec.t = state.t;
    rec.area = s.area;
    rec.volume = s.volume != 0.0 ? s.volume
                                 : enclosed_volume(chart, s.u, config.vol_quad_tol);
    rec.h = state.h;
    rec.sup_dev = sup_deviation(s, state.h);
    rec.min_theta = field_min(s.theta);
    rec.max_a2 = field_max(s.a2norm);
    double sq = 0.0;
    for (std::size_t k = 0; k < s.w.size(); ++k) {
        const double d = s.hmean[k] - state.h;
        sq += d * d * s.w[k];
    }
    rec.sq_dev = sq * s.grid.cell_area();
    rec.u_min = field_min(s.u);
    rec.u_max = field_max(s.u);
    return rec;
}

// Preconditioned CG in the sqrt(det G)-weighted inner product.
Field solve_pcg(const std::function<Field(const Field&)>& apply, const Field& b,
                const Field& weight, const Field& precond_diag, double tol,
                int max_iter, double cell_area) {
    auto dot = [&](const Field& x, const Field& y) {
        double acc = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * y[k] * weight[k];
        return acc * cell_area;
    };
    Field x(b.size(), 0.0), r = b, z(b.size());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = r[k] / precond_diag[k];
    Field p = z;
    double rz = dot(r, z);
    const double b_norm = std::sqrt(dot(b, b));
    if (b_norm == 0.0) return x;
    for (int it = 0; it < max_iter; ++it) {
        const Field ap = apply(p);
        const double alpha = rz / dot(p, ap);
        for (std::size_t k = 0; k < x.size(); ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        if (std::sqrt(dot(r, r)) <= tol * b_norm) return x;
        for (std::size_t k = 0; k < z.size(); ++k) z[k] = r[k] / precond_diag[k];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = z[k] + beta * p[k];
    }
    throw IterationFailureError("semi-implicit solve: CG did not converge");
}

// Height update of the semi-implicit scheme: the second-order part of the
// quasilinear operator (diffusion matrix G^{ij}) is frozen at the current
// surface and treated implicitly in divergence form.
Field semi_implicit_update(const FoliationChart& chart, const GraphSurface& s,
                           double h, double dt) {
    const Field f = flow_rhs(s, h);
    const Grid& grid = s.grid;
    const double idx2 = 1.0 / (grid.dx() * grid.dx());
    const double idy2 = 1.0 / (grid.dy() * grid.dy());

    auto apply = [&](const Field& phi) {
        const Field lap = laplace_beltrami_fd(s, phi);
        Field out(phi.size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = phi[k] - dt * lap[k];
        return out;
    };
    Field diag(s.u.size());
    for (std::size_t k = 0; k < diag.size(); ++k)
        diag[k] = 1.0 + 2.0 * dt * (s.Gi11[k] * idx2 + s.Gi22[k] * idy2);
    Field b(f.size());
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = dt * f[k];
    const Field delta =
        solve_pcg(apply, b, s.w, diag, 1e-10, 20 * (grid.nx + grid.ny), grid.cell_area());
    Field u_new = s.u;
    for (std::size_t k = 0; k < u_new.size(); ++k) u_new[k] += delta[k];
    return u_new;
}

} // namespace

FlowState flow_step(const FlowState& state, const FoliationChart& chart, double dt,
                    const FlowConfig& config) {
    if (!(dt > 0.0)) throw PreconditionError("flow_step: dt must be positive");
    const GraphSurface& s0 = state.surface;
    Field u_new;
    if (config.scheme == TimeScheme::ExplicitRk2) {
        // Heun step; h is re-evaluated at both stages.
        const Field f1 = flow_rhs(s0, state.h);
        Field u_mid = s0.u;
        for (std::size_t k = 0; k < u_mid.size(); ++k) u_mid[k] += dt * f1[k];
        const GraphSurface s_mid = graph_geometry(chart, u_mid, false);
        const double h_mid = compute_average_mean_curvature(s_mid);
        const Field f2 = flow_rhs(s_mid, h_mid);
        u_new = s0.u;
        for (std::size_t k = 0; k < u_new.size(); ++k)
            u_new[k] += 0.5 * dt * (f1[k] + f2[k]);
    } else {
        u_new = semi_implicit_update(chart, s0, state.h, dt);
    }
    FlowState next;
    next.t = state.t + dt;
    next.surface = graph_geometry(chart, u_new, false);
    next.h = compute_average_mean_curvature(next.surface);
    next.history = state.history;
    return next;
}

FlowState make_flow_state(const FoliationChart& chart, const Field& u0,
                          const FlowConfig& config) {
    FlowState state;
    state.t = 0.0;
    state.surface = graph_geometry(chart, u0, false);
    state.surface.volume = enclosed_volume(chart, u0, config.vol_quad_tol);
    state.h = compute_average_mean_curvature(state.surface);
    return state;
}

FlowOutcome run_flow_from(FlowState state, const FoliationChart& chart,
                          const FlowConfig& config,
                          const std::function<void(const FlowState&)>& on_record) {
    config.validate();
    FlowOutcome out;

    auto record = [&](FlowState& st) {
        st.surface.volume = enclosed_volume(chart, st.surface.u, config.vol_quad_tol);
        st.history.push_back(make_record(chart, st, config));
        if (on_record) on_record(st);
    };

    if (state.history.empty()) record(state);

    int steps_since_record = 0;
    int steps_since_stall_probe = 0;
    double stall_area = state.surface.area;
    try {
        while (true) {
            if (sup_deviation(state.surface, state.h) <= config.eps_converge) {
                if (state.history.back().t < state.t) record(state);
                out.status = FlowStatus::Converged;
                out.c_limit = state.h;
                break;
            }
            if (state.t >= config.t_max) {
                if (state.history.back().t < state.t) record(state);
                out.status = FlowStatus::TMaxReached;
                break;
            }
            double dt = config.dt_init;
            if (config.scheme == TimeScheme::ExplicitRk2)
                dt = std::min(dt, stable_dt(state.surface, config));
            dt = std::min(dt, config.t_max - state.t);
            state = flow_step(state, chart, dt, config);
            if (++steps_since_record >= config.record_every) {
                record(state);
                steps_since_record = 0;
            }
            if (++steps_since_stall_probe >= config.stall_window) {
                const double rel =
                    std::abs(state.surface.area - stall_area) / std::max(1.0, stall_area);
                if (rel < config.stall_tol) {
                    if (state.history.back().t < state.t) record(state);
                    out.status = FlowStatus::TMaxReached;
                    out.stalled = true;
                    out.message = "stalled: area stopped changing before convergence";
                    break;
                }
                stall_area = state.surface.area;
                steps_since_stall_probe = 0;
            }
        }
    } catch (const GraphViolationError& e) {
        out.status = FlowStatus::GraphViolation;
        out.message = e.what();
    } catch (const StepFailureError& e) {
        out.status = FlowStatus::StepFailure;
        out.message = e.what();
    }
    out.final = std::move(state);
    return out;
}

FlowOutcome run_flow(const FoliationChart& chart, const Field& u0,
                     const FlowConfig& config,
                     const std::function<void(const FlowState&)>& on_record) {
    return run_flow_from(make_flow_state(chart, u0, config), chart, config, on_record);
}

Field laplace_beltrami_fd(const GraphSurface& s, const Field& phi) {
    const Grid& g = s.grid;
    const std::size_t n = g.size();
    Field ax(n), ay(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
        ax[k] = s.w[k] * s.Gi11[k];
        ay[k] = s.w[k] * s.Gi22[k];
        b[k] = s.w[k] * s.Gi12[k];
    }
    const double idx2 = 1.0 / (g.dx() * g.dx());
    const double idy2 = 1.0 / (g.dy() * g.dy());
    Field out(n);
    // Compact fluxes for the diagonal part, centered differences for the
    // cross part; self-adjoint in the dmu inner product.
    const Field phi_y = d_dx2(g, phi);
    const Field phi_x = d_dx1(g, phi);
    Field bx(n), by(n);
    for (std::size_t k = 0; k < n; ++k) {
        bx[k] = b[k] * phi_x[k];
        by[k] = b[k] * phi_y[k];
    }
    const Field cross1 = d_dx1(g, by);
    const Field cross2 = d_dx2(g, bx);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.at(i, j);
            const double fxp = 0.5 * (ax[k] + ax[g.at(i + 1, j)]) *
                               (phi[g.at(i + 1, j)] - phi[k]);
            const double fxm = 0.5 * (ax[g.at(i - 1, j)] + ax[k]) *
                               (phi[k] - phi[g.at(i - 1, j)]);
            const double fyp = 0.5 * (ay[k] + ay[g.at(i, j + 1)]) *
                               (phi[g.at(i, j + 1)] - phi[k]);
            const double fym = 0.5 * (ay[g.at(i, j - 1)] + ay[k]) *
                               (phi[k] - phi[g.at(i, j - 1)]);
            out[k] = ((fxp - fxm) * idx2 + (fyp - fym) * idy2 + cross1[k] +
                      cross2[k]) /
                     s.w[k];
        }
    return out;
}

DissipationReport area_dissipation_check(const FlowHistory& history, double rel_floor) {
    if (history.size() < 3)
        throw InsufficientDataError("area_dissipation_check: need >= 3 records");
    DissipationReport rep;
    double sq_max = 0.0;
    for (const FlowRecord& r : history) sq_max = std::max(sq_max, r.sq_dev);
    for (std::size_t k = 1; k + 1 < history.size(); ++k) {
        const FlowRecord& lo = history[k - 1];
        const FlowRecord& mid = history[k];
        const FlowRecord& hi = history[k + 1];
        if (mid.sq_dev < rel_floor * sq_max) continue;
        const double lhs = (hi.area - lo.area) / (hi.t - lo.t);
        const double rhs = -mid.sq_dev;
        rep.max_rel_residual =
            std::max(rep.max_rel_residual, std::abs(lhs - rhs) / std::abs(rhs));
        ++rep.samples_used;
    }
    return rep;
}

EvolutionCheckReport mean_curvature_evolution_check(const FoliationChart& chart,
                                                    const FlowState& state,
                                                    double dt_probe) {
    if (!(dt_probe > 0.0))
        throw PreconditionError("mean_curvature_evolution_check: dt_probe > 0");
    const GraphSurface& s = state.surface;
    const Field f = flow_rhs(s, state.h);
    Field u1 = s.u;
    for (std::size_t k = 0; k < u1.size(); ++k) u1[k] += dt_probe * f[k];
    const GraphSurface s1 = graph_geometry(chart, u1, false);

    EvolutionCheckReport rep;
    rep.fd_dH_dt.resize(s.u.size());
    for (std::size_t k = 0; k < s.u.size(); ++k)
        rep.fd_dH_dt[k] = (s1.hmean[k] - s.hmean[k]) / dt_probe;

    const Field lap_h = laplace_beltrami_fd(s, s.hmean);
    const Field h_x = d_dx1(s.grid, s.hmean);
    const Field h_y = d_dx2(s.grid, s.hmean);
    for (std::size_t k = 0; k < s.u.size(); ++k) {
        const double rhs = lap_h[k] + (s.hmean[k] - state.h) * (s.a2norm[k] - 2.0);
        // The fixed-grid parametrization sees the tangential drift of the
        // flow map as an advection of the H field.
        const ChartMetric m = chart.metric(k, s.u[k]);
        const double adv = (state.h - s.hmean[k]) * s.theta[k] *
                           (s.u1[k] / m.g11 * h_x[k] + s.u2[k] / m.g22 * h_y[k]);
        rep.max_residual = std::max(rep.max_residual, std::abs(rep.fd_dH_dt[k] - rhs));
        rep.max_residual_full =
            std::max(rep.max_residual_full, std::abs(rep.fd_dH_dt[k] - rhs - adv));
    }
    return rep;
}

HeightBandReport height_band_check(const FlowHistory& history, double r, double beta,
                                   double tol) {
    if (history.empty())
        throw InsufficientDataError("height_band_check: empty history");
    HeightBandReport rep;
    rep.worst_low = std::numeric_limits<double>::infinity();
    rep.worst_high = std::numeric_limits<double>::infinity();
    const double lo = r - 2.0 * beta, hi = r + 2.0 * beta;
    for (const FlowRecord& rec : history) {
        rep.worst_low = std::min(rep.worst_low, rec.u_min - lo);
        rep.worst_high = std::min(rep.worst_high, hi - rec.u_max);
        if (rec.u_min < lo - tol || rec.u_max > hi + tol) rep.inside = false;
    }
    return rep;
}

} // namespace cmcflow
