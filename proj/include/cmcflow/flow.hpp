#pragma once

#include "cmcflow/graph_surface.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cmcflow {

enum class TimeScheme { ExplicitRk2, SemiImplicit };

struct FlowConfig {
    double dt_init = 1e-3;
    double cfl_safety = 0.8;   // in (0, 1]; caps dt by the parabolic bound
    double t_max = 50.0;
    double eps_converge = 1e-6;      // threshold on sup|H - h|
    double eps_volume_drift = 1e-6;  // relative, reported by checks
    int record_every = 10;           // steps between history records
    TimeScheme scheme = TimeScheme::ExplicitRk2;
    double vol_quad_tol = 1e-10;
    // Stall detector: relative area change below stall_tol over stall_window
    // steps flags a non-converging run before t_max.
    int stall_window = 100;
    double stall_tol = 1e-14;

    void validate() const;

    static TimeScheme scheme_from_name(const std::string& name);
    static std::string scheme_name(TimeScheme s);
};

/// One trajectory sample. sq_dev is the dissipation integrand
/// int (H-h)^2 dmu, recorded so the area-dissipation identity and the decay
/// rate fit can be evaluated offline.
struct FlowRecord {
    double t = 0.0;
    double area = 0.0;
    double volume = 0.0;
    double h = 0.0;
    double sup_dev = 0.0;   // sup |H - h|
    double min_theta = 0.0;
    double max_a2 = 0.0;
    double sq_dev = 0.0;    // int (H - h)^2 dmu
    double u_min = 0.0;
    double u_max = 0.0;
};

using FlowHistory = std::vector<FlowRecord>;

struct FlowState {
    double t = 0.0;
    GraphSurface surface;
    double h = 0.0; // average mean curvature of the current surface
    FlowHistory history;
};

enum class FlowStatus { Converged, TMaxReached, GraphViolation, StepFailure };

struct FlowOutcome {
    FlowStatus status = FlowStatus::TMaxReached;
    FlowState final;
    std::optional<double> c_limit; // constant mean curvature, set iff converged
    bool stalled = false;
    std::string message;
};

std::string flow_status_name(FlowStatus s);

/// h = int H dmu / |S|, so that int (H - h) dmu = 0 to rounding.
double compute_average_mean_curvature(const GraphSurface& surface);

/// Right-hand side of the height-function evolution at fixed grid points.
/// The surface moves with normal speed h - H; over fixed footpoints this is
/// du/dt = (h - H)/Theta (the Lagrangian form (h-H)Theta picks up the
/// tangential drift of the flow map, which a fixed-grid graph does not have).
Field flow_rhs(const GraphSurface& surface, double h);

/// Parabolic stability bound for the explicit scheme: the diffusion matrix of
/// the quasilinear operator is G^{ij}.
double stable_dt(const GraphSurface& surface, const FlowConfig& config);

/// One time step of the chosen scheme; h is re-evaluated at every stage.
/// Throws GraphViolationError / StepFailureError as the geometry does.
FlowState flow_step(const FlowState& state, const FoliationChart& chart, double dt,
                    const FlowConfig& config);

FlowState make_flow_state(const FoliationChart& chart, const Field& u0,
                          const FlowConfig& config);

/// Integrates until sup|H-h| <= eps_converge, t_max, stall, or error.
/// on_record, when set, is called after each appended history record.
FlowOutcome run_flow(const FoliationChart& chart, const Field& u0,
                     const FlowConfig& config,
                     const std::function<void(const FlowState&)>& on_record = {});

/// Resume a flow from a previously recorded state (t, u, history).
FlowOutcome run_flow_from(FlowState state, const FoliationChart& chart,
                          const FlowConfig& config,
                          const std::function<void(const FlowState&)>& on_record = {});

/// Divergence-form Laplace-Beltrami of the induced metric, second order.
Field laplace_beltrami_fd(const GraphSurface& surface, const Field& phi);

struct DissipationReport {
    double max_rel_residual = 0.0;
    int samples_used = 0;
};

/// Centered-difference d|S_t|/dt against -int (H-h)^2 dmu at interior record
/// times; records with sq_dev below rel_floor * max sq_dev are skipped.
DissipationReport area_dissipation_check(const FlowHistory& history,
                                         double rel_floor = 1e-6);

struct EvolutionCheckReport {
    double max_residual = 0.0;      // against dH/dt = Lap H + (H-h)(|A|^2-2)
    double max_residual_full = 0.0; // with the fixed-grid advection term added
    Field fd_dH_dt;                 // the probe-step difference quotient
};

/// First-order (Euler) probe of the mean-curvature evolution equation. The
/// "-2" encodes the hyperbolic ambient; on non-Fuchsian synthetic charts the
/// identity is not expected to hold (see README).
EvolutionCheckReport mean_curvature_evolution_check(const FoliationChart& chart,
                                                    const FlowState& state,
                                                    double dt_probe);

struct HeightBandReport {
    bool inside = true;
    double worst_low = 0.0;  // min over records of (u_min - (r - 2 beta))
    double worst_high = 0.0; // min over records of ((r + 2 beta) - u_max)
};

/// Verifies r - 2 beta - tol <= u <= r + 2 beta + tol at every record.
HeightBandReport height_band_check(const FlowHistory& history, double r, double beta,
                                   double tol);

} // namespace cmcflow
