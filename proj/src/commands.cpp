#include "cmcflow/commands.hpp"

#include "cmcflow/chart.hpp"
#include "cmcflow/errors.hpp"
#include "cmcflow/foliation.hpp"
#include "cmcflow/io.hpp"
#include "cmcflow/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace cmcflow {

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw InvalidDataError("sweep count must be >= 1");
    std::vector<double> out;
    if (count == 1) {
        out.push_back(lo);
        return out;
    }
    for (int k = 0; k < count; ++k)
        out.push_back(lo + (hi - lo) * k / (count - 1));
    return out;
}

void ensure_out_dir(const RunConfig& config) {
    if (config.out_dir.empty())
        throw InvalidDataError("an output directory is required (--out)");
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + config.out_dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

Field initial_height(const Grid& grid, double r, double perturb_amp) {
    Field u(grid.size(), r);
    if (perturb_amp != 0.0) {
        const double k = 2.0 * std::numbers::pi / grid.lx;
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i)
                u[grid.at(i, j)] += perturb_amp * std::sin(k * grid.x1(i));
    }
    return u;
}

bool is_fuchsian(const ReferenceSurfaceData& data) {
    for (std::size_t k = 0; k < data.grid.size(); ++k)
        if (data.v[k] != 0.0 || data.lam1[k] != 0.0 || data.lam2[k] != 0.0)
            return false;
    return true;
}

int status_exit_code(FlowStatus s) {
    switch (s) {
        case FlowStatus::Converged: return 0;
        case FlowStatus::TMaxReached: return 2;
        case FlowStatus::GraphViolation: return 3;
        case FlowStatus::StepFailure: return 3;
    }
    return 3;
}

/// Runs one flow and persists data.txt, config.txt, trajectory.csv,
/// snapshot_last.txt (refreshed per record), snapshot_final.txt, outcome.txt.
FlowOutcome run_flow_into(const std::string& dir, const ReferenceSurfaceData& data,
                          const FoliationChart& chart, const RunConfig& config) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);
    write_key_values(join_path(dir, "config.txt"), config.to_key_values());
    write_reference_data(join_path(dir, "data.txt"), data);

    const std::string traj_path = join_path(dir, "trajectory.csv");
    const std::string last_path = join_path(dir, "snapshot_last.txt");

    FlowState start;
    bool resuming = config.resume && fs::exists(last_path) && fs::exists(traj_path);
    if (resuming) {
        const SurfaceSnapshot snap = read_snapshot(last_path);
        if (snap.grid != data.grid)
            throw InvalidDataError("resume snapshot grid does not match the data");
        start.t = snap.t;
        start.surface = graph_geometry(chart, snap.u, false);
        start.surface.volume =
            enclosed_volume(chart, snap.u, config.flow.vol_quad_tol);
        start.h = compute_average_mean_curvature(start.surface);
        start.history = read_trajectory(traj_path);
    } else {
        start = make_flow_state(chart, initial_height(data.grid, config.r,
                                                      config.perturb_amp),
                                config.flow);
    }

    std::ofstream traj(traj_path, resuming ? std::ios::app : std::ios::trunc);
    if (!traj) throw IoError("cannot open for writing: " + traj_path);
    if (!resuming)
        traj << "t,area,volume,h,sup_dev,min_theta,max_a2,sq_dev,u_min,u_max\n";

    auto on_record = [&](const FlowState& st) {
        const FlowRecord& r = st.history.back();
        traj << fmt17(r.t) << ',' << fmt17(r.area) << ',' << fmt17(r.volume) << ','
             << fmt17(r.h) << ',' << fmt17(r.sup_dev) << ',' << fmt17(r.min_theta)
             << ',' << fmt17(r.max_a2) << ',' << fmt17(r.sq_dev) << ','
             << fmt17(r.u_min) << ',' << fmt17(r.u_max) << '\n';
        traj.flush();
        SurfaceSnapshot snap{st.t, st.surface.area, st.surface.volume, st.h,
                             st.surface.grid, st.surface.u};
        write_snapshot(last_path, snap);
    };

    FlowOutcome out = run_flow_from(std::move(start), chart, config.flow, on_record);

    const FlowState& fin = out.final;
    SurfaceSnapshot snap{fin.t, fin.surface.area,
                         enclosed_volume(chart, fin.surface.u,
                                         config.flow.vol_quad_tol),
                         fin.h, fin.surface.grid, fin.surface.u};
    write_snapshot(join_path(dir, "snapshot_final.txt"), snap);

    std::map<std::string, std::string> oc;
    oc["status"] = flow_status_name(out.status);
    oc["t_final"] = fmt17(fin.t);
    oc["records"] = std::to_string(fin.history.size());
    oc["stalled"] = out.stalled ? "1" : "0";
    if (out.c_limit) oc["c_limit"] = fmt17(*out.c_limit);
    if (!out.message.empty()) oc["message"] = out.message;
    write_key_values(join_path(dir, "outcome.txt"), oc);
    return out;
}

void require_artifact(const std::string& path) {
    if (!fs::exists(path)) throw MissingArtifactError("missing run artifact: " + path);
}

bool check_enabled(const RunConfig& config, const std::string& name) {
    if (config.checks.empty()) return true;
    return std::find(config.checks.begin(), config.checks.end(), name) !=
           config.checks.end();
}

} // namespace

std::map<std::string, std::string> RunConfig::to_key_values() const {
    std::map<std::string, std::string> kv;
    kv["data-file"] = data_file;
    kv["gen"] = GeneratorSpec::kind_name(gen.kind);
    kv["amp1"] = fmt17(gen.amp1);
    kv["amp2"] = fmt17(gen.amp2);
    kv["v-amp"] = fmt17(gen.v_amp);
    kv["max-wavenumber"] = std::to_string(gen.max_wavenumber);
    kv["zero-mean-trace"] = gen.zero_mean_trace ? "1" : "0";
    kv["seed"] = std::to_string(gen.seed);
    kv["nx"] = std::to_string(nx);
    kv["ny"] = std::to_string(ny);
    kv["lx"] = fmt17(lx);
    kv["ly"] = fmt17(ly);
    kv["dt-init"] = fmt17(flow.dt_init);
    kv["cfl-safety"] = fmt17(flow.cfl_safety);
    kv["t-max"] = fmt17(flow.t_max);
    kv["eps-converge"] = fmt17(flow.eps_converge);
    kv["eps-volume-drift"] = fmt17(flow.eps_volume_drift);
    kv["record-every"] = std::to_string(flow.record_every);
    kv["scheme"] = FlowConfig::scheme_name(flow.scheme);
    kv["vol-quad-tol"] = fmt17(flow.vol_quad_tol);
    kv["r"] = fmt17(r);
    kv["r-min"] = fmt17(r_min);
    kv["r-max"] = fmt17(r_max);
    kv["r-count"] = std::to_string(r_count);
    kv["perturb-amp"] = fmt17(perturb_amp);
    kv["jobs"] = std::to_string(jobs);
    kv["dt-probe"] = fmt17(dt_probe);
    kv["band-tol"] = fmt17(band_tol);
    std::string joined;
    for (const auto& c : checks) {
        if (!joined.empty()) joined += ',';
        joined += c;
    }
    kv["checks"] = joined;
    return kv;
}

RunConfig RunConfig::from_key_values(const std::map<std::string, std::string>& kv) {
    RunConfig c;
    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    try {
        if (auto* s = get("data-file")) c.data_file = *s;
        if (auto* s = get("gen")) c.gen.kind = GeneratorSpec::kind_from_name(*s);
        if (auto* s = get("amp1")) c.gen.amp1 = std::stod(*s);
        if (auto* s = get("amp2")) c.gen.amp2 = std::stod(*s);
        if (auto* s = get("v-amp")) c.gen.v_amp = std::stod(*s);
        if (auto* s = get("max-wavenumber")) c.gen.max_wavenumber = std::stoi(*s);
        if (auto* s = get("zero-mean-trace")) c.gen.zero_mean_trace = *s == "1";
        if (auto* s = get("seed")) c.gen.seed = std::stoull(*s);
        if (auto* s = get("nx")) c.nx = std::stoi(*s);
        if (auto* s = get("ny")) c.ny = std::stoi(*s);
        if (auto* s = get("lx")) c.lx = std::stod(*s);
        if (auto* s = get("ly")) c.ly = std::stod(*s);
        if (auto* s = get("dt-init")) c.flow.dt_init = std::stod(*s);
        if (auto* s = get("cfl-safety")) c.flow.cfl_safety = std::stod(*s);
        if (auto* s = get("t-max")) c.flow.t_max = std::stod(*s);
        if (auto* s = get("eps-converge")) c.flow.eps_converge = std::stod(*s);
        if (auto* s = get("eps-volume-drift"))
            c.flow.eps_volume_drift = std::stod(*s);
        if (auto* s = get("record-every")) c.flow.record_every = std::stoi(*s);
        if (auto* s = get("scheme")) c.flow.scheme = FlowConfig::scheme_from_name(*s);
        if (auto* s = get("vol-quad-tol")) c.flow.vol_quad_tol = std::stod(*s);
        if (auto* s = get("r")) c.r = std::stod(*s);
        if (auto* s = get("r-min")) c.r_min = std::stod(*s);
        if (auto* s = get("r-max")) c.r_max = std::stod(*s);
        if (auto* s = get("r-count")) c.r_count = std::stoi(*s);
        if (auto* s = get("perturb-amp")) c.perturb_amp = std::stod(*s);
        if (auto* s = get("jobs")) c.jobs = std::stoi(*s);
        if (auto* s = get("dt-probe")) c.dt_probe = std::stod(*s);
        if (auto* s = get("band-tol")) c.band_tol = std::stod(*s);
        if (auto* s = get("checks"); s && !s->empty()) {
            std::istringstream split(*s);
            std::string item;
            while (std::getline(split, item, ',')) c.checks.push_back(item);
        }
    } catch (const std::logic_error&) {
        throw InvalidDataError("malformed numeric value in configuration");
    }
    return c;
}

ReferenceSurfaceData load_reference_data(const RunConfig& config) {
    if (!config.data_file.empty()) return read_reference_data(config.data_file);
    return generate(config.gen, config.nx, config.ny, config.lx, config.ly);
}

int cmd_foliate(const RunConfig& config) {
    ensure_out_dir(config);
    const ReferenceSurfaceData data = load_reference_data(config);
    write_key_values(join_path(config.out_dir, "config.txt"), config.to_key_values());
    write_reference_data(join_path(config.out_dir, "data.txt"), data);

    const auto [h0, kappa0] = reference_averages(data);
    std::ofstream out(join_path(config.out_dir, "leaves.csv"));
    if (!out) throw IoError("cannot open for writing: leaves.csv");
    out << "r,area,area_derivative,h_direct,h_formula,mu_min,mu_max\n";
    for (double r : linspace(config.r_min, config.r_max, config.r_count)) {
        const LeafGeometry leaf = leaf_geometry(data, r);
        double mu_lo = field_min(leaf.mu1), mu_hi = field_max(leaf.mu1);
        mu_lo = std::min(mu_lo, field_min(leaf.mu2));
        mu_hi = std::max(mu_hi, field_max(leaf.mu2));
        std::string darea = "nan";
        try {
            darea = fmt17(leaf_area_derivative(data, r));
        } catch (const PreconditionError&) {
            // derivative formula needs the zero-average normalization
        }
        out << fmt17(r) << ',' << fmt17(leaf_area(data, r)) << ',' << darea << ','
            << fmt17(average_mean_curvature_leaf(data, r)) << ','
            << fmt17(paper_average_formula(h0, kappa0, r)) << ',' << fmt17(mu_lo)
            << ',' << fmt17(mu_hi) << '\n';
    }
    if (!out) throw IoError("write failed: leaves.csv");
    return 0;
}

int cmd_flow(const RunConfig& config) {
    ensure_out_dir(config);
    config.flow.validate();
    const ReferenceSurfaceData data = load_reference_data(config);
    const FoliationChart chart = build_chart(data);
    const FlowOutcome out = run_flow_into(config.out_dir, data, chart, config);
    return status_exit_code(out.status);
}

int cmd_sweep(const RunConfig& config) {
    ensure_out_dir(config);
    config.flow.validate();
    const ReferenceSurfaceData data = load_reference_data(config);
    const FoliationChart chart = build_chart(data);
    write_key_values(join_path(config.out_dir, "config.txt"), config.to_key_values());

    const std::vector<double> rows = linspace(config.r_min, config.r_max,
                                              config.r_count);
    struct Row {
        double r = 0.0;
        std::string status;
        double c = std::nan("");
        double lambda_min = std::nan("");
    };
    std::vector<Row> results(rows.size());
    std::vector<FlowOutcome> outcomes(rows.size());

    int jobs = config.jobs > 0 ? config.jobs
                               : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::clamp<int>(jobs, 1, static_cast<int>(rows.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i; (i = next.fetch_add(1)) < rows.size();) {
            RunConfig row_cfg = config;
            row_cfg.r = rows[i];
            row_cfg.resume = false;
            char name[32];
            std::snprintf(name, sizeof(name), "row_%03zu", i);
            row_cfg.out_dir = join_path(config.out_dir, name);
            results[i].r = rows[i];
            try {
                outcomes[i] = run_flow_into(row_cfg.out_dir, data, chart, row_cfg);
                results[i].status = flow_status_name(outcomes[i].status);
                if (outcomes[i].c_limit) results[i].c = *outcomes[i].c_limit;
            } catch (const std::exception& e) {
                results[i].status = std::string("error: ") + e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    // Eigen-solves run sequentially after the flows (the FFT planner is not
    // thread-safe).
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (outcomes[i].c_limit) {
            try {
                GraphSurface s = graph_geometry(chart, outcomes[i].final.surface.u);
                results[i].lambda_min = lowest_eigenvalue(s).lambda_min;
            } catch (const std::exception&) {
                // lambda_min column stays nan; the flow result is unaffected
            }
        }

    const SmallCurvatureConstants scc = small_curvature_constants(data);
    std::ofstream out(join_path(config.out_dir, "sweep.csv"));
    if (!out) throw IoError("cannot open for writing: sweep.csv");
    out << "r,c,lower_bound,upper_bound,status,lambda_min\n";
    bool all_converged = true;
    for (const Row& row : results) {
        out << fmt17(row.r) << ',' << fmt17(row.c) << ','
            << fmt17(2.0 * std::tanh(row.r - scc.beta)) << ','
            << fmt17(2.0 * std::tanh(row.r + scc.beta)) << ',' << row.status << ','
            << fmt17(row.lambda_min) << '\n';
        if (row.status != "converged") all_converged = false;
    }
    if (!out) throw IoError("write failed: sweep.csv");
    return all_converged ? 0 : 2;
}

int cmd_stability(const RunConfig& config) {
    ensure_out_dir(config);
    const std::string snap_path = join_path(config.out_dir, "snapshot_final.txt");
    const std::string data_path = join_path(config.out_dir, "data.txt");

    ReferenceSurfaceData data;
    Field u;
    if (fs::exists(snap_path)) {
        require_artifact(data_path);
        data = read_reference_data(data_path);
        const SurfaceSnapshot snap = read_snapshot(snap_path);
        if (snap.grid != data.grid)
            throw InvalidDataError("snapshot grid does not match the data");
        u = snap.u;
    } else {
        data = load_reference_data(config);
        u = Field(data.grid.size(), config.r);
        write_key_values(join_path(config.out_dir, "config.txt"),
                         config.to_key_values());
    }
    const FoliationChart chart = build_chart(data);
    const GraphSurface surface = graph_geometry(chart, u);
    StabilityReport rep = lowest_eigenvalue(surface);

    std::map<std::string, std::string> kv;
    kv["lambda_min"] = fmt17(rep.lambda_min);
    kv["strictly_stable"] = rep.strictly_stable ? "1" : "0";
    const std::string traj_path = join_path(config.out_dir, "trajectory.csv");
    if (fs::exists(traj_path)) {
        try {
            const RateCheckReport rate =
                exponential_rate_check(rep, read_trajectory(traj_path));
            rep.fitted_decay_rate = rate.fitted_rate;
            kv["fitted_decay_rate"] = fmt17(rate.fitted_rate);
            kv["rate_at_least_2lambda"] = rate.rate_at_least_2lambda ? "1" : "0";
        } catch (const InsufficientDataError& e) {
            kv["fitted_decay_rate"] = "unavailable";
            kv["rate_note"] = e.what();
        }
    }
    write_key_values(join_path(config.out_dir, "stability.txt"), kv);
    write_field(join_path(config.out_dir, "eigenfunction.txt"), surface.grid,
                rep.eigenfunction);
    return 0;
}

int cmd_check(const RunConfig& config) {
    if (config.out_dir.empty())
        throw InvalidDataError("a run directory is required (--out)");
    const std::string dir = config.out_dir;
    require_artifact(join_path(dir, "config.txt"));
    require_artifact(join_path(dir, "data.txt"));
    require_artifact(join_path(dir, "trajectory.csv"));
    require_artifact(join_path(dir, "snapshot_final.txt"));

    const RunConfig run_cfg =
        RunConfig::from_key_values(read_key_values(join_path(dir, "config.txt")));
    const ReferenceSurfaceData data =
        read_reference_data(join_path(dir, "data.txt"));
    const FlowHistory history = read_trajectory(join_path(dir, "trajectory.csv"));
    const SurfaceSnapshot snap = read_snapshot(join_path(dir, "snapshot_final.txt"));
    if (snap.grid != data.grid)
        throw InvalidDataError("snapshot grid does not match the data");
    const FoliationChart chart = build_chart(data);

    std::ofstream out(join_path(dir, "checks.csv"));
    if (!out) throw IoError("cannot open for writing: checks.csv");
    out << "check,status,value\n";
    bool all_pass = true;
    auto emit = [&](const std::string& name, const std::string& status,
                    double value) {
        out << name << ',' << status << ',' << fmt17(value) << '\n';
        if (status == "fail") all_pass = false;
    };

    if (check_enabled(config, "volume-drift")) {
        if (history.empty()) throw InsufficientDataError("empty trajectory");
        const double v0 = history.front().volume;
        double drift = 0.0;
        for (const FlowRecord& r : history)
            drift = std::max(drift,
                             std::abs(r.volume - v0) / std::max(1.0, std::abs(v0)));
        emit("volume-drift", drift <= run_cfg.flow.eps_volume_drift ? "pass" : "fail",
             drift);
    }
    if (check_enabled(config, "dissipation")) {
        try {
            const DissipationReport rep = area_dissipation_check(history);
            emit("dissipation", rep.max_rel_residual <= 5e-3 ? "pass" : "fail",
                 rep.max_rel_residual);
        } catch (const InsufficientDataError&) {
            emit("dissipation", "skipped", 0.0);
        }
    }
    if (check_enabled(config, "theta-identity")) {
        const GraphSurface s = graph_geometry(chart, snap.u, false);
        const double res = theta_gradient_identity_check(s).max_residual;
        emit("theta-identity", res <= 1e-3 ? "pass" : "fail", res);
    }
    if (check_enabled(config, "height-band")) {
        const SmallCurvatureConstants scc = small_curvature_constants(data);
        // The band bounds the distance of the trajectory from the starting
        // leaf; a perturbed start legitimately begins that far outside it.
        const double tol = run_cfg.band_tol + std::abs(run_cfg.perturb_amp);
        const HeightBandReport rep =
            height_band_check(history, run_cfg.r, scc.beta, tol);
        emit("height-band", rep.inside ? "pass" : "fail",
             std::min(rep.worst_low, rep.worst_high));
    }
    if (check_enabled(config, "eq-h")) {
        // The constant curvature term in the evolution identity holds only on
        // the exactly hyperbolic (Fuchsian) chart.
        if (is_fuchsian(data)) {
            FlowState st;
            st.t = snap.t;
            st.surface = graph_geometry(chart, snap.u, false);
            st.h = compute_average_mean_curvature(st.surface);
            const EvolutionCheckReport rep =
                mean_curvature_evolution_check(chart, st, config.dt_probe);
            emit("eq-h", rep.max_residual <= 1e-3 ? "pass" : "fail",
                 rep.max_residual);
        } else {
            emit("eq-h", "skipped", 0.0);
        }
    }
    if (!out) throw IoError("write failed: checks.csv");
    return all_pass ? 0 : 2;
}

} // namespace cmcflow
