#include "cmcflow/commands.hpp"
#include "cmcflow/errors.hpp"
#include "cmcflow/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

struct CliOptions {
    cmcflow::RunConfig cfg;
    std::string gen_name = "fuchsian";
    std::string scheme_name = "explicit-rk2";
    std::string checks_joined;
    std::string config_path;
};

void add_data_options(CLI::App* app, CliOptions& opt) {
    app->add_option("--data-file", opt.cfg.data_file,
                    "Read reference data from this file instead of generating");
    app->add_option("--gen", opt.gen_name,
                    "Generator: fuchsian, constant-lambda, fourier-bump");
    app->add_option("--amp", opt.cfg.gen.amp1, "Generator amplitude for lam1");
    app->add_option("--amp2", opt.cfg.gen.amp2, "Generator amplitude for lam2");
    app->add_option("--v-amp", opt.cfg.gen.v_amp, "Conformal factor amplitude");
    app->add_option("--max-wavenumber", opt.cfg.gen.max_wavenumber,
                    "Band limit of random modes");
    app->add_flag("--zero-mean-trace", opt.cfg.gen.zero_mean_trace,
                  "Remove the weighted mean of lam1+lam2");
    app->add_option("--seed", opt.cfg.gen.seed, "Generator seed");
    app->add_option("--nx", opt.cfg.nx, "Grid points in x1");
    app->add_option("--ny", opt.cfg.ny, "Grid points in x2");
    app->add_option("--lx", opt.cfg.lx, "Domain period in x1");
    app->add_option("--ly", opt.cfg.ly, "Domain period in x2");
}

void add_flow_options(CLI::App* app, CliOptions& opt) {
    app->add_option("--dt-init", opt.cfg.flow.dt_init, "Initial/maximum time step");
    app->add_option("--cfl-safety", opt.cfg.flow.cfl_safety,
                    "Fraction of the parabolic stability bound");
    app->add_option("--t-max", opt.cfg.flow.t_max, "Time horizon");
    app->add_option("--eps-converge", opt.cfg.flow.eps_converge,
                    "Convergence threshold on sup|H - h|");
    app->add_option("--eps-volume-drift", opt.cfg.flow.eps_volume_drift,
                    "Allowed relative volume drift");
    app->add_option("--record-every", opt.cfg.flow.record_every,
                    "Steps between trajectory records");
    app->add_option("--scheme", opt.scheme_name,
                    "Time scheme: explicit-rk2 or semi-implicit");
    app->add_option("--vol-quad-tol", opt.cfg.flow.vol_quad_tol,
                    "Volume quadrature tolerance");
    app->add_option("--perturb-amp", opt.cfg.perturb_amp,
                    "Sine perturbation amplitude of the initial height");
}

void add_common(CLI::App* app, CliOptions& opt) {
    app->add_option("--out", opt.cfg.out_dir, "Output directory");
    app->add_option("--config", opt.config_path,
                    "Key=value defaults (same format as an emitted config.txt); "
                    "explicit flags win");
}

// Config files act as defaults, so they are loaded before CLI11 writes the
// explicitly given flags over them. The path is extracted by hand because the
// applicable subcommand is not known yet at this point.
void preload_config(int argc, char** argv, std::vector<CliOptions*> all) {
    std::string path;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc)
            path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0)
            path = arg.substr(9);
    }
    if (path.empty()) return;
    const auto kv = cmcflow::read_key_values(path);
    const cmcflow::RunConfig base = cmcflow::RunConfig::from_key_values(kv);
    for (CliOptions* opt : all) {
        opt->cfg = base;
        opt->gen_name = cmcflow::GeneratorSpec::kind_name(base.gen.kind);
        opt->scheme_name = cmcflow::FlowConfig::scheme_name(base.flow.scheme);
    }
}

void finalize(CliOptions& opt) {
    opt.cfg.gen.kind = cmcflow::GeneratorSpec::kind_from_name(opt.gen_name);
    opt.cfg.flow.scheme = cmcflow::FlowConfig::scheme_from_name(opt.scheme_name);
    if (!opt.checks_joined.empty()) {
        std::string item;
        for (char c : opt.checks_joined) {
            if (c == ',') {
                if (!item.empty()) opt.cfg.checks.push_back(item);
                item.clear();
            } else {
                item += c;
            }
        }
        if (!item.empty()) opt.cfg.checks.push_back(item);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equidistant-foliation geometry and volume-preserving mean "
                 "curvature flow of graph surfaces"};
    app.require_subcommand(1);

    CliOptions foliate_opt, flow_opt, sweep_opt, stab_opt, check_opt;

    CLI::App* foliate = app.add_subcommand("foliate", "Leaf geometry over an r grid");
    add_common(foliate, foliate_opt);
    add_data_options(foliate, foliate_opt);
    foliate->add_option("--r-min", foliate_opt.cfg.r_min, "Lowest leaf height");
    foliate->add_option("--r-max", foliate_opt.cfg.r_max, "Highest leaf height");
    foliate->add_option("--r-count", foliate_opt.cfg.r_count, "Number of leaves");

    CLI::App* flow = app.add_subcommand("flow", "Run the volume-preserving flow");
    add_common(flow, flow_opt);
    add_data_options(flow, flow_opt);
    add_flow_options(flow, flow_opt);
    flow->add_option("--r", flow_opt.cfg.r, "Initial leaf height");
    flow->add_flag("--resume", flow_opt.cfg.resume,
                   "Continue from snapshot_last.txt in the output directory");

    CLI::App* sweep = app.add_subcommand("sweep", "Flows over an r range, in parallel");
    add_common(sweep, sweep_opt);
    add_data_options(sweep, sweep_opt);
    add_flow_options(sweep, sweep_opt);
    sweep->add_option("--r-min", sweep_opt.cfg.r_min, "Lowest initial height");
    sweep->add_option("--r-max", sweep_opt.cfg.r_max, "Highest initial height");
    sweep->add_option("--r-count", sweep_opt.cfg.r_count, "Number of rows");
    sweep->add_option("--jobs", sweep_opt.cfg.jobs,
                      "Concurrent rows (0 = hardware threads)");

    CLI::App* stability = app.add_subcommand(
        "stability", "Lowest stability eigenvalue of a surface");
    add_common(stability, stab_opt);
    add_data_options(stability, stab_opt);
    stability->add_option("--r", stab_opt.cfg.r,
                          "Leaf height when no run snapshot exists in --out");

    CLI::App* check = app.add_subcommand("check", "Diagnostics on a completed run");
    add_common(check, check_opt);
    check->add_option("--checks", check_opt.checks_joined,
                      "Comma list: volume-drift,dissipation,theta-identity,"
                      "height-band,eq-h (default: all)");
    check->add_option("--dt-probe", check_opt.cfg.dt_probe,
                      "Probe step for the mean-curvature evolution check");
    check->add_option("--band-tol", check_opt.cfg.band_tol,
                      "Height-band discretization allowance");

    try {
        preload_config(argc, argv, {&foliate_opt, &flow_opt, &sweep_opt, &stab_opt,
                                    &check_opt});
    } catch (const cmcflow::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 4;
    }

    try {
        if (*foliate) {
            finalize(foliate_opt);
            return cmcflow::cmd_foliate(foliate_opt.cfg);
        }
        if (*flow) {
            finalize(flow_opt);
            return cmcflow::cmd_flow(flow_opt.cfg);
        }
        if (*sweep) {
            finalize(sweep_opt);
            return cmcflow::cmd_sweep(sweep_opt.cfg);
        }
        if (*stability) {
            finalize(stab_opt);
            return cmcflow::cmd_stability(stab_opt.cfg);
        }
        if (*check) {
            finalize(check_opt);
            return cmcflow::cmd_check(check_opt.cfg);
        }
    } catch (const cmcflow::GraphViolationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const cmcflow::StepFailureError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const cmcflow::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const cmcflow::MissingArtifactError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 4;
}
