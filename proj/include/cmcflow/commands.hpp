#pragma once

#include "cmcflow/datagen.hpp"
#include "cmcflow/flow.hpp"

#include <map>
#include <string>
#include <vector>

namespace cmcflow {

/// Everything a run needs, assembled from config file plus CLI overrides.
/// Data source is either a reference-data file or a generator spec.
struct RunConfig {
    std::string data_file;
    GeneratorSpec gen;
    int nx = 128;
    int ny = 128;
    double lx = 6.283185307179586;
    double ly = 6.283185307179586;

    FlowConfig flow;

    double r = 0.0;       // initial leaf height (flow) / single leaf (foliate)
    double r_min = -1.0;  // sweep / foliate range
    double r_max = 1.0;
    int r_count = 1;
    double perturb_amp = 0.0; // u0 = r + perturb_amp * sin(2 pi x1 / lx)

    std::string out_dir;
    std::vector<std::string> checks; // empty means every applicable check
    int jobs = 0;                    // 0 means hardware concurrency
    bool resume = false;
    double dt_probe = 1e-5;   // eq-h consistency probe
    double band_tol = 1e-2;   // height-band discretization allowance

    /// Canonical key=value form, written to every output directory.
    std::map<std::string, std::string> to_key_values() const;
    static RunConfig from_key_values(const std::map<std::string, std::string>& kv);
};

/// Materializes the reference data from the configured source.
ReferenceSurfaceData load_reference_data(const RunConfig& config);

/// Exit codes shared by the CLI: 0 converged/success, 2 t_max reached,
/// 3 graph violation, 4 invalid input, 5 I/O.
int cmd_foliate(const RunConfig& config);
int cmd_flow(const RunConfig& config);
int cmd_sweep(const RunConfig& config);
int cmd_stability(const RunConfig& config);
int cmd_check(const RunConfig& config);

} // namespace cmcflow
