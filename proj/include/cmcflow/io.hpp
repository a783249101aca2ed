#pragma once

#include "cmcflow/flow.hpp"
#include "cmcflow/reference_data.hpp"

#include <map>
#include <string>

namespace cmcflow {

/// 17 significant digits, round-trip safe for doubles.
std::string fmt17(double x);

/// Plain-text array format: "nx ny lx ly" header line, then the v, lam1, lam2
/// arrays row-major, whitespace-separated.
void write_reference_data(const std::string& path, const ReferenceSurfaceData& data);
ReferenceSurfaceData read_reference_data(const std::string& path);

/// Surface snapshot: scalar header (t, area, volume, h), then the grid header
/// and the u array in the same layout as the reference-data format.
struct SurfaceSnapshot {
    double t = 0.0;
    double area = 0.0;
    double volume = 0.0;
    double h = 0.0;
    Grid grid;
    Field u;
};

void write_snapshot(const std::string& path, const SurfaceSnapshot& snap);
SurfaceSnapshot read_snapshot(const std::string& path);

/// Trajectory CSV, one record per line. Columns past max_a2 carry the
/// dissipation integrand and the height extremes used by the offline checks.
void write_trajectory(const std::string& path, const FlowHistory& history);
FlowHistory read_trajectory(const std::string& path);

/// Scalar field in the grid-header array format (eigenfunctions etc).
void write_field(const std::string& path, const Grid& grid, const Field& f);

/// key=value config echo, one entry per line, keys sorted.
void write_key_values(const std::string& path,
                      const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_key_values(const std::string& path);

} // namespace cmcflow
