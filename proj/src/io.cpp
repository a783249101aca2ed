#include "cmcflow/io.hpp"

#include "cmcflow/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace cmcflow {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

void write_array(std::ostream& out, const Field& f, int per_line) {
    for (std::size_t k = 0; k < f.size(); ++k) {
        out << fmt17(f[k]);
        out << (((k + 1) % per_line == 0 || k + 1 == f.size()) ? '\n' : ' ');
    }
}

Field read_array(std::istream& in, std::size_t n, const std::string& path) {
    Field f(n);
    for (std::size_t k = 0; k < n; ++k)
        if (!(in >> f[k])) throw IoError("truncated array in " + path);
    return f;
}

Grid read_grid_header(std::istream& in, const std::string& path) {
    Grid g;
    if (!(in >> g.nx >> g.ny >> g.lx >> g.ly))
        throw IoError("bad grid header in " + path);
    if (g.nx <= 0 || g.ny <= 0 || g.lx <= 0.0 || g.ly <= 0.0)
        throw InvalidDataError("non-positive grid header in " + path);
    return g;
}

} // namespace

std::string fmt17(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_reference_data(const std::string& path, const ReferenceSurfaceData& data) {
    auto out = open_out(path);
    out << data.grid.nx << ' ' << data.grid.ny << ' ' << fmt17(data.grid.lx) << ' '
        << fmt17(data.grid.ly) << '\n';
    write_array(out, data.v, data.grid.nx);
    write_array(out, data.lam1, data.grid.nx);
    write_array(out, data.lam2, data.grid.nx);
    if (!out) throw IoError("write failed: " + path);
}

ReferenceSurfaceData read_reference_data(const std::string& path) {
    auto in = open_in(path);
    ReferenceSurfaceData data;
    data.grid = read_grid_header(in, path);
    const std::size_t n = data.grid.size();
    data.v = read_array(in, n, path);
    data.lam1 = read_array(in, n, path);
    data.lam2 = read_array(in, n, path);
    data.validate();
    return data;
}

void write_snapshot(const std::string& path, const SurfaceSnapshot& snap) {
    auto out = open_out(path);
    out << fmt17(snap.t) << ' ' << fmt17(snap.area) << ' ' << fmt17(snap.volume)
        << ' ' << fmt17(snap.h) << '\n';
    out << snap.grid.nx << ' ' << snap.grid.ny << ' ' << fmt17(snap.grid.lx) << ' '
        << fmt17(snap.grid.ly) << '\n';
    write_array(out, snap.u, snap.grid.nx);
    if (!out) throw IoError("write failed: " + path);
}

SurfaceSnapshot read_snapshot(const std::string& path) {
    auto in = open_in(path);
    SurfaceSnapshot snap;
    if (!(in >> snap.t >> snap.area >> snap.volume >> snap.h))
        throw IoError("bad snapshot header in " + path);
    snap.grid = read_grid_header(in, path);
    snap.u = read_array(in, snap.grid.size(), path);
    return snap;
}

void write_trajectory(const std::string& path, const FlowHistory& history) {
    auto out = open_out(path);
    out << "t,area,volume,h,sup_dev,min_theta,max_a2,sq_dev,u_min,u_max\n";
    for (const FlowRecord& r : history)
        out << fmt17(r.t) << ',' << fmt17(r.area) << ',' << fmt17(r.volume) << ','
            << fmt17(r.h) << ',' << fmt17(r.sup_dev) << ',' << fmt17(r.min_theta)
            << ',' << fmt17(r.max_a2) << ',' << fmt17(r.sq_dev) << ','
            << fmt17(r.u_min) << ',' << fmt17(r.u_max) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

FlowHistory read_trajectory(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty trajectory file: " + path);
    FlowHistory history;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        FlowRecord r;
        char comma;
        if (!(row >> r.t >> comma >> r.area >> comma >> r.volume >> comma >> r.h >>
              comma >> r.sup_dev >> comma >> r.min_theta >> comma >> r.max_a2 >>
              comma >> r.sq_dev >> comma >> r.u_min >> comma >> r.u_max))
            throw IoError("bad trajectory row in " + path + ": " + line);
        history.push_back(r);
    }
    return history;
}

void write_field(const std::string& path, const Grid& grid, const Field& f) {
    auto out = open_out(path);
    out << grid.nx << ' ' << grid.ny << ' ' << fmt17(grid.lx) << ' '
        << fmt17(grid.ly) << '\n';
    write_array(out, f, grid.nx);
    if (!out) throw IoError("write failed: " + path);
}

void write_key_values(const std::string& path,
                      const std::map<std::string, std::string>& kv) {
    auto out = open_out(path);
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
    if (!out) throw IoError("write failed: " + path);
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
    auto in = open_in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError("bad key=value line in " + path + ": " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

} // namespace cmcflow
