#include "cmcflow/grid.hpp"

#include <algorithm>
#include <cmath>

namespace cmcflow {

double integrate(const Grid& g, const Field& f) {
    double s = 0.0;
    for (double v : f) s += v;
    return s * g.cell_area();
}

Field d_dx1(const Grid& g, const Field& f) {
    Field out(g.size());
    const double inv = 1.0 / (2.0 * g.dx());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out[g.at(i, j)] = (f[g.at(i + 1, j)] - f[g.at(i - 1, j)]) * inv;
    return out;
}

Field d_dx2(const Grid& g, const Field& f) {
    Field out(g.size());
    const double inv = 1.0 / (2.0 * g.dy());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out[g.at(i, j)] = (f[g.at(i, j + 1)] - f[g.at(i, j - 1)]) * inv;
    return out;
}

Field d2_dx1x1(const Grid& g, const Field& f) {
    Field out(g.size());
    const double inv = 1.0 / (g.dx() * g.dx());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out[g.at(i, j)] =
                (f[g.at(i + 1, j)] - 2.0 * f[g.at(i, j)] + f[g.at(i - 1, j)]) * inv;
    return out;
}

Field d2_dx2x2(const Grid& g, const Field& f) {
    Field out(g.size());
    const double inv = 1.0 / (g.dy() * g.dy());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out[g.at(i, j)] =
                (f[g.at(i, j + 1)] - 2.0 * f[g.at(i, j)] + f[g.at(i, j - 1)]) * inv;
    return out;
}

Field d2_dx1x2(const Grid& g, const Field& f) {
    Field out(g.size());
    const double inv = 1.0 / (4.0 * g.dx() * g.dy());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out[g.at(i, j)] = (f[g.at(i + 1, j + 1)] - f[g.at(i - 1, j + 1)] -
                               f[g.at(i + 1, j - 1)] + f[g.at(i - 1, j - 1)]) *
                              inv;
    return out;
}

double field_max(const Field& f) { return *std::max_element(f.begin(), f.end()); }
double field_min(const Field& f) { return *std::min_element(f.begin(), f.end()); }

double field_max_abs(const Field& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

bool field_finite(const Field& f) {
    for (double v : f)
        if (!std::isfinite(v)) return false;
    return true;
}

Field shift_field(const Grid& g, const Field& f, int si, int sj) {
    Field out(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out[g.at(i + si, j + sj)] = f[g.at(i, j)];
    return out;
}

} // namespace cmcflow
