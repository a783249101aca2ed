#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace cmcflow {

using Field = std::vector<double>;

/// Periodic rectangular grid (flat torus): nx*ny points, spacing lx/nx, ly/ny.
/// Row-major storage, index = j*nx + i with i the x1 index.
struct Grid {
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    double dx() const { return lx / nx; }
    double dy() const { return ly / ny; }
    double cell_area() const { return dx() * dy(); }

    int wrap_x(int i) const { return ((i % nx) + nx) % nx; }
    int wrap_y(int j) const { return ((j % ny) + ny) % ny; }
    std::size_t at(int i, int j) const {
        return static_cast<std::size_t>(wrap_y(j)) * nx + wrap_x(i);
    }

    double x1(int i) const { return i * dx(); }
    double x2(int j) const { return j * dy(); }

    bool operator==(const Grid&) const = default;
};

/// Trapezoid rule on the periodic domain (= plain sum times cell area,
/// spectrally accurate for smooth periodic integrands).
double integrate(const Grid& g, const Field& f);

/// Second-order periodic central differences.
Field d_dx1(const Grid& g, const Field& f);
Field d_dx2(const Grid& g, const Field& f);
Field d2_dx1x1(const Grid& g, const Field& f);
Field d2_dx2x2(const Grid& g, const Field& f);
Field d2_dx1x2(const Grid& g, const Field& f);

double field_max(const Field& f);
double field_min(const Field& f);
double field_max_abs(const Field& f);
bool field_finite(const Field& f);

/// Translate a field by whole grid cells (periodic).
Field shift_field(const Grid& g, const Field& f, int si, int sj);

} // namespace cmcflow
