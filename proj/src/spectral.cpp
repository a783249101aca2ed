#include "cmcflow/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace cmcflow {

namespace {
// The FFTW planner is not thread-safe; plan execution is.
std::mutex planner_mutex;
} // namespace

SpectralDerivative::SpectralDerivative(const Grid& grid) : grid_(grid) {
    buf_.resize(grid_.size());
    auto* data = reinterpret_cast<fftw_complex*>(buf_.data());
    std::lock_guard<std::mutex> lock(planner_mutex);
    // Row-major (ny, nx) layout matches Grid::at.
    plan_fwd_ = fftw_plan_dft_2d(grid_.ny, grid_.nx, data, data, FFTW_FORWARD,
                                 FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_2d(grid_.ny, grid_.nx, data, data, FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
}

SpectralDerivative::~SpectralDerivative() {
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

Field SpectralDerivative::derivative(const Field& f, bool along_x1) const {
    const std::size_t n = grid_.size();
    for (std::size_t k = 0; k < n; ++k) buf_[k] = f[k];
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));

    const double tp = 2.0 * std::numbers::pi;
    const double kx_unit = tp / grid_.lx;
    const double ky_unit = tp / grid_.ly;
    for (int j = 0; j < grid_.ny; ++j) {
        const int mj = j <= grid_.ny / 2 ? j : j - grid_.ny;
        for (int i = 0; i < grid_.nx; ++i) {
            const int mi = i <= grid_.nx / 2 ? i : i - grid_.nx;
            double wave;
            if (along_x1) {
                // Zero out the unmatched Nyquist mode of an even grid.
                wave = (grid_.nx % 2 == 0 && mi == grid_.nx / 2) ? 0.0 : mi * kx_unit;
            } else {
                wave = (grid_.ny % 2 == 0 && mj == grid_.ny / 2) ? 0.0 : mj * ky_unit;
            }
            buf_[static_cast<std::size_t>(j) * grid_.nx + i] *=
                std::complex<double>(0.0, wave);
        }
    }
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    Field out(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = buf_[k].real() * scale;
    return out;
}

Field SpectralDerivative::d_dx1(const Field& f) const { return derivative(f, true); }
Field SpectralDerivative::d_dx2(const Field& f) const { return derivative(f, false); }

Field SpectralDerivative::drop_nyquist(const Field& f) const {
    const std::size_t n = grid_.size();
    for (std::size_t k = 0; k < n; ++k) buf_[k] = f[k];
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    for (int j = 0; j < grid_.ny; ++j)
        for (int i = 0; i < grid_.nx; ++i) {
            const bool nyq = (grid_.nx % 2 == 0 && i == grid_.nx / 2) ||
                             (grid_.ny % 2 == 0 && j == grid_.ny / 2);
            if (nyq) buf_[static_cast<std::size_t>(j) * grid_.nx + i] = 0.0;
        }
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    Field out(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = buf_[k].real() * scale;
    return out;
}

} // namespace cmcflow
