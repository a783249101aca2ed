#pragma once

#include "cmcflow/grid.hpp"

#include <complex>
#include <vector>

namespace cmcflow {

/// Fourier spectral partial derivatives on the periodic grid (FFTW backed).
/// Plans are cached per instance; apply methods are not thread-safe across
/// one instance, use one instance per thread.
class SpectralDerivative {
  public:
    explicit SpectralDerivative(const Grid& grid);
    ~SpectralDerivative();
    SpectralDerivative(const SpectralDerivative&) = delete;
    SpectralDerivative& operator=(const SpectralDerivative&) = delete;

    Field d_dx1(const Field& f) const;
    Field d_dx2(const Field& f) const;

    /// Zeroes the unmatched Nyquist modes of an even grid. The first
    /// derivative annihilates them, so second-order div-form operators built
    /// from it acquire a spurious kernel unless they are filtered out.
    Field drop_nyquist(const Field& f) const;

  private:
    Field derivative(const Field& f, bool along_x1) const;

    Grid grid_;
    void* plan_fwd_ = nullptr; // fftw_plan
    void* plan_bwd_ = nullptr;
    mutable std::vector<std::complex<double>> buf_;
};

} // namespace cmcflow
