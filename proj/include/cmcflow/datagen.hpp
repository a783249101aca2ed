#pragma once

#include "cmcflow/foliation.hpp"
#include "cmcflow/reference_data.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cmcflow {

enum class GeneratorKind { Fuchsian, ConstantLambda, FourierBump };

/// Recipe for a synthetic reference surface. FourierBump draws band-limited
/// random Fourier modes whose phases come from splitmix64(seed), so outputs
/// are bit-identical across platforms for a fixed spec.
struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::Fuchsian;
    double amp1 = 0.0;        // peak |lam1| (ConstantLambda: the constant itself)
    double amp2 = 0.0;        // peak |lam2|
    double v_amp = 0.0;       // conformal-factor amplitude
    int max_wavenumber = 3;   // capped at min(nx,ny)/8 so differencing resolves it
    bool zero_mean_trace = false;
    std::uint64_t seed = 0;

    static GeneratorKind kind_from_name(const std::string& name);
    static std::string kind_name(GeneratorKind k);
};

/// Deterministic counter-based generator (splitmix64). Documented so derived
/// expected values reproduce bit-exactly.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next();
    double uniform();                    // in [0,1)
    double uniform(double lo, double hi);
};

ReferenceSurfaceData generate(const GeneratorSpec& spec, int nx, int ny, double lx,
                              double ly);

/// Principal curvatures of S(r) at one grid point via the 2x2 generalized
/// eigenproblem det(A(x,r) - mu g(x,r)) = 0, solved with the stable quadratic
/// formula. Independent of the tanh closed form. Returns (mu_min, mu_max)
/// sorted ascending.
std::pair<double, double> eigen_oracle(const ReferenceSurfaceData& data,
                                       std::size_t point_index, double r);

/// Same oracle from raw tensors, for property tests on synthetic points.
std::pair<double, double> generalized_eigenvalues(const Sym2& metric, const Sym2& form);

struct ConvergenceOrder {
    bool determinate = false;
    double order = 0.0;
    std::vector<double> errors;
};

/// Richardson-style order log2(|e0-e1| / |e1-e2|) from values on >= 3 nested
/// grids. Indeterminate when successive differences are non-monotone or at
/// rounding level.
ConvergenceOrder refinement_order(const std::vector<double>& values);

/// Same estimate from direct error magnitudes against a known reference.
ConvergenceOrder refinement_order_from_errors(const std::vector<double>& errors);

} // namespace cmcflow
