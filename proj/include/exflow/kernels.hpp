#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "exflow/geometry.hpp"
#include "exflow/vec2.hpp"

namespace exflow {

struct VortexEnsemble;

/// Everything needed to evaluate fields from a vortex ensemble: the domain map,
/// the circulation constant alpha of u = grad^perp psi + alpha*H, and the blob
/// regularization length delta measured in the mapped plane.
struct KernelContext {
    ExteriorMapSpec map;
    double alpha = 0.0;
    double blob_delta = 0.0;
};

/// Exterior Green's function
///   G(x,y) = (1/2pi) log( |T(x)-T(y)| / (|T(x)-T(y)*| |T(y)|) ),  y* = y/|y|^2.
/// Symmetric, <= 0, vanishing when either argument lies on Gamma.
double green(const KernelContext& ctx, Vec2 x, Vec2 y);

/// Harmonic vector field H(x) = (1/2pi) grad^perp log|T(x)|, evaluated as the
/// row-vector product (T(x))^perp DT^t(x) / (2pi |T(x)|^2): complex form
/// conj(T'(x)) * i * T(x) / (2pi |T(x)|^2). Unit counterclockwise circulation.
Vec2 harmonic_field(const KernelContext& ctx, Vec2 x);

/// Mapped Biot-Savart kernel (the DT^t form; both mapped distances regularized):
///   K(x,y) = [ (T(x)-T(y))^perp / (d^2+delta^2)
///            - (T(x)-T(y)*)^perp / (d*^2+delta^2) ] DT^t(x) / 2pi.
/// Reduces to the classical disk kernel when the map is the identity and delta = 0.
Vec2 bs_kernel(const KernelContext& ctx, Vec2 x, Vec2 y);

/// Full velocity u(x) = sum_j gamma_j K(x, x_j) + alpha H(x). When skip is set,
/// the free-space part of that source is omitted but its image part is kept: a
/// particle is advected by its own image and the harmonic field.
Vec2 velocity(const KernelContext& ctx, const VortexEnsemble& ensemble, Vec2 x,
              std::optional<std::size_t> skip = std::nullopt);

/// Stream function sum_j gamma_j G_delta(x, x_j), with both mapped distances
/// regularized by delta as in bs_kernel.
double stream_at(const KernelContext& ctx, const VortexEnsemble& ensemble, Vec2 x);

/// Precomputed mapped source data: T(x_j), its inversion T(x_j)*, |T(x_j)|, gamma_j.
/// Shared by the O(N^2) evaluators so the map is inverted once per source.
struct MappedSources {
    std::vector<double> wx, wy;    // T(x_j)
    std::vector<double> wsx, wsy;  // T(x_j)* = T(x_j)/|T(x_j)|^2
    std::vector<double> wabs;      // |T(x_j)|
    std::vector<double> gamma;

    std::size_t size() const { return gamma.size(); }
};

/// Maps every particle (parallel, deterministic). Throws BoundaryPenetrationError
/// naming the lowest offending particle if any position maps inside the disk.
MappedSources map_sources(const KernelContext& ctx, const std::vector<Vec2>& positions,
                          const std::vector<double>& strengths, double t_for_errors = 0.0);

/// Velocity at a target whose mapped position and map derivative are already known.
Vec2 velocity_mapped(const KernelContext& ctx, const MappedSources& src, Complex w_target,
                     Complex tprime_target, std::optional<std::size_t> skip);

/// Velocities at the first n_targets particle locations (default: all), with all
/// particles acting as sources and each target skipping its own free-space term.
/// Parallel across targets; per-target source sums run in fixed index order, so
/// results are bit-reproducible across runs and thread counts.
std::vector<Vec2> particle_velocities(const KernelContext& ctx, const std::vector<Vec2>& positions,
                                      const std::vector<double>& strengths,
                                      double t_for_errors = 0.0,
                                      std::size_t n_targets = static_cast<std::size_t>(-1));

}  // namespace exflow
