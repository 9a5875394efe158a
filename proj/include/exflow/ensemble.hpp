#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exflow/geometry.hpp"
#include "exflow/vec2.hpp"

namespace exflow {

/// Discretized nonnegative vorticity: blob positions, strengths gamma_i >= 0
/// (sum = total mass m), and the regularization length they were built for.
/// In even-symmetric mode particles come in exact (x, -x) pairs with equal
/// strengths: particle i in the first half mirrors particle i + n/2.
struct VortexEnsemble {
    std::vector<Vec2> positions;
    std::vector<double> strengths;
    double blob_delta = 0.0;
    bool even_symmetric = false;

    std::size_t size() const { return positions.size(); }
    std::size_t mirror(std::size_t i) const {
        const std::size_t h = positions.size() / 2;
        return i < h ? i + h : i - h;
    }
    double total_strength() const;
};

enum class PatchProfile { Uniform, CosineBump };

/// A radially symmetric nonnegative vorticity patch: omega_0 restricted to
/// {|x - center| <= radius}, discretized on a grid_n x grid_n cell grid.
struct PatchSpec {
    Vec2 center;
    double radius = 0.0;
    PatchProfile profile = PatchProfile::Uniform;
    double total_mass = 1.0;
    int grid_n = 24;

    bool operator==(const PatchSpec&) const = default;
};

struct SimulationConfig {
    ExteriorMapSpec map;
    std::string map_preset;  // "disk", "ellipse:<c>", or empty for explicit coefficients
    std::vector<PatchSpec> patches;
    double boundary_circulation = 0.0;  // the integral of u_0 along Gamma
    double dt = 0.0;
    double t_end = 0.0;
    int diagnostic_stride = 10;
    double blob_delta = -1.0;  // < 0 requests the default 2x mapped grid spacing
    bool even_symmetric = false;
    std::uint64_t seed = 0;

    bool operator==(const SimulationConfig&) const = default;
};

const char* to_string(PatchProfile p);
PatchProfile patch_profile_from_string(const std::string& s);

}  // namespace exflow
