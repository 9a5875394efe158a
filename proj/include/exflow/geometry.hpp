#pragma once

#include <cstdint>
#include <vector>

#include "exflow/errors.hpp"
#include "exflow/vec2.hpp"

namespace exflow {

/// Exterior conformal map T : Omega^c -> {|w| > 1}, T(z) = beta*z + h(z),
/// represented through its closed-form inverse
///
///   S(w) = w/beta + sum_{k=0}^{K} c_k w^{-k},   |w| >= 1,
///
/// so the obstacle boundary Gamma is the image of the unit circle under S.
/// Forward evaluation inverts S by Newton iteration.
struct ExteriorMapSpec {
    double beta = 1.0;
    std::vector<Complex> inverse_coeffs;  // c_0 .. c_K
    double newton_tol = 1e-12;
    int newton_max_iter = 50;

    /// True for the identity map (exterior of the unit disk).
    bool is_identity() const;

    /// Throws ValidationError unless beta > 0, newton_tol > 0, newton_max_iter >= 1.
    /// The leading coefficient is required real positive; maps with rotated leading
    /// behavior must be pre-rotated by the caller, never normalized silently.
    void require_valid() const;

    bool operator==(const ExteriorMapSpec&) const = default;
};

/// Preset builders used by configs: "disk" and "ellipse:c" (S(w) = w + c/w with 0 < c < 1).
ExteriorMapSpec disk_map();
ExteriorMapSpec ellipse_map(double c);

/// Sampled suprema of the map decay bounds, over the declared grid only.
struct MapValidationReport {
    double max_h_prime_times_z2 = 0.0;   // sup |h'(z)| |z|^2
    double max_h_second_times_z3 = 0.0;  // sup |h''(z)| |z|^3
    double max_DT_norm = 0.0;            // sup |T'(z)|
    double max_DTinv_norm = 0.0;         // sup |S'(w)|
    bool injectivity_ok = false;
};

/// S(w) by direct Laurent evaluation. Rejects |w| < 1 - 1e-12 with DomainError.
Complex inverse_map(const ExteriorMapSpec& spec, Complex w);

/// S'(w) and S''(w); same domain restriction as inverse_map.
Complex inverse_map_derivative(const ExteriorMapSpec& spec, Complex w);
Complex inverse_map_second_derivative(const ExteriorMapSpec& spec, Complex w);

/// T(z) by Newton iteration on S(w) = z, seeded at w0 = beta*z with 16 circle restarts
/// on non-convergence. Guarantees |S(w) - z| <= newton_tol and |w| >= 1 - 10*newton_tol.
/// Throws DomainError for z strictly inside the obstacle, MapInversionError otherwise
/// on failure.
Complex forward_map(const ExteriorMapSpec& spec, Complex z);

/// T'(z) = 1 / S'(T(z)); never zero.
Complex map_derivative(const ExteriorMapSpec& spec, Complex z);

/// Real Jacobian of T at z in the row-vector convention (v -> v*DT): with
/// T'(z) = a + bi this is [[a, b], [-b, a]], so v*DT is complex multiplication
/// by T'(z) and v*DT^t is multiplication by conj(T'(z)). DT*DT^t = |T'|^2 Id.
Mat2 jacobian(const ExteriorMapSpec& spec, Complex z);

/// Sweeps a log-radial grid over {1 <= |w| <= r_max} and reports the sampled
/// suprema of the decay bounds plus a pairwise image-collision injectivity check.
/// Pre: r_max > 1, n_samples >= 100.
MapValidationReport validate_map(const ExteriorMapSpec& spec, double r_max, int n_samples);

/// The grid used by validate_map; exposed so tests can reuse the exact sample set.
std::vector<Complex> validation_grid(double r_max, int n_samples);

}  // namespace exflow
