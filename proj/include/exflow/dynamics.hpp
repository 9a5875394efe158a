#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "exflow/diagnostics.hpp"
#include "exflow/ensemble.hpp"
#include "exflow/kernels.hpp"

namespace exflow {

/// Quadrature of the initial vorticity: one particle per grid cell center inside
/// each patch, gamma_i = omega_0(center) * cell area, rescaled so every patch
/// carries exactly its total_mass. In even-symmetric mode the patch set must be
/// mirror-paired and particles are laid as exact (x, -x) pairs (first half
/// primaries, second half mirrors). Throws DomainError if a patch disk touches
/// the obstacle.
VortexEnsemble discretize(const ExteriorMapSpec& map, const std::vector<PatchSpec>& patches,
                          double blob_delta, bool even_symmetric);

/// alpha = boundary circulation + total vorticity mass; evaluated once at t = 0
/// and constant thereafter.
double alpha_of(const SimulationConfig& config, const VortexEnsemble& ensemble);

/// One classical RK4 step of dX_i/dt = u(X_i) with each particle skipping its
/// own free-space term. Every stage evaluates velocities against an immutable
/// snapshot of stage positions. Strengths are never modified. In even mode only
/// the first half is advanced and the second half is mirrored, keeping the
/// symmetry exact. Throws BoundaryPenetrationError when a particle reaches
/// |T| < 1.
VortexEnsemble rk4_step(const KernelContext& ctx, const VortexEnsemble& ensemble, double dt,
                        double t_now = 0.0);

struct RunResult {
    std::vector<DiagnosticRecord> records;
    VortexEnsemble final_ensemble;
    std::optional<std::string> abort_message;
    double abort_time = 0.0;

    bool aborted() const { return abort_message.has_value(); }
};

/// Called at every emitted record with the ensemble snapshot it was computed from.
using RunObserver = std::function<void(const DiagnosticRecord&, const VortexEnsemble&)>;

/// Steps the configuration from t = 0 to t_end, emitting a record every
/// diagnostic_stride steps plus the initial and final states. On a step error
/// the records collected so far are returned along with the abort message.
RunResult run(const SimulationConfig& config, const RunObserver& observer = nullptr);

/// Number of RK4 steps run() will take (floor(t_end/dt), robust to rounding).
long long step_count(double t_end, double dt);

/// The default regularization length: twice the mapped-plane grid spacing,
/// maximized over patches.
double default_blob_delta(const ExteriorMapSpec& map, const std::vector<PatchSpec>& patches);

/// Whether the closed patch disk lies strictly in the exterior domain, judged by
/// the center and 256 boundary samples.
bool patch_is_exterior(const ExteriorMapSpec& map, const PatchSpec& patch);

}  // namespace exflow
