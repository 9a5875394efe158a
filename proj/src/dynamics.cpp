#include "exflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "exflow/errors.hpp"

namespace exflow {

namespace {

double profile_value(const PatchSpec& p, Vec2 pos) {
    const double d = (pos - p.center).norm();
    if (d > p.radius) return 0.0;
    switch (p.profile) {
        case PatchProfile::Uniform:
            return 1.0;
        case PatchProfile::CosineBump:
            return 0.5 * (1.0 + std::cos(std::numbers::pi * d / p.radius));
    }
    return 0.0;
}

void require_patch_exterior(const ExteriorMapSpec& map, const PatchSpec& p) {
    if (!(p.radius > 0.0)) throw ValidationError("patch radius must be positive");
    if (!(p.total_mass > 0.0)) throw ValidationError("patch total_mass must be positive");
    if (p.grid_n < 1) throw ValidationError("patch grid_n must be >= 1");
    if (!patch_is_exterior(map, p)) {
        throw DomainError("patch disk centered at (" + std::to_string(p.center.x) + ", " +
                          std::to_string(p.center.y) + ") with radius " +
                          std::to_string(p.radius) + " intersects the obstacle");
    }
}

// Lays one patch and rescales so the strengths sum to total_mass exactly (the
// residual of the scaled sum is folded into the largest strength until it
// vanishes).
void lay_patch(const PatchSpec& p, std::vector<Vec2>& positions, std::vector<double>& strengths) {
    const double cell = 2.0 * p.radius / p.grid_n;
    const Vec2 lo = p.center - Vec2{p.radius, p.radius};
    std::vector<Vec2> pts;
    std::vector<double> g;
    for (int i = 0; i < p.grid_n; ++i) {
        for (int j = 0; j < p.grid_n; ++j) {
            const Vec2 q = lo + Vec2{(i + 0.5) * cell, (j + 0.5) * cell};
            const double w = profile_value(p, q) * cell * cell;
            if (w > 0.0) {
                pts.push_back(q);
                g.push_back(w);
            }
        }
    }
    if (g.empty()) {
        throw ValidationError("patch discretization produced no particles; increase grid_n");
    }
    double sum = 0.0;
    for (double x : g) sum += x;
    const double scale = p.total_mass / sum;
    for (double& x : g) x *= scale;
    const std::size_t imax = static_cast<std::size_t>(
        std::max_element(g.begin(), g.end()) - g.begin());
    for (int pass = 0; pass < 8; ++pass) {
        double cur = 0.0;
        for (double x : g) cur += x;
        const double diff = p.total_mass - cur;
        if (diff == 0.0) break;
        g[imax] += diff;
    }
    positions.insert(positions.end(), pts.begin(), pts.end());
    strengths.insert(strengths.end(), g.begin(), g.end());
}

bool patches_mirror(const PatchSpec& a, const PatchSpec& b) {
    return a.center.x == -b.center.x && a.center.y == -b.center.y && a.radius == b.radius &&
           a.profile == b.profile && a.total_mass == b.total_mass && a.grid_n == b.grid_n;
}

}  // namespace

double VortexEnsemble::total_strength() const {
    double s = 0.0;
    for (double g : strengths) s += g;
    return s;
}

bool patch_is_exterior(const ExteriorMapSpec& map, const PatchSpec& patch) {
    auto exterior = [&](Vec2 q) {
        try {
            return std::abs(forward_map(map, q.to_complex())) > 1.0;
        } catch (const Error&) {
            return false;
        }
    };
    if (!exterior(patch.center)) return false;
    for (int k = 0; k < 256; ++k) {
        const double th = 2.0 * std::numbers::pi * k / 256.0;
        if (!exterior(patch.center +
                      Vec2{patch.radius * std::cos(th), patch.radius * std::sin(th)})) {
            return false;
        }
    }
    return true;
}

VortexEnsemble discretize(const ExteriorMapSpec& map, const std::vector<PatchSpec>& patches,
                          double blob_delta, bool even_symmetric) {
    map.require_valid();
    if (blob_delta < 0.0) throw ValidationError("blob_delta must be nonnegative");
    if (patches.empty()) throw ValidationError("at least one patch is required");
    for (const PatchSpec& p : patches) require_patch_exterior(map, p);

    VortexEnsemble ens;
    ens.blob_delta = blob_delta;
    ens.even_symmetric = even_symmetric;

    if (!even_symmetric) {
        for (const PatchSpec& p : patches) lay_patch(p, ens.positions, ens.strengths);
        return ens;
    }

    if (!map.is_identity()) {
        throw ValidationError("even_symmetric mode requires the disk map");
    }
    // Pair up mirrored patches; lay only one of each pair and mirror explicitly.
    std::vector<bool> used(patches.size(), false);
    std::vector<const PatchSpec*> primaries;
    for (std::size_t i = 0; i < patches.size(); ++i) {
        if (used[i]) continue;
        bool found = false;
        for (std::size_t j = i + 1; j < patches.size(); ++j) {
            if (!used[j] && patches_mirror(patches[i], patches[j])) {
                used[i] = used[j] = true;
                primaries.push_back(&patches[i]);
                found = true;
                break;
            }
        }
        if (!found) {
            throw ValidationError("even_symmetric mode: patch " + std::to_string(i) +
                                  " has no mirror partner under x -> -x");
        }
    }
    for (const PatchSpec* p : primaries) lay_patch(*p, ens.positions, ens.strengths);
    const std::size_t h = ens.positions.size();
    for (std::size_t i = 0; i < h; ++i) {
        ens.positions.push_back(-ens.positions[i]);
        ens.strengths.push_back(ens.strengths[i]);
    }
    return ens;
}

double alpha_of(const SimulationConfig& config, const VortexEnsemble& ensemble) {
    return config.boundary_circulation + ensemble.total_strength();
}

VortexEnsemble rk4_step(const KernelContext& ctx, const VortexEnsemble& ensemble, double dt,
                        double t_now) {
    if (dt == 0.0) throw DomainError("rk4_step: dt must be nonzero");
    const std::size_t n = ensemble.size();
    const bool even = ensemble.even_symmetric && n > 0 && n % 2 == 0;
    const std::size_t n_adv = even ? n / 2 : n;

    // Full stage snapshot from the advanced subset; mirrors are rebuilt by exact
    // negation so the even-pair invariant holds inside every stage.
    auto assemble = [&](const std::vector<Vec2>& adv) {
        std::vector<Vec2> full(n);
        std::copy(adv.begin(), adv.end(), full.begin());
        if (even) {
            for (std::size_t i = 0; i < n_adv; ++i) full[n_adv + i] = -adv[i];
        }
        return full;
    };
    auto eval = [&](const std::vector<Vec2>& adv) {
        return particle_velocities(ctx, assemble(adv), ensemble.strengths, t_now, n_adv);
    };

    std::vector<Vec2> x0(ensemble.positions.begin(), ensemble.positions.begin() + n_adv);
    auto shifted = [&](const std::vector<Vec2>& k, double h) {
        std::vector<Vec2> y(n_adv);
        for (std::size_t i = 0; i < n_adv; ++i) y[i] = x0[i] + h * k[i];
        return y;
    };

    const std::vector<Vec2> k1 = eval(x0);
    const std::vector<Vec2> k2 = eval(shifted(k1, 0.5 * dt));
    const std::vector<Vec2> k3 = eval(shifted(k2, 0.5 * dt));
    const std::vector<Vec2> k4 = eval(shifted(k3, dt));

    std::vector<Vec2> xn(n_adv);
    for (std::size_t i = 0; i < n_adv; ++i) {
        xn[i] = x0[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

    VortexEnsemble out = ensemble;
    out.positions = assemble(xn);
    // Surface boundary penetration now rather than at the next step's first stage.
    map_sources(ctx, out.positions, out.strengths, t_now + dt);
    return out;
}

long long step_count(double t_end, double dt) {
    return static_cast<long long>(std::floor(t_end / dt + 1e-9));
}

double default_blob_delta(const ExteriorMapSpec& map, const std::vector<PatchSpec>& patches) {
    double delta = 0.0;
    for (const PatchSpec& p : patches) {
        const double spacing = 2.0 * p.radius / p.grid_n;
        const double stretch = std::abs(map_derivative(map, p.center.to_complex()));
        delta = std::max(delta, 2.0 * spacing * stretch);
    }
    return delta;
}

RunResult run(const SimulationConfig& config, const RunObserver& observer) {
    SimulationConfig cfg = config;
    cfg.map.require_valid();
    if (!(cfg.dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(cfg.t_end >= 0.0)) throw ValidationError("t_end must be nonnegative");
    if (cfg.diagnostic_stride < 1) throw ValidationError("diagnostic_stride must be >= 1");
    if (cfg.even_symmetric && !cfg.map.is_identity()) {
        throw ValidationError("even_symmetric mode requires the disk map");
    }
    if (cfg.blob_delta < 0.0) cfg.blob_delta = default_blob_delta(cfg.map, cfg.patches);

    VortexEnsemble ensemble = discretize(cfg.map, cfg.patches, cfg.blob_delta,
                                         cfg.even_symmetric);
    const double alpha = alpha_of(cfg, ensemble);
    const KernelContext ctx{cfg.map, alpha, cfg.blob_delta};

    RunResult out;
    auto emit = [&](double t, const VortexEnsemble& e) {
        const DiagnosticRecord rec = compute_record(ctx, e, t);
        out.records.push_back(rec);
        if (observer) observer(rec, e);
    };

    emit(0.0, ensemble);
    const long long n_steps = step_count(cfg.t_end, cfg.dt);
    for (long long s = 1; s <= n_steps; ++s) {
        try {
            ensemble = rk4_step(ctx, ensemble, cfg.dt, (s - 1) * cfg.dt);
        } catch (const Error& err) {
            out.abort_message = err.what();
            out.abort_time = (s - 1) * cfg.dt;
            out.final_ensemble = ensemble;
            return out;
        }
        if (s % cfg.diagnostic_stride == 0 || s == n_steps) emit(s * cfg.dt, ensemble);
    }
    out.final_ensemble = ensemble;
    return out;
}

}  // namespace exflow
