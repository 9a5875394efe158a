#include "exflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "exflow/ensemble.hpp"
#include "exflow/errors.hpp"

namespace exflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

double green(const KernelContext& ctx, Vec2 x, Vec2 y) {
    const Complex wx = forward_map(ctx.map, x.to_complex());
    const Complex wy = forward_map(ctx.map, y.to_complex());
    const double d2 = std::norm(wx - wy);
    if (d2 == 0.0) {
        throw SingularityError("green: coincident points");
    }
    const Complex wys = wy / std::norm(wy);
    const double ds2 = std::norm(wx - wys);
    return 0.25 / std::numbers::pi * std::log(d2 / (ds2 * std::norm(wy)));
}

Vec2 harmonic_field(const KernelContext& ctx, Vec2 x) {
    const Complex w = forward_map(ctx.map, x.to_complex());
    const Complex tp = ctx.map.is_identity() ? Complex{1.0, 0.0}
                                             : Complex{1.0, 0.0} / inverse_map_derivative(ctx.map, w);
    const Complex h = std::conj(tp) * Complex{0.0, 1.0} * w / (kTwoPi * std::norm(w));
    return Vec2(h);
}

Vec2 bs_kernel(const KernelContext& ctx, Vec2 x, Vec2 y) {
    const Complex wx = forward_map(ctx.map, x.to_complex());
    const Complex wy = forward_map(ctx.map, y.to_complex());
    const Complex tp = ctx.map.is_identity() ? Complex{1.0, 0.0}
                                             : Complex{1.0, 0.0} / inverse_map_derivative(ctx.map, wx);
    const double d2 = std::norm(wx - wy) + ctx.blob_delta * ctx.blob_delta;
    if (d2 == 0.0) {
        throw SingularityError("bs_kernel: coincident points with delta = 0");
    }
    const Complex wys = wy / std::norm(wy);
    const double ds2 = std::norm(wx - wys) + ctx.blob_delta * ctx.blob_delta;
    const Complex bracket = (wx - wy) / d2 - (wx - wys) / ds2;
    return Vec2(std::conj(tp) * Complex{0.0, 1.0} * bracket / kTwoPi);
}

MappedSources map_sources(const KernelContext& ctx, const std::vector<Vec2>& positions,
                          const std::vector<double>& strengths, double t_for_errors) {
    const std::size_t n = positions.size();
    MappedSources src;
    src.wx.resize(n);
    src.wy.resize(n);
    src.wsx.resize(n);
    src.wsy.resize(n);
    src.wabs.resize(n);
    src.gamma = strengths;

    std::vector<unsigned char> bad(n, 0);
#pragma omp parallel for schedule(static) if (n > 64)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            const Complex w = forward_map(ctx.map, positions[i].to_complex());
            const double a2 = std::norm(w);
            src.wx[i] = w.real();
            src.wy[i] = w.imag();
            src.wsx[i] = w.real() / a2;
            src.wsy[i] = w.imag() / a2;
            src.wabs[i] = std::sqrt(a2);
        } catch (const Error&) {
            bad[i] = 1;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (bad[i]) {
            throw BoundaryPenetrationError(
                i, t_for_errors,
                "particle " + std::to_string(i) + " crossed the obstacle boundary at t = " +
                    std::to_string(t_for_errors) + "; reduce dt");
        }
        if (src.wabs[i] < 1.0) {
            throw BoundaryPenetrationError(
                i, t_for_errors,
                "particle " + std::to_string(i) + " penetrated to |T| = " +
                    std::to_string(src.wabs[i]) + " at t = " + std::to_string(t_for_errors) +
                    "; reduce dt");
        }
    }
    return src;
}

Vec2 velocity_mapped(const KernelContext& ctx, const MappedSources& src, Complex w_target,
                     Complex tprime_target, std::optional<std::size_t> skip) {
    const double tx = w_target.real();
    const double ty = w_target.imag();
    const double d2reg = ctx.blob_delta * ctx.blob_delta;
    const std::size_t n = src.size();
    const std::size_t skip_idx = skip.value_or(n);

    // Accumulate the mapped-plane bracket sum_j gamma_j * i*[(w-w_j)/d^2 - (w-w_j*)/d*^2];
    // fixed source order keeps the reduction deterministic.
    double ax = 0.0;
    double ay = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double g = src.gamma[j];
        if (j != skip_idx) {
            const double dx = tx - src.wx[j];
            const double dy = ty - src.wy[j];
            const double f = g / (dx * dx + dy * dy + d2reg);
            ax -= dy * f;
            ay += dx * f;
        }
        const double dsx = tx - src.wsx[j];
        const double dsy = ty - src.wsy[j];
        const double fs = g / (dsx * dsx + dsy * dsy + d2reg);
        ax += dsy * fs;
        ay -= dsx * fs;
    }

    Complex u = std::conj(tprime_target) * Complex{ax, ay} / kTwoPi;
    if (ctx.alpha != 0.0) {
        u += ctx.alpha * std::conj(tprime_target) * Complex{0.0, 1.0} * w_target /
             (kTwoPi * std::norm(w_target));
    }
    return Vec2(u);
}

Vec2 velocity(const KernelContext& ctx, const VortexEnsemble& ensemble, Vec2 x,
              std::optional<std::size_t> skip) {
    const MappedSources src = map_sources(ctx, ensemble.positions, ensemble.strengths);
    const Complex w = forward_map(ctx.map, x.to_complex());
    const Complex tp = ctx.map.is_identity() ? Complex{1.0, 0.0}
                                             : Complex{1.0, 0.0} / inverse_map_derivative(ctx.map, w);
    return velocity_mapped(ctx, src, w, tp, skip);
}

double stream_at(const KernelContext& ctx, const VortexEnsemble& ensemble, Vec2 x) {
    const Complex w = forward_map(ctx.map, x.to_complex());
    const double d2reg = ctx.blob_delta * ctx.blob_delta;
    double psi = 0.0;
    for (std::size_t j = 0; j < ensemble.positions.size(); ++j) {
        const Complex wj = forward_map(ctx.map, ensemble.positions[j].to_complex());
        const double d2 = std::norm(w - wj) + d2reg;
        if (d2 == 0.0) {
            throw SingularityError("stream_at: evaluation at a particle with delta = 0");
        }
        const Complex wjs = wj / std::norm(wj);
        const double ds2 = std::norm(w - wjs) + d2reg;
        psi += ensemble.strengths[j] * 0.25 / std::numbers::pi *
               std::log(d2 / (ds2 * std::norm(wj)));
    }
    return psi;
}

std::vector<Vec2> particle_velocities(const KernelContext& ctx, const std::vector<Vec2>& positions,
                                      const std::vector<double>& strengths, double t_for_errors,
                                      std::size_t n_targets) {
    const MappedSources src = map_sources(ctx, positions, strengths, t_for_errors);
    const std::size_t n = std::min(n_targets, positions.size());
    std::vector<Vec2> out(n);
    const bool identity = ctx.map.is_identity();

    std::vector<unsigned char> bad(n, 0);
#pragma omp parallel for schedule(static) if (n > 64)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        const Complex w{src.wx[i], src.wy[i]};
        Complex tp{1.0, 0.0};
        if (!identity) {
            try {
                tp = Complex{1.0, 0.0} / inverse_map_derivative(ctx.map, w);
            } catch (const Error&) {
                bad[i] = 1;
                continue;
            }
        }
        out[i] = velocity_mapped(ctx, src, w, tp, i);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (bad[i]) {
            throw BoundaryPenetrationError(i, t_for_errors,
                                           "particle " + std::to_string(i) +
                                               " reached the obstacle boundary at t = " +
                                               std::to_string(t_for_errors) + "; reduce dt");
        }
    }
    return out;
}

}  // namespace exflow
