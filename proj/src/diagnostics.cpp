#include "exflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "exflow/errors.hpp"

namespace exflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Logistic eta(s) = e^s/(1+e^s), evaluated without overflow.
double eta(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

struct MappedDiag {
    std::vector<double> wx, wy, wabs, logw;
};

MappedDiag map_for_diagnostics(const KernelContext& ctx, const VortexEnsemble& ensemble) {
    const std::size_t n = ensemble.size();
    MappedDiag m;
    m.wx.resize(n);
    m.wy.resize(n);
    m.wabs.resize(n);
    m.logw.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex w = forward_map(ctx.map, ensemble.positions[i].to_complex());
        m.wx[i] = w.real();
        m.wy[i] = w.imag();
        m.wabs[i] = std::abs(w);
        m.logw[i] = std::log(m.wabs[i]);
    }
    return m;
}

double energy_from_mapped(const KernelContext& ctx, const VortexEnsemble& ensemble,
                          const MappedDiag& m) {
    const std::size_t n = ensemble.size();
    const double d2reg = ctx.blob_delta * ctx.blob_delta;

    // Per-row partials with a sequential final reduction keep the O(N^2) sum
    // deterministic under OpenMP.
    std::vector<double> row(n, 0.0);
    std::vector<unsigned char> singular(n, 0);
#pragma omp parallel for schedule(static) if (n > 64)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        const double gi = ensemble.strengths[i];
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double gj = ensemble.strengths[j];
            const double dsx = m.wx[i] - m.wx[j] / (m.wabs[j] * m.wabs[j]);
            const double dsy = m.wy[i] - m.wy[j] / (m.wabs[j] * m.wabs[j]);
            // Image part: +(1/4pi) g_i g_j log(|w_i - w_j*|^2 |w_j|^2), all pairs.
            acc += gi * gj * 0.5 * std::log((dsx * dsx + dsy * dsy) * m.wabs[j] * m.wabs[j]);
            if (j == static_cast<std::size_t>(i)) continue;
            const double dx = m.wx[i] - m.wx[j];
            const double dy = m.wy[i] - m.wy[j];
            const double d2 = dx * dx + dy * dy + d2reg;
            if (d2 == 0.0) {
                singular[i] = 1;
                continue;
            }
            // Free-space part: -(1/4pi) g_i g_j log(d^2 + delta^2), i != j.
            acc -= gi * gj * 0.5 * std::log(d2);
        }
        row[i] = acc;
    }
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (singular[i]) {
            throw SingularityError("generalized_energy: coincident particles with delta = 0");
        }
        e += row[i];
    }
    e /= kTwoPi;

    double alpha_term = 0.0;
    for (std::size_t i = 0; i < n; ++i) alpha_term += ensemble.strengths[i] * m.logw[i];
    e -= ctx.alpha / std::numbers::pi * alpha_term;
    return e;
}

}  // namespace

double generalized_energy(const KernelContext& ctx, const VortexEnsemble& ensemble) {
    const MappedDiag m = map_for_diagnostics(ctx, ensemble);
    return energy_from_mapped(ctx, ensemble, m);
}

double log_moment(const KernelContext& ctx, const VortexEnsemble& ensemble) {
    const MappedDiag m = map_for_diagnostics(ctx, ensemble);
    double s = 0.0;
    for (std::size_t i = 0; i < ensemble.size(); ++i) s += ensemble.strengths[i] * m.logw[i];
    return s / kTwoPi;
}

std::pair<double, double> weighted_moments(const KernelContext& ctx,
                                           const VortexEnsemble& ensemble) {
    const MappedDiag m = map_for_diagnostics(ctx, ensemble);
    double j1 = 0.0;
    double j2 = 0.0;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        const double w2 = m.wabs[i] * m.wabs[i];
        j1 += ensemble.strengths[i] * w2 * m.logw[i];
        j2 += ensemble.strengths[i] * w2 * m.logw[i] * m.logw[i];
    }
    return {j1, j2};
}

std::pair<double, Vec2> physical_moments(const VortexEnsemble& ensemble) {
    const std::size_t n = ensemble.size();
    double inertia = 0.0;
    Vec2 num{0.0, 0.0};
    double mass = 0.0;
    if (ensemble.even_symmetric && n % 2 == 0) {
        // Mirror-pair order: gamma*x + gamma*(-x) cancels exactly in IEEE
        // arithmetic, pinning the center at the origin.
        const std::size_t h = n / 2;
        for (std::size_t i = 0; i < h; ++i) {
            const std::size_t j = i + h;
            inertia += ensemble.strengths[i] * ensemble.positions[i].norm2();
            inertia += ensemble.strengths[j] * ensemble.positions[j].norm2();
            num += ensemble.strengths[i] * ensemble.positions[i];
            num += ensemble.strengths[j] * ensemble.positions[j];
            mass += ensemble.strengths[i] + ensemble.strengths[j];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            inertia += ensemble.strengths[i] * ensemble.positions[i].norm2();
            num += ensemble.strengths[i] * ensemble.positions[i];
            mass += ensemble.strengths[i];
        }
    }
    if (mass == 0.0) {
        throw DomainError("physical_moments: center of vorticity undefined for zero mass");
    }
    return {inertia, num * (1.0 / mass)};
}

double smoothed_tail_mass(const KernelContext& ctx, const VortexEnsemble& ensemble, double r,
                          double lambda) {
    if (!(r > 1.0)) throw DomainError("smoothed_tail_mass: r must exceed 1");
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw DomainError("smoothed_tail_mass: lambda must lie in (0, 1]");
    }
    const MappedDiag m = map_for_diagnostics(ctx, ensemble);
    double f = 0.0;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        const double w2 = m.wabs[i] * m.wabs[i];
        f += ensemble.strengths[i] * eta((w2 - r * r) / (lambda * r * r));
    }
    return f;
}

int theta_selector(double alpha, double m) {
    if (!(m > 0.0)) throw DomainError("theta_selector: total mass must be positive");
    return (alpha <= 0.0 || alpha > m) ? 2 : 1;
}

double min_log_pair_moment(const KernelContext& ctx, const VortexEnsemble& ensemble) {
    const MappedDiag m = map_for_diagnostics(ctx, ensemble);
    const std::size_t n = ensemble.size();
    // Sort radii ascending; pairs (i,j) take log of the smaller-rank radius, so
    //   sum_{i,j} = sum_k log R_k (g_k^2 + 2 g_k * suffix_strength_{k+1}).
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&m](std::size_t a, std::size_t b) { return m.wabs[a] < m.wabs[b]; });
    double suffix = 0.0;
    for (std::size_t i = 0; i < n; ++i) suffix += ensemble.strengths[i];
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order[k];
        const double g = ensemble.strengths[i];
        suffix -= g;
        total += m.logw[i] * (g * g + 2.0 * g * suffix);
    }
    return total;
}

GrowthFit fit_growth_exponent(const std::vector<std::pair<double, double>>& series, double t_lo,
                              double t_hi) {
    if (!(t_lo < t_hi)) throw FitError("fit window must have t_lo < t_hi");
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [t, r] : series) {
        if (t < t_lo || t > t_hi) continue;
        if (!(t > 0.0)) throw FitError("fit sample with t <= 0 inside the window");
        if (!(r > 0.0)) throw FitError("fit sample with r <= 0 inside the window");
        xs.push_back(std::log1p(t));
        ys.push_back(std::log(r));
    }
    if (xs.size() < 10) {
        throw FitError("fit window contains " + std::to_string(xs.size()) +
                       " samples; at least 10 required");
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw FitError("degenerate fit window: all times equal");

    GrowthFit fit;
    fit.exponent = sxy / sxx;
    const double intercept = my - fit.exponent * mx;
    fit.prefactor = std::exp(intercept);
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double res = ys[i] - (intercept + fit.exponent * xs[i]);
        ss += res * res;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

LoopsReport check_loops_inequalities(const ExteriorMapSpec& map, int n_random,
                                     std::uint64_t seed) {
    if (n_random < 1) throw DomainError("check_loops_inequalities: n_random must be >= 1");
    map.require_valid();

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double log_rmax = std::log(8.0);

    auto sample_w = [&]() {
        const double r = std::exp(unit(rng) * log_rmax);
        const double th = unit(rng) * kTwoPi;
        return Complex{r * std::cos(th), r * std::sin(th)};
    };

    LoopsReport rep;
    rep.n_pairs = static_cast<std::size_t>(n_random);
    rep.loops1_max_slack = -1e300;
    for (int k = 0; k < n_random; ++k) {
        const Complex w1 = sample_w();
        const Complex w2 = sample_w();
        const Vec2 t1(w1), t2(w2);
        const double lhs = std::abs(dot(t1, t2.perp()));
        const double sep = std::abs(w1 - w2);
        const double rhs = std::min(std::abs(w1), std::abs(w2)) * sep;
        rep.loops1_max_slack = std::max(rep.loops1_max_slack, lhs - rhs);
        if (lhs > rhs + 1e-12) {
            std::ostringstream os;
            os << "loops inequality violated: |T(x).T(y)^perp| = " << lhs
               << " > " << rhs << " at w1 = (" << w1.real() << ", " << w1.imag()
               << "), w2 = (" << w2.real() << ", " << w2.imag() << ")";
            throw PropertyViolationError(os.str());
        }
        if (sep > 1e-9) {
            const double tp1 = std::norm(Complex{1.0, 0.0} / inverse_map_derivative(map, w1));
            const double tp2 = std::norm(Complex{1.0, 0.0} / inverse_map_derivative(map, w2));
            const double mn = std::min(std::abs(w1), std::abs(w2));
            const double ratio = std::abs(tp1 - tp2) * mn * mn / sep;
            rep.loops2_sup_ratio = std::max(rep.loops2_sup_ratio, ratio);
        }
    }
    return rep;
}

DiagnosticRecord compute_record(const KernelContext& ctx, const VortexEnsemble& ensemble,
                                double t) {
    const MappedDiag m = map_for_diagnostics(ctx, ensemble);
    DiagnosticRecord rec;
    rec.t = t;
    rec.alpha = ctx.alpha;

    double mass = 0.0;
    double lm = 0.0;
    double j1 = 0.0;
    double j2 = 0.0;
    double rphys = 0.0;
    double rmap = 0.0;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        const double g = ensemble.strengths[i];
        mass += g;
        lm += g * m.logw[i];
        const double w2 = m.wabs[i] * m.wabs[i];
        j1 += g * w2 * m.logw[i];
        j2 += g * w2 * m.logw[i] * m.logw[i];
        rphys = std::max(rphys, ensemble.positions[i].norm());
        rmap = std::max(rmap, m.wabs[i]);
    }
    rec.mass = mass;
    rec.log_moment = lm / kTwoPi;
    rec.j_theta1 = j1;
    rec.j_theta2 = j2;
    rec.r_support_phys = rphys;
    rec.r_support_mapped = rmap;

    const auto [inertia, center] = physical_moments(ensemble);
    rec.inertia = inertia;
    rec.center = center;

    rec.energy = energy_from_mapped(ctx, ensemble, m);

    for (double r : {2.0, 4.0, 8.0, 16.0}) {
        const double lambda = 1.0 / (4.0 * std::log(r));
        double f = 0.0;
        for (std::size_t i = 0; i < ensemble.size(); ++i) {
            const double w2 = m.wabs[i] * m.wabs[i];
            f += ensemble.strengths[i] * eta((w2 - r * r) / (lambda * r * r));
        }
        rec.tail_mass.emplace_back(r, f);
    }
    rec.theta = theta_selector(ctx.alpha, mass);
    return rec;
}

}  // namespace exflow
