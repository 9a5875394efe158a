#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "exflow/ensemble.hpp"
#include "exflow/kernels.hpp"

namespace exflow {

/// One time sample of every tracked flow functional.
struct DiagnosticRecord {
    double t = 0.0;
    double mass = 0.0;
    double alpha = 0.0;
    double energy = 0.0;
    double log_moment = 0.0;
    double j_theta1 = 0.0;  // sum gamma |T|^2 log|T|
    double j_theta2 = 0.0;  // sum gamma |T|^2 log^2|T|
    double inertia = 0.0;   // sum gamma |x|^2 (physical plane)
    Vec2 center;            // sum gamma x / m
    double r_support_phys = 0.0;    // max_i |x_i|
    double r_support_mapped = 0.0;  // max_i |T(x_i)|
    std::vector<std::pair<double, double>> tail_mass;  // (r, f_r) at r = 2,4,8,16
    int theta = 1;
};

/// Fitted power law r ~ M (1+t)^p over a time window.
struct GrowthFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double residual = 0.0;  // RMS of log-residuals
};

/// Report of the sampled conformal-map inequalities. loops1_max_slack is the
/// largest value of |T(x).T(y)^perp| - min(|T|)|T(x)-T(y)| seen (<= 0 when the
/// inequality holds); loops2_sup_ratio is the empirical supremum of the
/// existential-constant ratio, asserted finite but not bounded by any fixed value.
struct LoopsReport {
    std::size_t n_pairs = 0;
    double loops1_max_slack = 0.0;
    double loops2_sup_ratio = 0.0;
};

/// Generalized energy in vorticity form with renormalized (dropped) self energy:
///   E = -(1/2pi) sum_{i != j} g_i g_j log|T_i - T_j|
///       +(1/2pi) sum_{i, j}  g_i g_j log(|T_i - T_j*| |T_j|)
///       -(alpha/pi) sum_i g_i log|T_i|,
/// with the i != j free-space distance regularized by ctx.blob_delta.
double generalized_energy(const KernelContext& ctx, const VortexEnsemble& ensemble);

/// Modified logarithmic moment L = (1/2pi) sum gamma_i log|T(x_i)|.
double log_moment(const KernelContext& ctx, const VortexEnsemble& ensemble);

/// (sum gamma |T|^2 log|T|, sum gamma |T|^2 log^2|T|).
std::pair<double, double> weighted_moments(const KernelContext& ctx,
                                           const VortexEnsemble& ensemble);

/// (sum gamma |x|^2, sum gamma x / m). Even ensembles are summed in mirror-pair
/// order so the center cancels exactly. Throws DomainError when mass is zero.
std::pair<double, Vec2> physical_moments(const VortexEnsemble& ensemble);

/// Smoothed mass beyond mapped radius r: sum gamma_i eta((|T_i|^2 - r^2)/(lambda r^2))
/// with eta(s) = e^s/(1+e^s). Pre: r > 1, 0 < lambda <= 1.
double smoothed_tail_mass(const KernelContext& ctx, const VortexEnsemble& ensemble, double r,
                          double lambda);

/// 2 if alpha <= 0 or alpha > m, else 1. Pre: m > 0.
int theta_selector(double alpha, double m);

/// sum_{i,j} gamma_i gamma_j log min(|T_i|, |T_j|).
double min_log_pair_moment(const KernelContext& ctx, const VortexEnsemble& ensemble);

/// Least squares of log r against log(1+t) over samples with t in [t_lo, t_hi].
/// Pre: at least 10 samples in the window, all with r > 0 and t > 0.
GrowthFit fit_growth_exponent(const std::vector<std::pair<double, double>>& series, double t_lo,
                              double t_hi);

/// Samples n_random exterior point pairs and checks the conformal-map
/// inequalities: the cross-product bound with margin 1e-12 (violations throw
/// PropertyViolationError with the witness pair) and the derivative-difference
/// ratio, whose sampled supremum is reported.
LoopsReport check_loops_inequalities(const ExteriorMapSpec& map, int n_random,
                                     std::uint64_t seed);

/// Assembles a full record at time t, sharing one mapping pass across all
/// functionals. tail_mass uses r in {2,4,8,16} with lambda = 1/(4 log r).
DiagnosticRecord compute_record(const KernelContext& ctx, const VortexEnsemble& ensemble,
                                double t);

}  // namespace exflow
