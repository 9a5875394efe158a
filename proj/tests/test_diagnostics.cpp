#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "exflow/diagnostics.hpp"
#include "exflow/dynamics.hpp"
#include "exflow/errors.hpp"

using namespace exflow;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

VortexEnsemble make_ensemble(std::vector<Vec2> pos, std::vector<double> g) {
    VortexEnsemble e;
    e.positions = std::move(pos);
    e.strengths = std::move(g);
    return e;
}

// Brute-force re-implementation of the vorticity-form energy sum, written
// against the scalar formulas instead of complex arithmetic.
double energy_reference_disk(const std::vector<Vec2>& x, const std::vector<double>& g,
                             double alpha, double delta) {
    const std::size_t n = x.size();
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Vec2 ystar = x[j] * (1.0 / x[j].norm2());
            e += g[i] * g[j] * std::log((x[i] - ystar).norm() * x[j].norm());
            if (i == j) continue;
            const double d2 = (x[i] - x[j]).norm2() + delta * delta;
            e -= g[i] * g[j] * 0.5 * std::log(d2);
        }
    }
    e /= 2.0 * kPi;
    for (std::size_t i = 0; i < n; ++i) {
        e -= alpha / kPi * g[i] * std::log(x[i].norm());
    }
    return e;
}

VortexEnsemble random_disk_ensemble(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    VortexEnsemble e;
    for (int i = 0; i < n; ++i) {
        const double r = 1.5 + 2.0 * unif(rng);
        const double th = 2.0 * kPi * unif(rng);
        e.positions.push_back({r * std::cos(th), r * std::sin(th)});
        e.strengths.push_back(0.1 + unif(rng));
    }
    return e;
}

}  // namespace

TEST_CASE("generalized_energy: single particle keeps only its image term") {
    const KernelContext ctx{disk_map(), 0.0, 0.0};
    const VortexEnsemble e = make_ensemble({{2.0, 0.0}}, {1.0});
    // |x - x*| = 1.5, |x| = 2 -> E = log(3)/(2 pi).
    CHECK(generalized_energy(ctx, e) ==
          doctest::Approx(std::log(3.0) / (2.0 * kPi)).epsilon(1e-14));

    const VortexEnsemble empty{};
    CHECK(generalized_energy(ctx, empty) == 0.0);
}

TEST_CASE("generalized_energy agrees with an independent brute-force sum") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 5; ++trial) {
        const VortexEnsemble e = random_disk_ensemble(rng, 20);
        for (double delta : {0.0, 0.05}) {
            for (double alpha : {0.0, -1.3, 2.7}) {
                const KernelContext ctx{disk_map(), alpha, delta};
                const double ref =
                    energy_reference_disk(e.positions, e.strengths, alpha, delta);
                CHECK(generalized_energy(ctx, e) == doctest::Approx(ref).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("generalized_energy: coincident particles with delta = 0 are singular") {
    const KernelContext ctx{disk_map(), 0.0, 0.0};
    const VortexEnsemble e = make_ensemble({{2.0, 0.0}, {2.0, 0.0}}, {1.0, 1.0});
    CHECK_THROWS_AS(generalized_energy(ctx, e), SingularityError);
    const KernelContext creg{disk_map(), 0.0, 0.1};
    CHECK(std::isfinite(generalized_energy(creg, e)));
}

TEST_CASE("log_moment: direct values") {
    const KernelContext ctx{disk_map(), 0.0, 0.0};
    CHECK(log_moment(ctx, make_ensemble({{kE, 0.0}}, {2.0 * kPi})) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(log_moment(ctx, make_ensemble({{1.0, 0.0}, {0.0, 1.0}}, {0.7, 0.3})) ==
          doctest::Approx(0.0).epsilon(1e-14));
    CHECK(log_moment(ctx, make_ensemble({{kE, 0.0}, {kE * kE, 0.0}}, {kPi, kPi})) ==
          doctest::Approx(1.5).epsilon(1e-14));
    // Nonnegative for nonnegative ensembles (|T| >= 1).
    std::mt19937_64 rng(7);
    CHECK(log_moment(ctx, random_disk_ensemble(rng, 30)) >= 0.0);
}

TEST_CASE("weighted_moments: direct values and pointwise bound") {
    const KernelContext ctx{disk_map(), 0.0, 0.0};
    const auto [j1, j2] = weighted_moments(ctx, make_ensemble({{kE, 0.0}}, {1.0}));
    CHECK(j1 == doctest::Approx(kE * kE).epsilon(1e-14));
    CHECK(j2 == doctest::Approx(kE * kE).epsilon(1e-14));

    const auto [b1, b2] = weighted_moments(ctx, make_ensemble({{0.0, 1.0}}, {1.0}));
    CHECK(b1 == doctest::Approx(0.0));
    CHECK(b2 == doctest::Approx(0.0));

    std::mt19937_64 rng(13);
    const VortexEnsemble e = random_disk_ensemble(rng, 40);
    const auto [r1, r2] = weighted_moments(ctx, e);
    double maxlog = 0.0;
    for (const Vec2& p : e.positions) maxlog = std::max(maxlog, std::log(p.norm()));
    CHECK(r2 <= r1 * maxlog * (1.0 + 1e-12));
}

TEST_CASE("physical_moments: inertia, center, exact even cancellation") {
    const auto [inertia, center] = physical_moments(make_ensemble({{3.0, 4.0}}, {2.0}));
    CHECK(inertia == doctest::Approx(50.0));
    CHECK(center.x == doctest::Approx(3.0));
    CHECK(center.y == doctest::Approx(4.0));

    VortexEnsemble even;
    even.even_symmetric = true;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 25; ++i) {
        even.positions.push_back({1.5 + unif(rng), unif(rng) - 0.5});
        even.strengths.push_back(0.01 + unif(rng));
    }
    const std::size_t h = even.positions.size();
    for (std::size_t i = 0; i < h; ++i) {
        even.positions.push_back(-even.positions[i]);
        even.strengths.push_back(even.strengths[i]);
    }
    const auto [ie, ce] = physical_moments(even);
    CHECK(ce.x == 0.0);  // exact, not approximate
    CHECK(ce.y == 0.0);
    CHECK(ie > 0.0);

    CHECK_THROWS_AS(physical_moments(make_ensemble({{2.0, 0.0}}, {0.0})), DomainError);
}

TEST_CASE("smoothed_tail_mass: logistic window behavior") {
    const KernelContext ctx{disk_map(), 0.0, 0.0};
    const double lambda = 0.25;

    // Particle exactly at |T| = r contributes gamma/2.
    const double g = 0.8;
    CHECK(smoothed_tail_mass(ctx, make_ensemble({{3.0, 0.0}}, {g}), 3.0, lambda) ==
          doctest::Approx(g / 2.0).epsilon(1e-14));

    // r far beyond the support: bounded by m e^{-1/(2 lambda)} when |T|^2 <= r^2/2.
    std::mt19937_64 rng(23);
    const VortexEnsemble e = random_disk_ensemble(rng, 30);
    const double m = e.total_strength();
    const double r_far = 16.0;
    CHECK(smoothed_tail_mass(ctx, e, r_far, lambda) <= m * std::exp(-1.0 / (2.0 * lambda)));

    // r just above 1 captures essentially all mass.
    CHECK(smoothed_tail_mass(ctx, e, 1.0 + 1e-9, 0.01) == doctest::Approx(m).epsilon(1e-6));

    // Monotone nonincreasing in r.
    double prev = 1e300;
    for (double r : {1.5, 2.0, 3.0, 4.0, 6.0, 9.0, 14.0}) {
        const double f = smoothed_tail_mass(ctx, e, r, lambda);
        CHECK(f <= prev + 1e-15);
        prev = f;
    }

    CHECK_THROWS_AS(smoothed_tail_mass(ctx, e, 0.5, lambda), DomainError);
    CHECK_THROWS_AS(smoothed_tail_mass(ctx, e, 2.0, 1.5), DomainError);
}

TEST_CASE("theta_selector branches exactly on the alpha ranges") {
    CHECK(theta_selector(-0.1, 1.0) == 2);
    CHECK(theta_selector(0.0, 1.0) == 2);
    CHECK(theta_selector(0.5, 1.0) == 1);
    CHECK(theta_selector(1.0, 1.0) == 1);
    CHECK(theta_selector(1.2, 1.0) == 2);
    CHECK_THROWS_AS(theta_selector(0.5, 0.0), DomainError);
}

TEST_CASE("min_log_pair_moment: enumerated pairs and O(N^2) oracle") {
    const KernelContext ctx{disk_map(), 0.0, 0.0};
    CHECK(min_log_pair_moment(ctx, make_ensemble({{kE, 0.0}, {0.0, kE * kE * kE}}, {1.0, 1.0})) ==
          doctest::Approx(6.0).epsilon(1e-13));
    CHECK(min_log_pair_moment(ctx, make_ensemble({{kE, 0.0}}, {1.0})) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(min_log_pair_moment(ctx, make_ensemble({{1.0, 0.0}, {0.0, 1.0}}, {1.0, 2.0})) ==
          doctest::Approx(0.0).epsilon(1e-14));

    // Direct double-sum oracle on random ensembles.
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 3; ++trial) {
        const VortexEnsemble e = random_disk_ensemble(rng, 35);
        double ref = 0.0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            for (std::size_t j = 0; j < e.size(); ++j) {
                ref += e.strengths[i] * e.strengths[j] *
                       std::log(std::min(e.positions[i].norm(), e.positions[j].norm()));
            }
        }
        CHECK(min_log_pair_moment(ctx, e) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("fit_growth_exponent: exact laws and windowing") {
    SUBCASE("exact power law is recovered to rounding") {
        std::vector<std::pair<double, double>> s;
        for (int k = 0; k <= 100; ++k) {
            const double t = 0.5 + 0.2 * k;
            s.emplace_back(t, 3.0 * std::pow(1.0 + t, 0.5));
        }
        const GrowthFit g = fit_growth_exponent(s, 0.4, 21.0);
        CHECK(g.exponent == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(g.prefactor == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(g.residual <= 1e-12);
    }
    SUBCASE("constant series fits p = 0") {
        std::vector<std::pair<double, double>> s;
        for (int k = 0; k <= 40; ++k) s.emplace_back(1.0 + k, 2.5);
        const GrowthFit g = fit_growth_exponent(s, 1.0, 41.0);
        CHECK(g.exponent == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(g.prefactor == doctest::Approx(2.5).epsilon(1e-12));
    }
    SUBCASE("log-inflated quartic-root law lands in [0.25, 0.33]") {
        std::vector<std::pair<double, double>> s;
        for (int k = 0; k < 200; ++k) {
            const double t = 10.0 * std::pow(100.0, k / 199.0);  // log-spaced on [10, 1000]
            s.emplace_back(t, std::pow((1.0 + t) * std::log(2.0 + t), 0.25));
        }
        const GrowthFit g = fit_growth_exponent(s, 10.0, 1000.0);
        CHECK(g.exponent >= 0.25);
        CHECK(g.exponent <= 0.33);
    }
    SUBCASE("window and sample validation") {
        std::vector<std::pair<double, double>> s;
        for (int k = 0; k < 5; ++k) s.emplace_back(1.0 + k, 2.0);
        CHECK_THROWS_AS(fit_growth_exponent(s, 0.0, 10.0), FitError);
        std::vector<std::pair<double, double>> bad;
        for (int k = 0; k < 20; ++k) bad.emplace_back(1.0 + k, k == 3 ? -1.0 : 2.0);
        CHECK_THROWS_AS(fit_growth_exponent(bad, 0.5, 25.0), FitError);
    }
}

TEST_CASE("loops inequalities: hand-checked case and sampled sweeps") {
    // Disk, x = (2,0), y = (0,2): |x.y^perp| = 4 <= min(2,2)*|x-y| = 4 sqrt(2).
    const Vec2 tx{2.0, 0.0};
    const Vec2 ty{0.0, 2.0};
    CHECK(std::abs(dot(tx, ty.perp())) == doctest::Approx(4.0));
    CHECK(std::min(tx.norm(), ty.norm()) * (tx - ty).norm() ==
          doctest::Approx(2.0 * 2.0 * std::sqrt(2.0)));

    // x = y collapses both sides to zero.
    CHECK(std::abs(dot(tx, tx.perp())) == 0.0);
    CHECK(std::min(tx.norm(), tx.norm()) * (tx - tx).norm() == 0.0);

    const LoopsReport disk_rep = check_loops_inequalities(disk_map(), 10000, 42);
    CHECK(disk_rep.n_pairs == 10000);
    CHECK(disk_rep.loops1_max_slack <= 1e-12);
    CHECK(disk_rep.loops2_sup_ratio == doctest::Approx(0.0));  // |T'| is constant on the disk

    const LoopsReport ell_rep = check_loops_inequalities(ellipse_map(0.5), 10000, 43);
    CHECK(ell_rep.loops1_max_slack <= 1e-12);
    CHECK(std::isfinite(ell_rep.loops2_sup_ratio));
    CHECK(ell_rep.loops2_sup_ratio > 0.0);
    MESSAGE("ellipse loops2 sampled sup ratio = ", ell_rep.loops2_sup_ratio);
}

TEST_CASE("energy drift shrinks under dt, delta refinement") {
    auto drift = [](int grid_n, double dt) {
        SimulationConfig cfg;
        cfg.map = disk_map();
        cfg.map_preset = "disk";
        PatchSpec p;
        p.center = {2.0, 0.0};
        p.radius = 0.5;
        p.total_mass = 1.0;
        p.grid_n = grid_n;
        cfg.patches = {p};
        cfg.blob_delta = default_blob_delta(cfg.map, cfg.patches);
        cfg.dt = dt;
        cfg.t_end = 2.0;
        cfg.diagnostic_stride = 10;
        const RunResult res = run(cfg);
        REQUIRE_FALSE(res.aborted());
        const double e0 = res.records.front().energy;
        double d = 0.0;
        for (const DiagnosticRecord& r : res.records) d = std::max(d, std::abs(r.energy - e0));
        return d;
    };
    const double coarse = drift(12, 2e-2);
    const double fine = drift(24, 1e-2);
    CHECK(fine < coarse);
    CHECK(coarse / fine > 1.5);  // roughly O(delta^2): expect ~4x
}

TEST_CASE("compute_record is consistent with the individual functionals") {
    const ExteriorMapSpec map = ellipse_map(0.5);
    PatchSpec p;
    p.center = {3.0, 0.0};
    p.radius = 0.4;
    p.total_mass = 1.0;
    p.grid_n = 9;
    const VortexEnsemble e = discretize(map, {p}, 0.05, false);
    const KernelContext ctx{map, -1.0, 0.05};

    const DiagnosticRecord rec = compute_record(ctx, e, 2.5);
    CHECK(rec.t == 2.5);
    CHECK(rec.mass == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rec.alpha == -1.0);
    CHECK(rec.energy == doctest::Approx(generalized_energy(ctx, e)).epsilon(1e-13));
    CHECK(rec.log_moment == doctest::Approx(log_moment(ctx, e)).epsilon(1e-13));
    const auto [j1, j2] = weighted_moments(ctx, e);
    CHECK(rec.j_theta1 == doctest::Approx(j1).epsilon(1e-13));
    CHECK(rec.j_theta2 == doctest::Approx(j2).epsilon(1e-13));
    const auto [inertia, center] = physical_moments(e);
    CHECK(rec.inertia == doctest::Approx(inertia).epsilon(1e-13));
    CHECK(rec.center.x == doctest::Approx(center.x).epsilon(1e-13));
    CHECK(rec.theta == theta_selector(-1.0, rec.mass));
    REQUIRE(rec.tail_mass.size() == 4);
    double prev = 1e300;
    for (const auto& [r, f] : rec.tail_mass) {
        const double lambda = 1.0 / (4.0 * std::log(r));
        CHECK(f == doctest::Approx(smoothed_tail_mass(ctx, e, r, lambda)).epsilon(1e-13));
        CHECK(f <= prev + 1e-15);
        prev = f;
    }
    CHECK(rec.r_support_mapped >= 1.0);
    CHECK(rec.r_support_phys > 0.0);
}
