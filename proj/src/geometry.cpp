#include "exflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace exflow {

namespace {

std::string complex_str(Complex z) {
    std::ostringstream os;
    os << "(" << z.real() << ", " << z.imag() << ")";
    return os.str();
}

}  // namespace

bool ExteriorMapSpec::is_identity() const {
    if (beta != 1.0) return false;
    for (Complex c : inverse_coeffs) {
        if (c != Complex{0.0, 0.0}) return false;
    }
    return true;
}

void ExteriorMapSpec::require_valid() const {
    if (!(beta > 0.0)) {
        throw ValidationError("map: leading coefficient beta must be a positive real, got " +
                              std::to_string(beta));
    }
    if (!(newton_tol > 0.0)) {
        throw ValidationError("map: newton_tol must be positive");
    }
    if (newton_max_iter < 1) {
        throw ValidationError("map: newton_max_iter must be >= 1");
    }
}

ExteriorMapSpec disk_map() { return ExteriorMapSpec{}; }

ExteriorMapSpec ellipse_map(double c) {
    if (!(c > 0.0 && c < 1.0)) {
        throw ValidationError("ellipse preset requires 0 < c < 1, got " + std::to_string(c));
    }
    ExteriorMapSpec spec;
    spec.inverse_coeffs = {Complex{0.0, 0.0}, Complex{c, 0.0}};
    return spec;
}

Complex inverse_map(const ExteriorMapSpec& spec, Complex w) {
    if (std::abs(w) < 1.0 - 1e-12) {
        throw DomainError("inverse_map: |w| < 1, point " + complex_str(w) +
                          " is inside the unit disk");
    }
    Complex s = w / spec.beta;
    if (!spec.inverse_coeffs.empty()) {
        const Complex wi = 1.0 / w;
        Complex p{1.0, 0.0};  // w^{-k}
        for (Complex c : spec.inverse_coeffs) {
            s += c * p;
            p *= wi;
        }
    }
    return s;
}

namespace {

// S'(w) = 1/beta - sum_{k>=1} k c_k w^{-k-1}; defined for w != 0, no domain clamp so
// Newton can pass transiently through |w| slightly below 1.
Complex eval_S(const ExteriorMapSpec& spec, Complex w) {
    Complex s = w / spec.beta;
    const Complex wi = 1.0 / w;
    Complex p{1.0, 0.0};
    for (Complex c : spec.inverse_coeffs) {
        s += c * p;
        p *= wi;
    }
    return s;
}

Complex eval_S_prime(const ExteriorMapSpec& spec, Complex w) {
    Complex s = Complex{1.0, 0.0} / spec.beta;
    const Complex wi = 1.0 / w;
    Complex p = wi * wi;  // w^{-k-1}, starting at k=1
    for (std::size_t k = 1; k < spec.inverse_coeffs.size(); ++k) {
        s -= static_cast<double>(k) * spec.inverse_coeffs[k] * p;
        p *= wi;
    }
    return s;
}

Complex eval_S_second(const ExteriorMapSpec& spec, Complex w) {
    Complex s{0.0, 0.0};
    const Complex wi = 1.0 / w;
    Complex p = wi * wi * wi;  // w^{-k-2}, starting at k=1
    for (std::size_t k = 1; k < spec.inverse_coeffs.size(); ++k) {
        s += static_cast<double>(k * (k + 1)) * spec.inverse_coeffs[k] * p;
        p *= wi;
    }
    return s;
}

// One Newton run from seed w0; returns the iterate and whether it converged.
bool newton_solve(const ExteriorMapSpec& spec, Complex z, Complex w0, Complex& out) {
    Complex w = w0;
    for (int it = 0; it < spec.newton_max_iter; ++it) {
        if (w == Complex{0.0, 0.0}) return false;
        const Complex r = eval_S(spec, w) - z;
        if (std::abs(r) <= spec.newton_tol) {
            out = w;
            return true;
        }
        const Complex dp = eval_S_prime(spec, w);
        if (std::abs(dp) < 1e-14) return false;
        w -= r / dp;
        if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) return false;
    }
    out = w;
    return std::abs(eval_S(spec, w) - z) <= spec.newton_tol;
}

}  // namespace

Complex inverse_map_derivative(const ExteriorMapSpec& spec, Complex w) {
    if (std::abs(w) < 1.0 - 1e-12) {
        throw DomainError("inverse_map_derivative: |w| < 1 at " + complex_str(w));
    }
    return eval_S_prime(spec, w);
}

Complex inverse_map_second_derivative(const ExteriorMapSpec& spec, Complex w) {
    if (std::abs(w) < 1.0 - 1e-12) {
        throw DomainError("inverse_map_second_derivative: |w| < 1 at " + complex_str(w));
    }
    return eval_S_second(spec, w);
}

Complex forward_map(const ExteriorMapSpec& spec, Complex z) {
    if (spec.is_identity()) {
        const double r = std::abs(z);
        if (r < 1.0 - 10.0 * spec.newton_tol) {
            throw DomainError("forward_map: point " + complex_str(z) +
                              " lies strictly inside the obstacle");
        }
        return z;
    }

    Complex w;
    bool ok = newton_solve(spec, z, spec.beta * z, w);
    if (!ok) {
        // Restart on a circle of seeds; the leading-order inverse may be a poor
        // seed near the boundary.
        const double R = std::max(spec.beta * std::abs(z), 1.05);
        for (int j = 0; j < 16 && !ok; ++j) {
            const double phi = 2.0 * std::numbers::pi * j / 16.0;
            ok = newton_solve(spec, z, Complex{R * std::cos(phi), R * std::sin(phi)}, w);
        }
    }
    if (!ok) {
        throw MapInversionError(Vec2(z), "forward_map: Newton iteration failed to converge at z = " +
                                             complex_str(z));
    }
    if (std::abs(w) < 1.0 - 10.0 * spec.newton_tol) {
        throw DomainError("forward_map: point " + complex_str(z) +
                          " lies strictly inside the obstacle (|T(z)| = " +
                          std::to_string(std::abs(w)) + ")");
    }
    return w;
}

Complex map_derivative(const ExteriorMapSpec& spec, Complex z) {
    if (spec.is_identity()) {
        const double r = std::abs(z);
        if (r < 1.0 - 10.0 * spec.newton_tol) {
            throw DomainError("map_derivative: point inside the obstacle");
        }
        return Complex{1.0, 0.0};
    }
    const Complex w = forward_map(spec, z);
    return Complex{1.0, 0.0} / eval_S_prime(spec, w);
}

Mat2 jacobian(const ExteriorMapSpec& spec, Complex z) {
    const Complex tp = map_derivative(spec, z);
    const double a = tp.real();
    const double b = tp.imag();
    return Mat2{a, b, -b, a};
}

std::vector<Complex> validation_grid(double r_max, int n_samples) {
    // Log-radial grid with an odd radius count so that, with r_max = m^2, the
    // radius m is sampled exactly; always includes |w| = 1 and |w| = r_max.
    int n_r = std::max(9, static_cast<int>(std::lround(std::sqrt(n_samples / 8.0))));
    if (n_r % 2 == 0) ++n_r;
    const int n_theta = std::max(8, n_samples / n_r);
    std::vector<Complex> grid;
    grid.reserve(static_cast<std::size_t>(n_r) * n_theta);
    for (int i = 0; i < n_r; ++i) {
        const double r = std::pow(r_max, static_cast<double>(i) / (n_r - 1));
        for (int j = 0; j < n_theta; ++j) {
            const double th = 2.0 * std::numbers::pi * j / n_theta;
            grid.emplace_back(r * std::cos(th), r * std::sin(th));
        }
    }
    return grid;
}

MapValidationReport validate_map(const ExteriorMapSpec& spec, double r_max, int n_samples) {
    if (!(r_max > 1.0)) throw DomainError("validate_map: r_max must exceed 1");
    if (n_samples < 100) throw DomainError("validate_map: n_samples must be >= 100");
    spec.require_valid();

    const std::vector<Complex> grid = validation_grid(r_max, n_samples);
    const std::size_t n = grid.size();

    std::vector<Complex> img(n);
    MapValidationReport rep;
    rep.injectivity_ok = true;
    for (std::size_t i = 0; i < n; ++i) {
        const Complex w = grid[i];
        const Complex z = eval_S(spec, w);
        img[i] = z;
        const Complex sp = eval_S_prime(spec, w);
        const double asp = std::abs(sp);
        rep.max_DTinv_norm = std::max(rep.max_DTinv_norm, asp);
        if (asp > 0.0) {
            const Complex tp = Complex{1.0, 0.0} / sp;
            rep.max_DT_norm = std::max(rep.max_DT_norm, std::abs(tp));
            const double z2 = std::norm(z);
            rep.max_h_prime_times_z2 =
                std::max(rep.max_h_prime_times_z2, std::abs(tp - spec.beta) * z2);
            // h'' = T'' = -S''(w) / S'(w)^3.
            const Complex tpp = -eval_S_second(spec, w) / (sp * sp * sp);
            rep.max_h_second_times_z3 =
                std::max(rep.max_h_second_times_z3, std::abs(tpp) * z2 * std::abs(z));
        } else {
            rep.injectivity_ok = false;  // critical point on the grid
        }
    }

    // Pairwise image-collision scan: distinct grid points whose images coincide
    // (up to rounding) witness a fold of S.
    for (std::size_t i = 0; i < n && rep.injectivity_ok; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(grid[i] - grid[j]) <= 1e-6) continue;
            const double scale = std::max({1.0, std::abs(img[i]), std::abs(img[j])});
            if (std::abs(img[i] - img[j]) < 1e-9 * scale) {
                rep.injectivity_ok = false;
                break;
            }
        }
    }
    return rep;
}

}  // namespace exflow
