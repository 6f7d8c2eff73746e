// Convex bodies in R^3 with the origin in the interior, given either in
// closed form (balls, spheroids, cone hulls, translates) or as radial samples
// on a sphere grid. Parametric variants carry analytic support/radial/volume/
// area shortcuts and double as oracles for the quadrature paths; sampled
// radial fields are the universal interchange format.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "isoq/harmonics.hpp"
#include "isoq/sphere_grid.hpp"

namespace isoq {

class ConvexBody;

struct Ball {
    double radius = 1.0;
    Vec3 center{};
};

// Semiaxes (a, a, c): equatorial a, polar c. Prolate when a < c.
struct Spheroid {
    double a = 1.0;
    double c = 1.0;
    Vec3 center{};
};

// Convex hull of the unit ball and one or two apexes at distance 1 + lambda
// along the polar axis.
struct ConeHull {
    double lambda = 0.1;
    bool two_sided = false;
};

struct SampledRadial {
    std::shared_ptr<const SphereGrid> grid;
    std::vector<double> rho;  // strictly positive, one per node
    bool claimed_convex = false;
};

struct Translate {
    std::shared_ptr<const ConvexBody> base;
    Vec3 shift{};
};

class ConvexBody {
public:
    using Variant = std::variant<Ball, Spheroid, ConeHull, SampledRadial, Translate>;

    ConvexBody(Ball b) : v_(validate(b)) {}
    ConvexBody(Spheroid s) : v_(validate(s)) {}
    ConvexBody(ConeHull c) : v_(validate(c)) {}
    ConvexBody(SampledRadial s) : v_(validate(std::move(s))) {}
    ConvexBody(Translate t) : v_(validate(std::move(t))) {}

    const Variant& variant() const { return v_; }

    template <class T>
    const T* get_if() const {
        return std::get_if<T>(&v_);
    }

private:
    static Ball validate(Ball b) {
        if (!(b.radius > 0.0)) throw std::invalid_argument("Ball: radius must be positive");
        return b;
    }
    static Spheroid validate(Spheroid s) {
        if (!(s.a > 0.0 && s.c > 0.0))
            throw std::invalid_argument("Spheroid: semiaxes must be positive");
        return s;
    }
    static ConeHull validate(ConeHull c) {
        if (!(c.lambda > 0.0)) throw std::invalid_argument("ConeHull: lambda must be positive");
        return c;
    }
    static SampledRadial validate(SampledRadial s) {
        if (!s.grid) throw std::invalid_argument("SampledRadial: missing grid");
        if (s.rho.size() != s.grid->size())
            throw std::invalid_argument("SampledRadial: one radius per grid node required");
        for (double r : s.rho)
            if (!(r > 0.0))
                throw std::invalid_argument("SampledRadial: radial samples must be positive");
        return s;
    }
    static Translate validate(Translate t) {
        if (!t.base) throw std::invalid_argument("Translate: missing base body");
        return t;
    }

    Variant v_;
};

inline ConvexBody translate(ConvexBody body, Vec3 shift) {
    return ConvexBody(Translate{std::make_shared<ConvexBody>(std::move(body)), shift});
}

// A scalar field sampled on a grid, stored as u = rho - 1.
struct RadialField {
    std::vector<double> u;
};

namespace detail {

// Cubic Lagrange in theta (nonuniform rings, clamped stencil) composed with
// periodic Catmull-Rom in phi. Accurate to O(h^4) for smooth fields, which is
// what the off-grid probes here need.
inline double interpolate_grid_value(const SphereGrid& grid, const std::vector<double>& values,
                                     double theta, double phi) {
    const int nt = grid.n_theta();
    const int np = grid.n_phi();
    const auto& tn = grid.theta_nodes();

    int i1 = static_cast<int>(std::upper_bound(tn.begin(), tn.end(), theta) - tn.begin()) - 1;
    int i0 = std::clamp(i1 - 1, 0, nt - 4);
    const double two_pi = 2.0 * std::numbers::pi;
    double p = std::fmod(phi, two_pi);
    if (p < 0) p += two_pi;
    const double step = two_pi / np;
    const int j1 = static_cast<int>(std::floor(p / step));
    const double s = p / step - j1;

    double col[4];
    for (int r = 0; r < 4; ++r) {
        const int i = i0 + r;
        double f[4];
        for (int k = 0; k < 4; ++k) {
            const int j = ((j1 - 1 + k) % np + np) % np;
            f[k] = values[grid.index(i, j)];
        }
        // Uniform Catmull-Rom in phi.
        col[r] = f[1] + 0.5 * s * (f[2] - f[0] +
                                   s * (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3] +
                                        s * (3.0 * (f[1] - f[2]) + f[3] - f[0])));
    }
    // Cubic Lagrange through the four bracketing rings.
    double out = 0.0;
    for (int r = 0; r < 4; ++r) {
        double w = 1.0;
        for (int k = 0; k < 4; ++k) {
            if (k == r) continue;
            w *= (theta - tn[i0 + k]) / (tn[i0 + r] - tn[i0 + k]);
        }
        out += w * col[r];
    }
    return out;
}

inline double spheroid_radial_centered(const Spheroid& s, Vec3 omega) {
    const double q = (omega.x * omega.x + omega.y * omega.y) / (s.a * s.a) +
                     omega.z * omega.z / (s.c * s.c);
    return 1.0 / std::sqrt(q);
}

// Radial coordinate of a quadric boundary |M^(-1)(t*omega - c0)| = 1 along omega.
inline double spheroid_radial(const Spheroid& s, Vec3 omega) {
    const Vec3 c0 = s.center;
    if (c0.x == 0.0 && c0.y == 0.0 && c0.z == 0.0) return spheroid_radial_centered(s, omega);
    const double ia2 = 1.0 / (s.a * s.a), ic2 = 1.0 / (s.c * s.c);
    const double A = (omega.x * omega.x + omega.y * omega.y) * ia2 + omega.z * omega.z * ic2;
    const double B = -2.0 * ((omega.x * c0.x + omega.y * c0.y) * ia2 + omega.z * c0.z * ic2);
    const double C = (c0.x * c0.x + c0.y * c0.y) * ia2 + c0.z * c0.z * ic2 - 1.0;
    if (!(C < 0.0)) throw std::domain_error("radial_function: origin not interior to spheroid");
    return (-B + std::sqrt(B * B - 4.0 * A * C)) / (2.0 * A);
}

inline double ball_radial(const Ball& b, Vec3 omega) {
    const double co = dot(b.center, omega);
    const double disc = b.radius * b.radius - norm_sq(b.center) + co * co;
    if (norm(b.center) >= b.radius)
        throw std::domain_error("radial_function: origin not interior to ball");
    return co + std::sqrt(disc);
}

// Zonal radial profile of a cone hull as a function of the colatitude.
inline double cone_hull_profile(const ConeHull& c, double theta) {
    const double d = 1.0 + c.lambda;
    const double theta0 = std::acos(1.0 / d);
    const double k = std::sqrt(2.0 * c.lambda + c.lambda * c.lambda);
    double t = theta;
    if (c.two_sided && t > std::numbers::pi / 2) t = std::numbers::pi - t;
    if (t < theta0) return d / (std::cos(t) + k * std::sin(t));
    return 1.0;
}

inline double cone_hull_profile_slope(const ConeHull& c, double theta) {
    const double d = 1.0 + c.lambda;
    const double theta0 = std::acos(1.0 / d);
    const double k = std::sqrt(2.0 * c.lambda + c.lambda * c.lambda);
    double t = theta;
    double sign = 1.0;
    if (c.two_sided && t > std::numbers::pi / 2) {
        t = std::numbers::pi - t;
        sign = -1.0;
    }
    if (t >= theta0) return 0.0;
    const double den = std::cos(t) + k * std::sin(t);
    return sign * (-d * (k * std::cos(t) - std::sin(t)) / (den * den));
}

}  // namespace detail

inline double radial_function(const ConvexBody& body, Vec3 omega);

namespace detail {

// Largest t with t*omega inside base + shift, by bisection on the single sign
// change of |t*omega - shift| - rho_base along the ray (the body is
// star-shaped about any interior point).
inline double translated_radial_bisect(const ConvexBody& base, Vec3 shift, Vec3 omega,
                                       double t_hi) {
    const Vec3 p0 = -1.0 * shift;
    if (norm(p0) > 0 && norm(p0) >= radial_function(base, normalized(p0)))
        throw std::domain_error("radial_function: origin not interior to translated body");
    double lo = 0.0, hi = t_hi * (1.0 + 1e-12) + 1e-12;
    for (int it = 0; it < 90; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Vec3 p = mid * omega - shift;
        const double r = norm(p);
        const bool inside = r == 0.0 || r <= radial_function(base, p / r);
        (inside ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline double support_function(const ConvexBody& body, Vec3 nu);

inline double radial_function(const ConvexBody& body, Vec3 omega) {
    if (const auto* b = body.get_if<Ball>()) return detail::ball_radial(*b, omega);
    if (const auto* s = body.get_if<Spheroid>()) return detail::spheroid_radial(*s, omega);
    if (const auto* c = body.get_if<ConeHull>()) {
        const double theta = std::acos(std::clamp(omega.z, -1.0, 1.0));
        return detail::cone_hull_profile(*c, theta);
    }
    if (const auto* s = body.get_if<SampledRadial>()) {
        const double theta = std::acos(std::clamp(omega.z, -1.0, 1.0));
        const double phi = std::atan2(omega.y, omega.x);
        return detail::interpolate_grid_value(*s->grid, s->rho, theta, phi);
    }
    const auto& t = *body.get_if<Translate>();
    // Closed forms for shifted quadrics, generic bisection otherwise.
    if (const auto* b = t.base->get_if<Ball>())
        return detail::ball_radial(Ball{b->radius, b->center + t.shift}, omega);
    if (const auto* s = t.base->get_if<Spheroid>())
        return detail::spheroid_radial(Spheroid{s->a, s->c, s->center + t.shift}, omega);
    const double t_hi = support_function(*t.base, omega) + dot(t.shift, omega);
    return detail::translated_radial_bisect(*t.base, t.shift, omega, t_hi);
}

namespace detail {

// Support of a sampled body: max_i rho_i * (omega_i . nu) over the boundary
// samples. A decimated global pass followed by a local hill climb keeps this
// O(sqrt(N))-ish per direction instead of O(N).
inline double sampled_support(const SampledRadial& s, Vec3 nu) {
    const SphereGrid& g = *s.grid;
    const int nt = g.n_theta(), np = g.n_phi();
    const auto& nodes = g.nodes();
    const auto score = [&](int i, int j) {
        const std::size_t idx = g.index(i, j);
        return s.rho[idx] * dot(nodes[idx], nu);
    };
    const int si = std::max(1, nt / 32), sj = std::max(1, np / 32);
    int bi = 0, bj = 0;
    double best = -1e300;
    for (int i = 0; i < nt; i += si)
        for (int j = 0; j < np; j += sj) {
            const double v = score(i, j);
            if (v > best) {
                best = v;
                bi = i;
                bj = j;
            }
        }
    for (int step = 0; step < 4 * (si + sj + np); ++step) {
        bool moved = false;
        for (int di = -1; di <= 1 && !moved; ++di)
            for (int dj = -1; dj <= 1 && !moved; ++dj) {
                if (di == 0 && dj == 0) continue;
                const int i = bi + di;
                if (i < 0 || i >= nt) continue;
                const int j = ((bj + dj) % np + np) % np;
                const double v = score(i, j);
                if (v > best) {
                    best = v;
                    bi = i;
                    bj = j;
                    moved = true;
                }
            }
        if (!moved) break;
    }
    return best;
}

}  // namespace detail

inline double support_function(const ConvexBody& body, Vec3 nu) {
    if (const auto* b = body.get_if<Ball>()) return b->radius + dot(b->center, nu);
    if (const auto* s = body.get_if<Spheroid>()) {
        const double h = std::sqrt(s->a * s->a * (nu.x * nu.x + nu.y * nu.y) +
                                   s->c * s->c * nu.z * nu.z);
        return h + dot(s->center, nu);
    }
    if (const auto* c = body.get_if<ConeHull>()) {
        const double apex = (1.0 + c->lambda) * (c->two_sided ? std::abs(nu.z) : nu.z);
        return std::max(1.0, apex);
    }
    if (const auto* s = body.get_if<SampledRadial>()) {
        if (!s->claimed_convex)
            throw std::domain_error(
                "support_function: sampled body without convexity claim is unsupported");
        return detail::sampled_support(*s, nu);
    }
    const auto& t = *body.get_if<Translate>();
    return support_function(*t.base, nu) + dot(t.shift, nu);
}

// rho_L = 1 / h of the polar body, evaluated per node.
inline RadialField radial_from_support_polar(const SphereGrid& grid,
                                             const std::vector<double>& h_polar) {
    if (h_polar.size() != grid.size())
        throw std::invalid_argument("radial_from_support_polar: one value per node required");
    RadialField f;
    f.u.resize(h_polar.size());
    for (std::size_t i = 0; i < h_polar.size(); ++i) {
        if (!(h_polar[i] > 0.0))
            throw std::invalid_argument("radial_from_support_polar: nonpositive support value");
        f.u[i] = 1.0 / h_polar[i] - 1.0;
    }
    return f;
}

inline std::vector<double> radial_samples(const ConvexBody& body, const SphereGrid& grid) {
    // Sampled bodies living on the same grid are returned as-is (no resampling).
    if (const auto* s = body.get_if<SampledRadial>()) {
        if (s->grid->n_theta() == grid.n_theta() && s->grid->n_phi() == grid.n_phi())
            return s->rho;
    }
    std::vector<double> rho(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) rho[i] = radial_function(body, grid.nodes()[i]);
    return rho;
}

inline RadialField radial_field(const ConvexBody& body, const SphereGrid& grid) {
    RadialField f;
    f.u = radial_samples(body, grid);
    for (double& v : f.u) v -= 1.0;
    return f;
}

// True while the body has an axisymmetric closed-form radial profile.
inline bool has_zonal_profile(const ConvexBody& body) {
    return body.get_if<Ball>() != nullptr || body.get_if<Spheroid>() != nullptr ||
           body.get_if<ConeHull>() != nullptr;
}

namespace detail {

inline double zonal_profile(const ConvexBody& body, double theta) {
    if (const auto* b = body.get_if<Ball>()) {
        if (norm(b->center) != 0.0) throw std::logic_error("zonal_profile: off-center ball");
        return b->radius;
    }
    if (const auto* s = body.get_if<Spheroid>()) {
        if (norm(s->center) != 0.0) throw std::logic_error("zonal_profile: off-center spheroid");
        const double st = std::sin(theta), ct = std::cos(theta);
        return 1.0 / std::sqrt(st * st / (s->a * s->a) + ct * ct / (s->c * s->c));
    }
    return cone_hull_profile(*body.get_if<ConeHull>(), theta);
}

inline double zonal_profile_slope(const ConvexBody& body, double theta) {
    if (body.get_if<Ball>()) return 0.0;
    if (const auto* s = body.get_if<Spheroid>()) {
        const double rho = zonal_profile(body, theta);
        return -0.5 * rho * rho * rho * std::sin(2.0 * theta) *
               (1.0 / (s->a * s->a) - 1.0 / (s->c * s->c));
    }
    return cone_hull_profile_slope(*body.get_if<ConeHull>(), theta);
}

inline double cone_hull_volume(const ConeHull& c) {
    const double d = 1.0 + c.lambda;
    const double ct = 1.0 / d;
    const double st2 = 1.0 - ct * ct;
    const double cone = std::numbers::pi / 3.0 * st2 * (d - ct);
    const double cap = std::numbers::pi * (2.0 / 3.0 - ct + ct * ct * ct / 3.0);
    const double extra = cone - cap;
    return 4.0 * std::numbers::pi / 3.0 + (c.two_sided ? 2.0 : 1.0) * extra;
}

inline double cone_hull_area(const ConeHull& c) {
    const double d = 1.0 + c.lambda;
    const double ct = 1.0 / d;
    const double st = std::sqrt(1.0 - ct * ct);
    const double cap = 2.0 * std::numbers::pi * (1.0 - ct);
    const double lateral = std::numbers::pi * st * std::sqrt(d * d - 1.0);
    const double extra = lateral - cap;
    return 4.0 * std::numbers::pi + (c.two_sided ? 2.0 : 1.0) * extra;
}

inline double spheroid_area(double a, double c) {
    const double r = std::min(a, c) / std::max(a, c);
    const double e2 = 1.0 - r * r;
    if (e2 < 1e-12) return 4.0 * std::numbers::pi * a * c;  // numerically a sphere
    const double e = std::sqrt(e2);
    if (a < c) {
        // Prolate: 2 pi a^2 (1 + c/(a e) asin(e)).
        return 2.0 * std::numbers::pi * a * a * (1.0 + c / (a * e) * std::asin(e));
    }
    // Oblate: 2 pi a^2 (1 + (1-e^2)/e atanh(e)).
    return 2.0 * std::numbers::pi * a * a * (1.0 + (1.0 - e2) / e * std::atanh(e));
}

}  // namespace detail

// Volume, with closed forms for the parametric variants and the quadrature
// (1/3) integral rho^3 for sampled bodies.
inline double volume(const ConvexBody& body, const SphereGrid& grid) {
    if (const auto* b = body.get_if<Ball>())
        return 4.0 * std::numbers::pi / 3.0 * b->radius * b->radius * b->radius;
    if (const auto* s = body.get_if<Spheroid>())
        return 4.0 * std::numbers::pi / 3.0 * s->a * s->a * s->c;
    if (const auto* c = body.get_if<ConeHull>()) return detail::cone_hull_volume(*c);
    if (const auto* t = body.get_if<Translate>()) return volume(*t->base, grid);
    const auto rho = radial_samples(body, grid);
    std::vector<double> f(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) f[i] = rho[i] * rho[i] * rho[i];
    return integrate(grid, f) / 3.0;
}

// Quadrature route regardless of variant; the analytic shortcut is the oracle.
inline double volume_quadrature(const ConvexBody& body, const SphereGrid& grid) {
    const auto rho = radial_samples(body, grid);
    std::vector<double> f(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) f[i] = rho[i] * rho[i] * rho[i];
    return integrate(grid, f) / 3.0;
}

struct AreaResult {
    double value = 0.0;
    bool band_limit_warning = false;
};

// Area-formula quadrature integral rho * sqrt(rho^2 + |grad rho|^2) dsigma.
// Zonal parametric bodies use the analytic profile slope; sampled bodies use
// the spectral gradient (and carry its resolvability warning).
inline AreaResult surface_area_quadrature_checked(const ConvexBody& body, const SphereGrid& grid) {
    AreaResult res;
    std::vector<double> integrand(grid.size());
    if (has_zonal_profile(body)) {
        for (int i = 0; i < grid.n_theta(); ++i) {
            const double theta = grid.theta_nodes()[i];
            const double rho = detail::zonal_profile(body, theta);
            const double slope = detail::zonal_profile_slope(body, theta);
            const double val = rho * std::sqrt(rho * rho + slope * slope);
            for (int j = 0; j < grid.n_phi(); ++j) integrand[grid.index(i, j)] = val;
        }
    } else {
        const auto rho = radial_samples(body, grid);
        const auto grad = surface_gradient(grid, rho);
        res.band_limit_warning = grad.band_limit_warning;
        for (std::size_t i = 0; i < rho.size(); ++i)
            integrand[i] = rho[i] * std::sqrt(rho[i] * rho[i] + grad.norm_sq[i]);
    }
    res.value = integrate(grid, integrand);
    return res;
}

inline AreaResult surface_area_checked(const ConvexBody& body, const SphereGrid& grid) {
    if (const auto* b = body.get_if<Ball>())
        return {4.0 * std::numbers::pi * b->radius * b->radius, false};
    if (const auto* s = body.get_if<Spheroid>()) return {detail::spheroid_area(s->a, s->c), false};
    if (const auto* c = body.get_if<ConeHull>()) return {detail::cone_hull_area(*c), false};
    if (const auto* t = body.get_if<Translate>()) return surface_area_checked(*t->base, grid);
    return surface_area_quadrature_checked(body, grid);
}

inline double surface_area(const ConvexBody& body, const SphereGrid& grid) {
    return surface_area_checked(body, grid).value;
}

inline double surface_area_quadrature(const ConvexBody& body, const SphereGrid& grid) {
    return surface_area_quadrature_checked(body, grid).value;
}

// Independent quadrature of the spheroid surface integral in its meridian
// parametrization: P = 2 pi a * integral_{-1}^{1} sqrt(c^2 - (c^2 - a^2) x^2) dx.
// Unlike the radial-graph area formula, whose integrand degenerates near the
// poles of elongated spheroids, this integrand stays analytic past the
// endpoints and Gauss-Legendre converges at rate exp(-2 n a / c).
inline double spheroid_area_meridian_quadrature(double a, double c, int n) {
    if (!(a > 0.0 && c > 0.0)) throw std::invalid_argument("spheroid area: bad semiaxes");
    const auto gl = detail::gauss_legendre(n);
    KahanSum s;
    for (int k = 0; k < n; ++k) {
        const double x = gl.nodes[k];
        s.add(gl.weights[k] * std::sqrt(c * c - (c * c - a * a) * x * x));
    }
    return 2.0 * std::numbers::pi * a * s.value();
}

namespace detail {

// Farthest pair of boundary samples. Points are visited in decreasing radius
// so that the rho_i + rho_j <= best bound prunes most pairs.
inline double sampled_diameter(const SampledRadial& s) {
    const auto& nodes = s.grid->nodes();
    const std::size_t n = nodes.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return s.rho[a] > s.rho[b]; });
    std::vector<Vec3> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = s.rho[order[i]] * nodes[order[i]];
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = s.rho[order[i]];
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (r[i] + r[i] <= best) break;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (r[i] + r[j] <= best) break;
            best = std::max(best, norm(pts[i] - pts[j]));
        }
    }
    return best;
}

}  // namespace detail

// Maximal width h(nu) + h(-nu); closed forms where the maximum is known to sit
// on the polar axis, farthest-pair search for sampled bodies.
inline double diameter(const ConvexBody& body, const SphereGrid& grid) {
    if (const auto* b = body.get_if<Ball>()) return 2.0 * b->radius;
    if (const auto* s = body.get_if<Spheroid>()) return 2.0 * std::max(s->a, s->c);
    if (const auto* c = body.get_if<ConeHull>())
        return c->two_sided ? 2.0 * (1.0 + c->lambda) : 2.0 + c->lambda;
    if (const auto* t = body.get_if<Translate>()) return diameter(*t->base, grid);
    return detail::sampled_diameter(*body.get_if<SampledRadial>());
}

struct ConvexityResult {
    bool pass = false;
    double worst_margin = 0.0;  // most negative containment margin observed
};

namespace detail {

// Portable uniform double in [0,1) from raw mt19937_64 bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Probabilistic midpoint-containment test on random boundary sample pairs:
// with x = rho(w1) w1, y = rho(w2) w2 and m = (x + y) / 2, convexity requires
// rho(m/|m|) >= |m|. Reports the most negative margin found. Off-node radii
// come from the analyzed spectrum, so band-limited fields (the optimizer's
// harmonic candidates in particular) are probed exactly.
inline ConvexityResult convexity_check(const SphereGrid& grid, const RadialField& field,
                                       int pairs, double tol, std::uint64_t seed = 42) {
    if (pairs < 1000) throw std::invalid_argument("convexity_check: use at least 1000 pairs");
    if (field.u.size() != grid.size())
        throw std::invalid_argument("convexity_check: field/grid size mismatch");
    std::vector<double> rho(field.u.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = 1.0 + field.u[i];
    HarmonicSpectrum spec = analyze(grid, rho, grid.band_limit());
    // Drop longitudinal orders that carry only quadrature round-off; this keeps
    // the per-midpoint synthesis cheap for near-zonal fields.
    double cmax = 0.0;
    std::vector<double> order_max(spec.max_order() + 1, 0.0);
    for (int l = 0; l <= spec.max_degree(); ++l)
        for (int m = 0; m <= spec.band(l); ++m) {
            const double v = std::max(std::abs(spec(l, m)), std::abs(spec(l, -m)));
            order_max[m] = std::max(order_max[m], v);
            cmax = std::max(cmax, v);
        }
    int m_used = 0;
    for (int m = 0; m <= spec.max_order(); ++m)
        if (order_max[m] > 1e-15 * cmax) m_used = m;

    std::mt19937_64 rng(seed);
    const auto& nodes = grid.nodes();
    double worst = 1e300;
    for (int k = 0; k < pairs; ++k) {
        const std::size_t i = static_cast<std::size_t>(detail::uniform01(rng) * grid.size());
        const std::size_t j = static_cast<std::size_t>(detail::uniform01(rng) * grid.size());
        if (i == j) continue;
        const Vec3 m = 0.5 * (rho[i] * nodes[i] + rho[j] * nodes[j]);
        const double mn = norm(m);
        if (mn < 1e-12) continue;
        const double r_mid = synthesize_at(spec, m / mn, m_used);
        worst = std::min(worst, r_mid - mn);
    }
    ConvexityResult res;
    res.worst_margin = worst;
    res.pass = worst >= -tol;
    return res;
}

inline ConvexityResult convexity_check(const ConvexBody& body, const SphereGrid& grid, int pairs,
                                       double tol, std::uint64_t seed = 42) {
    return convexity_check(grid, radial_field(body, grid), pairs, tol, seed);
}

}  // namespace isoq
