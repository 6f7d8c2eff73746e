// Quadrature grid on the unit sphere S^2: Gauss-Legendre nodes in cos(theta)
// tensored with a uniform longitude grid. Integrates zonal polynomials of
// degree <= 2*n_theta - 1 and trigonometric degree <= n_phi - 1 exactly, so
// every band-limited integrand used in this library is handled to round-off.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "isoq/geometry.hpp"

namespace isoq {

struct GeodesicDisk {
    Vec3 center;    // unit vector
    double radius;  // geodesic angle in (0, pi)
};

namespace detail {

struct GaussLegendre {
    std::vector<double> nodes;    // in (-1, 1), ascending
    std::vector<double> weights;  // positive, sum to 2
};

// Newton iteration on P_n with the usual Chebyshev-like initial guesses.
inline GaussLegendre gauss_legendre(int n) {
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int k = 0; k < half; ++k) {
        double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Evaluate P_n(x) and P_{n-1}(x) by the three-term recurrence.
            double p0 = 1.0, p1 = x;
            for (int l = 2; l <= n; ++l) {
                const double p2 = ((2 * l - 1) * x * p1 - (l - 1) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // k = 0 is the node closest to +1; store ascending in x.
        gl.nodes[n - 1 - k] = x;
        gl.weights[n - 1 - k] = w;
        gl.nodes[k] = -x;
        gl.weights[k] = w;
    }
    if (n % 2 == 1) {
        // Central node: x = 0 exactly.
        double p0 = 1.0, p1 = 0.0;
        for (int l = 2; l <= n; ++l) {
            const double p2 = (-(l - 1) * p0) / l;
            p0 = p1;
            p1 = p2;
        }
        // P_n'(0) = n * P_{n-1}(0) via the derivative identity at x = 0.
        const double dp = n * p0;
        gl.nodes[n / 2] = 0.0;
        gl.weights[n / 2] = 2.0 / (dp * dp);
    }
    return gl;
}

}  // namespace detail

class SphereGrid {
public:
    SphereGrid(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
        if (n_theta < 4) throw std::invalid_argument("SphereGrid: n_theta must be >= 4");
        if (n_phi < 8) throw std::invalid_argument("SphereGrid: n_phi must be >= 8");
        const auto gl = detail::gauss_legendre(n_theta);
        cos_theta_ = gl.nodes;           // ascending in cos(theta): theta descending
        theta_.resize(n_theta);
        sin_theta_.resize(n_theta);
        theta_weight_.resize(n_theta);
        for (int i = 0; i < n_theta; ++i) {
            // Store rings from the north pole down: reverse the ascending-x order.
            const double x = gl.nodes[n_theta - 1 - i];
            cos_theta_[i] = x;
            theta_[i] = std::acos(x);
            sin_theta_[i] = std::sqrt(1.0 - x * x);
            theta_weight_[i] = gl.weights[n_theta - 1 - i];
        }
        phi_.resize(n_phi);
        cos_phi_.resize(n_phi);
        sin_phi_.resize(n_phi);
        for (int j = 0; j < n_phi; ++j) {
            phi_[j] = 2.0 * std::numbers::pi * j / n_phi;
            cos_phi_[j] = std::cos(phi_[j]);
            sin_phi_[j] = std::sin(phi_[j]);
        }
        // Enforce the half-turn symmetry exactly so that antipodal node pairs
        // cancel to the last bit in moment integrals of symmetric fields.
        if (n_phi % 2 == 0) {
            for (int j = n_phi / 2; j < n_phi; ++j) {
                cos_phi_[j] = -cos_phi_[j - n_phi / 2];
                sin_phi_[j] = -sin_phi_[j - n_phi / 2];
            }
        }
        const double phi_weight = 2.0 * std::numbers::pi / n_phi;
        nodes_.resize(static_cast<std::size_t>(n_theta) * n_phi);
        weights_.resize(nodes_.size());
        for (int i = 0; i < n_theta; ++i) {
            for (int j = 0; j < n_phi; ++j) {
                const std::size_t idx = index(i, j);
                nodes_[idx] = {sin_theta_[i] * cos_phi_[j], sin_theta_[i] * sin_phi_[j],
                               cos_theta_[i]};
                weights_[idx] = theta_weight_[i] * phi_weight;
            }
        }
    }

    int n_theta() const { return n_theta_; }
    int n_phi() const { return n_phi_; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t index(int i_theta, int j_phi) const {
        return static_cast<std::size_t>(i_theta) * n_phi_ + j_phi;
    }

    const std::vector<Vec3>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& theta_nodes() const { return theta_; }
    const std::vector<double>& phi_nodes() const { return phi_; }
    const std::vector<double>& cos_theta() const { return cos_theta_; }
    const std::vector<double>& sin_theta() const { return sin_theta_; }
    const std::vector<double>& theta_weights() const { return theta_weight_; }
    const std::vector<double>& cos_phi() const { return cos_phi_; }
    const std::vector<double>& sin_phi() const { return sin_phi_; }
    double phi_weight() const { return 2.0 * std::numbers::pi / n_phi_; }

    // Largest degree the grid can carry in a harmonic transform.
    int band_limit() const { return n_theta_ - 1; }
    // Largest longitudinal order with exact phi quadrature for products.
    int order_limit() const { return std::min(band_limit(), n_phi_ / 2 - 1); }

private:
    int n_theta_;
    int n_phi_;
    std::vector<Vec3> nodes_;
    std::vector<double> weights_;
    std::vector<double> theta_, cos_theta_, sin_theta_, theta_weight_;
    std::vector<double> phi_, cos_phi_, sin_phi_;
};

inline SphereGrid build_grid(int n_theta, int n_phi) { return SphereGrid(n_theta, n_phi); }

inline double integrate(const SphereGrid& grid, const std::vector<double>& values) {
    if (values.size() != grid.size())
        throw std::invalid_argument("integrate: one value per grid node required");
    KahanSum sum;
    const auto& w = grid.weights();
    for (std::size_t i = 0; i < values.size(); ++i) sum.add(w[i] * values[i]);
    return sum.value();
}

inline double geodesic_distance(Vec3 a, Vec3 b) {
    if (std::abs(norm_sq(a) - 1.0) > 2e-10 || std::abs(norm_sq(b) - 1.0) > 2e-10)
        throw std::invalid_argument("geodesic_distance: inputs must be unit vectors");
    // Clamp to dodge round-off NaNs from acos at +-1.
    const double c = std::clamp(dot(a, b), -1.0, 1.0);
    return std::acos(c);
}

inline std::vector<std::uint8_t> disk_mask(const SphereGrid& grid, const GeodesicDisk& disk) {
    if (!(disk.radius > 0.0 && disk.radius < std::numbers::pi))
        throw std::invalid_argument("disk_mask: radius must lie in (0, pi)");
    if (std::abs(norm_sq(disk.center) - 1.0) > 2e-10)
        throw std::invalid_argument("disk_mask: center must be a unit vector");
    std::vector<std::uint8_t> mask(grid.size(), 0);
    const double cos_radius = std::cos(disk.radius);
    const auto& nodes = grid.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i)
        mask[i] = dot(nodes[i], disk.center) > cos_radius ? 1 : 0;
    return mask;
}

}  // namespace isoq
