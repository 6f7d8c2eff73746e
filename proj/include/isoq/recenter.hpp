// First-moment recentering: find the translation a such that the radial
// perturbation u = rho_{K-a} - 1 has zero first spherical moment, which kills
// the degree-one harmonics of u. Near the ball the moment map is a
// near-identity contraction (its ball linearization is -(4 pi / 3) a), so a
// damped fixed point preconditioned by that factor converges in a handful of
// iterations.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "isoq/body.hpp"
#include "isoq/functionals.hpp"
#include "isoq/sphere_grid.hpp"

namespace isoq {

// Hypothesis gate of the recentering regime.
constexpr double kRecenterMaxHausdorff = 0.25;

// First spherical moment of the radial perturbation of body - a:
// Phi(a) = integral (rho_{K-a}(omega) - 1) omega dsigma(omega).
inline Vec3 phi_map(const ConvexBody& body, const SphereGrid& grid, Vec3 a) {
    const ConvexBody shifted = translate(body, -1.0 * a);
    KahanSum mx, my, mz;
    const auto& nodes = grid.nodes();
    const auto& w = grid.weights();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = radial_function(shifted, nodes[i]) - 1.0;
        mx.add(w[i] * u * nodes[i].x);
        my.add(w[i] * u * nodes[i].y);
        mz.add(w[i] * u * nodes[i].z);
    }
    return {mx.value(), my.value(), mz.value()};
}

struct RecenterResult {
    Vec3 shift{};            // the recentering translation a(K)
    Vec3 residual_moment{};  // Phi(a) at the returned shift
    int iterations = 0;
    double hausdorff_to_ball = 0.0;  // d_H(K, B) gate value
    double bound_ratio = 0.0;        // |a(K)| / d_H(K, B), 0 for the ball itself
    double max_step_ratio = 0.0;     // largest observed contraction ratio
};

inline RecenterResult recenter(const ConvexBody& body, const SphereGrid& grid, double tol = 1e-10,
                               int max_iterations = 200) {
    if (!(tol > 0.0)) throw std::invalid_argument("recenter: tolerance must be positive");
    RecenterResult res;
    res.hausdorff_to_ball = hausdorff_to_shifted_ball(body, grid, {0.0, 0.0, 0.0});
    if (res.hausdorff_to_ball >= kRecenterMaxHausdorff)
        throw std::domain_error("recenter: body is not within the near-ball regime d_H < 1/4");

    const double damping = 3.0 / (4.0 * std::numbers::pi);
    Vec3 a{};
    Vec3 phi = phi_map(body, grid, a);
    double prev_step = 0.0;
    ++res.iterations;
    while (norm(phi) > tol) {
        if (res.iterations >= max_iterations)
            throw std::runtime_error("recenter: no convergence within the iteration budget");
        a += damping * phi;
        phi = phi_map(body, grid, a);
        ++res.iterations;
        const double step = damping * norm(phi);
        if (prev_step > 0.0) res.max_step_ratio = std::max(res.max_step_ratio, step / prev_step);
        prev_step = step;
    }
    res.shift = a;
    res.residual_moment = phi;
    res.bound_ratio = res.hausdorff_to_ball > 0.0 ? norm(a) / res.hausdorff_to_ball : 0.0;
    return res;
}

}  // namespace isoq
