// Derivative-free minimization of the quotient over parametric convex
// families: the one- and two-parameter spheroid families and truncated zonal
// harmonic perturbations of the sphere. Every candidate is volume-normalized
// by uniform scaling before evaluation; convexity failures are handled by a
// rejection penalty, never reported as feasible.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "isoq/body.hpp"
#include "isoq/functionals.hpp"
#include "isoq/gap_analysis.hpp"
#include "isoq/harmonics.hpp"

namespace isoq {

struct NelderMeadOptions {
    double simplex_tol = 1e-8;  // terminate when the simplex diameter drops below this
    int max_evaluations = 2000;
    double initial_step = 0.25;
    // Standard reflection / expansion / contraction / shrink coefficients.
    double alpha = 1.0;
    double gamma = 2.0;
    double rho = 0.5;
    double sigma = 0.5;
};

struct TracePoint {
    int evaluation = 0;
    double best_value = 0.0;
};

struct NelderMeadResult {
    std::vector<double> best_point;
    double best_value = 0.0;
    int evaluations = 0;
    bool converged = false;
    std::vector<TracePoint> trace;
};

// Textbook simplex method. Deterministic: ties in the vertex ordering are
// broken by insertion order, and no randomness enters anywhere.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& start,
                                    const NelderMeadOptions& opt = {}) {
    const std::size_t n = start.size();
    if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");

    NelderMeadResult res;
    res.evaluations = 0;
    const auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = f(x);
        if (res.trace.empty() || v < res.trace.back().best_value)
            res.trace.push_back({res.evaluations, v});
        return v;
    };

    const double f0 = eval(start);
    if (!std::isfinite(f0))
        throw std::invalid_argument("nelder_mead: objective not finite at the start point");

    std::vector<std::vector<double>> x(n + 1, start);
    std::vector<double> fx(n + 1);
    fx[0] = f0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i + 1][i] += opt.initial_step;
        fx[i + 1] = eval(x[i + 1]);
    }
    std::vector<std::size_t> idx(n + 1);

    const auto simplex_diameter = [&]() {
        double d = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = i + 1; j <= n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k)
                    s += (x[i][k] - x[j][k]) * (x[i][k] - x[j][k]);
                d = std::max(d, std::sqrt(s));
            }
        return d;
    };

    while (res.evaluations < opt.max_evaluations) {
        for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        {
            std::vector<std::vector<double>> xs(n + 1);
            std::vector<double> fs(n + 1);
            for (std::size_t i = 0; i <= n; ++i) {
                xs[i] = x[idx[i]];
                fs[i] = fx[idx[i]];
            }
            x.swap(xs);
            fx.swap(fs);
        }
        if (simplex_diameter() < opt.simplex_tol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += x[i][k] / n;

        const auto point_along = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (centroid[k] - x[n][k]);
            return p;
        };

        const auto xr = point_along(opt.alpha);
        const double fr = eval(xr);
        if (fr < fx[0]) {
            const auto xe = point_along(opt.alpha * opt.gamma);
            const double fe = eval(xe);
            if (fe < fr) {
                x[n] = xe;
                fx[n] = fe;
            } else {
                x[n] = xr;
                fx[n] = fr;
            }
        } else if (fr < fx[n - 1]) {
            x[n] = xr;
            fx[n] = fr;
        } else {
            const bool outside = fr < fx[n];
            const auto xc = outside ? point_along(opt.alpha * opt.rho) : point_along(-opt.rho);
            const double fc = eval(xc);
            if (fc < (outside ? fr : fx[n])) {
                x[n] = xc;
                fx[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t k = 0; k < n; ++k)
                        x[i][k] = x[0][k] + opt.sigma * (x[i][k] - x[0][k]);
                    fx[i] = eval(x[i]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fx[i] < fx[best]) best = i;
    res.best_point = x[best];
    res.best_value = fx[best];
    return res;
}

enum class FamilyKind {
    SpheroidC,      // one parameter: polar semiaxis c, a = c^(-1/2)
    SpheroidAC,     // two parameters (a, c), rescaled to unit volume
    HarmonicZonal,  // zonal coefficients for degrees 2..L on top of the sphere
};

struct OptimizationProblem {
    FamilyKind kind = FamilyKind::SpheroidC;
    int max_degree = 4;  // harmonic families only
    std::vector<double> lower;
    std::vector<double> upper;
    double convexity_tol = 1e-6;
    int convexity_pairs = 1000;
    double lambda_tol = 1e-6;
    double penalty_scale = 1e6;
    std::uint64_t seed = 42;

    std::size_t dimension() const {
        switch (kind) {
            case FamilyKind::SpheroidC: return 1;
            case FamilyKind::SpheroidAC: return 2;
            case FamilyKind::HarmonicZonal: return static_cast<std::size_t>(max_degree - 1);
        }
        return 0;
    }
};

inline OptimizationProblem spheroid_c_problem(double c_lo, double c_hi) {
    OptimizationProblem p;
    p.kind = FamilyKind::SpheroidC;
    p.lower = {c_lo};
    p.upper = {c_hi};
    return p;
}

inline OptimizationProblem harmonic_zonal_problem(int max_degree, double coeff_bound) {
    if (max_degree < 2) throw std::invalid_argument("harmonic problem: max_degree >= 2 required");
    OptimizationProblem p;
    p.kind = FamilyKind::HarmonicZonal;
    p.max_degree = max_degree;
    p.lower.assign(max_degree - 1, -coeff_bound);
    p.upper.assign(max_degree - 1, coeff_bound);
    return p;
}

// Binds a problem to a grid and provides the penalized objective. The grid is
// shared because harmonic candidates are realized as sampled radial bodies.
class FamilyEvaluator {
public:
    FamilyEvaluator(OptimizationProblem problem, std::shared_ptr<const SphereGrid> grid)
        : problem_(std::move(problem)), grid_(std::move(grid)) {
        if (!grid_) throw std::invalid_argument("FamilyEvaluator: missing grid");
        if (problem_.lower.size() != problem_.dimension() ||
            problem_.upper.size() != problem_.dimension())
            throw std::invalid_argument("FamilyEvaluator: bounds do not match the dimension");
    }

    const OptimizationProblem& problem() const { return problem_; }
    const SphereGrid& grid() const { return *grid_; }

    // Volume-normalized body for an in-bounds parameter vector.
    ConvexBody realize(const std::vector<double>& x) const {
        switch (problem_.kind) {
            case FamilyKind::SpheroidC: {
                const double c = x.at(0);
                if (!(c > 0.0)) throw std::domain_error("realize: c must be positive");
                return ConvexBody{Spheroid{1.0 / std::sqrt(c), c}};
            }
            case FamilyKind::SpheroidAC: {
                const double a = x.at(0), c = x.at(1);
                if (!(a > 0.0 && c > 0.0))
                    throw std::domain_error("realize: semiaxes must be positive");
                const double s = std::cbrt(1.0 / (a * a * c));
                return ConvexBody{Spheroid{a * s, c * s}};
            }
            case FamilyKind::HarmonicZonal: {
                HarmonicSpectrum spec(problem_.max_degree, 0);
                for (int l = 2; l <= problem_.max_degree; ++l) spec.at(l, 0) = x.at(l - 2);
                auto u = synthesize(spec, *grid_);
                double min_r = 1e300;
                for (double& v : u) {
                    v += 1.0;
                    min_r = std::min(min_r, v);
                }
                if (!(min_r > 1e-3))
                    throw std::domain_error("realize: radial profile collapses to the origin");
                std::vector<double> cube(u.size());
                for (std::size_t i = 0; i < u.size(); ++i) cube[i] = u[i] * u[i] * u[i];
                const double vol = integrate(*grid_, cube) / 3.0;
                const double s = std::cbrt(kUnitBallVolume / vol);
                for (double& v : u) v *= s;
                return ConvexBody{SampledRadial{grid_, std::move(u), true}};
            }
        }
        throw std::logic_error("realize: unknown family");
    }

    std::string describe(const std::vector<double>& x) const {
        std::ostringstream os;
        os.precision(10);
        switch (problem_.kind) {
            case FamilyKind::SpheroidC:
                os << "spheroid a=" << 1.0 / std::sqrt(x.at(0)) << " c=" << x.at(0);
                break;
            case FamilyKind::SpheroidAC: {
                const double s = std::cbrt(1.0 / (x.at(0) * x.at(0) * x.at(1)));
                os << "spheroid a=" << x.at(0) * s << " c=" << x.at(1) * s;
                break;
            }
            case FamilyKind::HarmonicZonal: {
                os << "harmonic-zonal L=" << problem_.max_degree << " coeffs=";
                for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ";" : "") << x[i];
                break;
            }
        }
        return os.str();
    }

    // q_star with bound and convexity penalties. Finite everywhere except at
    // ball-adjacent proposals, which take the +infinity convention.
    double objective(const std::vector<double>& x) const {
        double bound_excess = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < problem_.lower[i]) bound_excess += problem_.lower[i] - x[i];
            if (x[i] > problem_.upper[i]) bound_excess += x[i] - problem_.upper[i];
        }
        if (bound_excess > 0.0) return 1e12 * (1.0 + bound_excess);

        std::optional<ConvexBody> body;
        try {
            body.emplace(realize(x));
        } catch (const std::exception&) {
            return 1e12;  // infeasible proposal (e.g. radial profile collapse)
        }

        double penalty = 0.0;
        if (problem_.kind == FamilyKind::HarmonicZonal) {
            const auto cv = convexity_check(*grid_, radial_field(*body, *grid_),
                                            problem_.convexity_pairs, problem_.convexity_tol,
                                            problem_.seed);
            if (!cv.pass)
                penalty = problem_.penalty_scale *
                          std::max(0.0, -cv.worst_margin - problem_.convexity_tol);
        }

        const double d = deficit(*body, *grid_);
        const double p = surface_area(*body, *grid_);
        const double lam = lambda_star(*body, *grid_, problem_.lambda_tol).value;
        if (lam < 1e-3) return std::numeric_limits<double>::infinity();  // ball-adjacent
        return q_star_from_parts(d, p, lam) + penalty;
    }

private:
    OptimizationProblem problem_;
    std::shared_ptr<const SphereGrid> grid_;
};

struct OptimizationResult {
    std::vector<double> best_point;
    double best_value = 0.0;
    std::string body_description;
    FunctionalReport report;
    int evaluations = 0;
    bool converged = false;
    std::vector<TracePoint> trace;
};

// Best over deterministic restarts spread across the bounds; an explicit
// start point (the seed) is always included first and its objective value is
// an upper bound for the reported best.
inline OptimizationResult minimize_family(const FamilyEvaluator& eval, int restarts,
                                          const NelderMeadOptions& nm_options = {},
                                          const std::vector<double>* seed_start = nullptr) {
    const auto& prob = eval.problem();
    const std::size_t dim = prob.dimension();
    if (restarts < 1) throw std::invalid_argument("minimize_family: restarts >= 1 required");

    bool degenerate = true;
    for (std::size_t k = 0; k < dim; ++k)
        if (prob.upper[k] > prob.lower[k]) degenerate = false;

    const auto objective = [&](const std::vector<double>& x) { return eval.objective(x); };

    OptimizationResult out;
    out.best_value = std::numeric_limits<double>::infinity();

    if (degenerate) {
        out.best_point = prob.lower;
        out.best_value = objective(prob.lower);
        out.evaluations = 1;
        out.converged = true;
        out.trace.push_back({1, out.best_value});
    } else {
        std::vector<std::vector<double>> starts;
        if (seed_start) starts.push_back(*seed_start);
        for (int r = 0; r < restarts; ++r) {
            std::vector<double> s(dim);
            for (std::size_t k = 0; k < dim; ++k) {
                const double t = (r + 1.0) / (restarts + 1.0);
                s[k] = prob.lower[k] + t * (prob.upper[k] - prob.lower[k]);
            }
            starts.push_back(std::move(s));
        }
        for (auto& start : starts) {
            if (!std::isfinite(objective(start))) {
                // Ball-adjacent or infeasible start (e.g. the zero harmonic
                // vector): nudge deterministically into the family.
                for (std::size_t k = 0; k < dim; ++k)
                    start[k] += 0.1 * (prob.upper[k] - prob.lower[k]);
                ++out.evaluations;
            }
            NelderMeadOptions opt = nm_options;
            const auto r = nelder_mead(objective, start, opt);
            out.evaluations += r.evaluations;
            if (r.best_value < out.best_value) {
                out.best_value = r.best_value;
                out.best_point = r.best_point;
                out.converged = r.converged;
                out.trace = r.trace;
            }
        }
    }

    if (out.best_value >= 1e6)
        throw std::runtime_error(
            "minimize_family: every candidate was rejected (convexity tolerance too tight?)");

    out.body_description = eval.describe(out.best_point);
    out.report = evaluate_report(eval.realize(out.best_point), eval.grid(),
                                 out.body_description, prob.lambda_tol);
    if ((prob.kind == FamilyKind::SpheroidC || prob.kind == FamilyKind::SpheroidAC) &&
        !(out.best_value < kGapThreshold))
        throw std::runtime_error(
            "minimize_family: spheroid family failed to reach below the 16 pi^3 gap");
    return out;
}

// Deterministic tabulation of the family over explicit parameter points.
inline std::vector<FunctionalReport> sweep(const FamilyEvaluator& eval,
                                           const std::vector<std::vector<double>>& points) {
    std::vector<FunctionalReport> out;
    out.reserve(points.size());
    for (const auto& x : points) {
        const ConvexBody body = eval.realize(x);
        out.push_back(evaluate_report(body, eval.grid(), eval.describe(x),
                                      eval.problem().lambda_tol));
    }
    return out;
}

// Zonal harmonic seed extracted from a body's radial perturbation: the
// degrees 2..L of its spectrum, clamped into the problem's bounds.
inline std::vector<double> zonal_seed_from_body(const ConvexBody& body, const SphereGrid& grid,
                                                const OptimizationProblem& problem) {
    if (problem.kind != FamilyKind::HarmonicZonal)
        throw std::invalid_argument("zonal_seed_from_body: harmonic problems only");
    const RadialField f = radial_field(body, grid);
    const HarmonicSpectrum spec = analyze(grid, f.u, std::min(grid.band_limit(), 16));
    std::vector<double> x(problem.dimension());
    for (int l = 2; l <= problem.max_degree; ++l)
        x[l - 2] = std::clamp(spec(l, 0), problem.lower[l - 2], problem.upper[l - 2]);
    return x;
}

}  // namespace isoq
