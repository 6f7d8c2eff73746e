// Real orthonormal spherical harmonics on a tensor quadrature grid.
//
// Convention: Y_{l,0} = Q_{l,0}(theta), Y_{l,m} = sqrt(2) Q_{l,m}(theta) cos(m phi)
// and Y_{l,-m} = sqrt(2) Q_{l,m}(theta) sin(m phi) for m > 0, where Q_{l,m} is the
// orthonormalized associated Legendre function. Then integral(Y^2) = 1, Parseval
// holds coefficient-by-coefficient, and the Dirichlet energy is sum l(l+1) c^2.
//
// Transforms are direct quadrature projections, done in two separable stages
// (phi sums first, then theta sums), which keeps a full analysis at the default
// 128x256 grid in the few-millisecond range without any FFT machinery.
#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "isoq/sphere_grid.hpp"

namespace isoq {

namespace detail {

// One theta-row of normalized associated Legendre values Q_{l,m}(theta) for a
// fixed m, l = m..L, via the standard stable three-term ladder.
// Also fills d/dtheta values when dq is non-null. Valid away from the poles,
// which the Gauss-Legendre grid never touches.
inline void legendre_row(int L, int m, double cos_t, double sin_t, double* q, double* dq) {
    // Q_{m,m}
    double qmm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
    for (int k = 1; k <= m; ++k) qmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * sin_t;
    q[0] = qmm;
    if (m + 1 <= L) q[1] = std::sqrt(2.0 * m + 3.0) * cos_t * qmm;
    for (int l = m + 2; l <= L; ++l) {
        const double a = std::sqrt(((2.0 * l + 1.0) * (2.0 * l - 1.0)) /
                                   (static_cast<double>(l - m) * (l + m)));
        const double b = std::sqrt(((2.0 * l + 1.0) * (l - 1.0 - m) * (l - 1.0 + m)) /
                                   ((2.0 * l - 3.0) * (l - m) * (l + m)));
        q[l - m] = a * cos_t * q[l - m - 1] - b * q[l - m - 2];
    }
    if (dq == nullptr) return;
    // d/dtheta Q_{l,m} = (l cos_t Q_{l,m} - e_{l,m} Q_{l-1,m}) / sin_t with
    // e_{l,m} = sqrt((2l+1)(l-m)(l+m)/(2l-1)).
    dq[0] = m * cos_t / sin_t * q[0];
    for (int l = m + 1; l <= L; ++l) {
        const double e = std::sqrt((2.0 * l + 1.0) * (l - m) * (l + m) / (2.0 * l - 1.0));
        dq[l - m] = (l * cos_t * q[l - m] - e * q[l - m - 1]) / sin_t;
    }
}

}  // namespace detail

// Coefficients c_{l,m} for 0 <= l <= L, |m| <= min(l, m_max). The longitudinal
// order is capped by the grid's phi resolution; fields analyzed here are
// band-limited in both indices. Storage is banded so that very fine zonal
// grids (large L, tiny m_max) stay small.
class HarmonicSpectrum {
public:
    HarmonicSpectrum(int L, int m_max) : L_(L), m_max_(m_max) {
        if (L < 0 || m_max < 0) throw std::invalid_argument("HarmonicSpectrum: bad shape");
        offsets_.resize(L + 2, 0);
        for (int l = 0; l <= L; ++l) offsets_[l + 1] = offsets_[l] + 2 * band(l) + 1;
        c_.assign(offsets_[L + 1], 0.0);
    }

    int max_degree() const { return L_; }
    int max_order() const { return m_max_; }
    int band(int l) const { return std::min(l, m_max_); }

    double operator()(int l, int m) const {
        if (l < 0 || l > L_ || std::abs(m) > l) return 0.0;
        if (std::abs(m) > m_max_) return 0.0;
        return c_[offsets_[l] + band(l) + m];
    }
    double& at(int l, int m) { return c_[offsets_[l] + band(l) + m]; }

    double parseval() const {
        KahanSum s;
        for (double v : c_) s.add(v * v);
        return s.value();
    }

    double degree_energy(int l) const {
        double s = 0.0;
        for (int m = -band(l); m <= band(l); ++m) s += (*this)(l, m) * (*this)(l, m);
        return s;
    }

    double dirichlet_energy() const {
        KahanSum s;
        for (int l = 0; l <= L_; ++l) s.add(l * (l + 1.0) * degree_energy(l));
        return s.value();
    }

private:
    int L_;
    int m_max_;
    std::vector<std::size_t> offsets_;
    std::vector<double> c_;
};

// Projection by quadrature: c_{l,m} = integrate(u * Y_{l,m}).
inline HarmonicSpectrum analyze(const SphereGrid& grid, const std::vector<double>& u, int L) {
    if (u.size() != grid.size())
        throw std::invalid_argument("analyze: one value per grid node required");
    if (L > grid.band_limit())
        throw std::invalid_argument("analyze: degree exceeds the grid band limit");
    const int m_max = std::min(L, grid.order_limit());
    HarmonicSpectrum spec(L, m_max);

    const int nt = grid.n_theta(), np = grid.n_phi();
    const auto& cp = grid.cos_phi();
    const auto& sp = grid.sin_phi();
    // Stage 1: phi sums per ring. cos(m phi_j) = table[(m*j) mod n_phi].
    std::vector<double> ca((m_max + 1) * nt, 0.0), sa((m_max + 1) * nt, 0.0);
    for (int i = 0; i < nt; ++i) {
        for (int m = 0; m <= m_max; ++m) {
            double acc_c = 0.0, acc_s = 0.0;
            std::size_t k = 0;
            for (int j = 0; j < np; ++j) {
                const double v = u[grid.index(i, j)];
                acc_c += v * cp[k];
                acc_s += v * sp[k];
                k += m;
                if (k >= static_cast<std::size_t>(np)) k -= np;
            }
            ca[m * nt + i] = acc_c;
            sa[m * nt + i] = acc_s;
        }
    }
    // Stage 2: theta quadrature against Q_{l,m}.
    const double sqrt2 = std::numbers::sqrt2;
    std::vector<double> q(L + 1);
    std::vector<KahanSum> acc(spec.max_degree() >= 0 ? (std::size_t(L) + 1) * (m_max + 1) * 2 : 0);
    for (int i = 0; i < nt; ++i) {
        const double w = grid.theta_weights()[i] * grid.phi_weight();
        for (int m = 0; m <= m_max; ++m) {
            detail::legendre_row(L, m, grid.cos_theta()[i], grid.sin_theta()[i], q.data(),
                                 nullptr);
            const double wc = w * ca[m * nt + i];
            const double ws = w * sa[m * nt + i];
            for (int l = m; l <= L; ++l) {
                const std::size_t base = (std::size_t(l) * (m_max + 1) + m) * 2;
                if (m == 0) {
                    acc[base].add(q[l - m] * wc);
                } else {
                    acc[base].add(sqrt2 * q[l - m] * wc);
                    acc[base + 1].add(sqrt2 * q[l - m] * ws);
                }
            }
        }
    }
    for (int l = 0; l <= L; ++l)
        for (int m = 0; m <= std::min(l, m_max); ++m) {
            const std::size_t base = (std::size_t(l) * (m_max + 1) + m) * 2;
            spec.at(l, m) = acc[base].value();
            if (m > 0) spec.at(l, -m) = acc[base + 1].value();
        }
    return spec;
}

// Pointwise sum of the series on the grid; inverse of analyze for band-limited u.
inline std::vector<double> synthesize(const HarmonicSpectrum& spec, const SphereGrid& grid) {
    const int L = spec.max_degree();
    if (L > grid.band_limit())
        throw std::invalid_argument("synthesize: spectrum degree exceeds the grid band limit");
    const int m_max = spec.max_order();
    const int nt = grid.n_theta(), np = grid.n_phi();
    const double sqrt2 = std::numbers::sqrt2;
    std::vector<double> out(grid.size(), 0.0);
    std::vector<double> q(L + 1);
    const auto& cp = grid.cos_phi();
    const auto& sp = grid.sin_phi();
    for (int i = 0; i < nt; ++i) {
        // Stage 1: collapse degrees at this ring.
        std::vector<double> gc(m_max + 1, 0.0), gs(m_max + 1, 0.0);
        for (int m = 0; m <= m_max; ++m) {
            detail::legendre_row(L, m, grid.cos_theta()[i], grid.sin_theta()[i], q.data(),
                                 nullptr);
            double acc_c = 0.0, acc_s = 0.0;
            for (int l = m; l <= L; ++l) {
                acc_c += spec(l, m) * q[l - m];
                if (m > 0) acc_s += spec(l, -m) * q[l - m];
            }
            gc[m] = (m == 0) ? acc_c : sqrt2 * acc_c;
            gs[m] = (m == 0) ? 0.0 : sqrt2 * acc_s;
        }
        // Stage 2: phi synthesis.
        for (int j = 0; j < np; ++j) {
            double v = gc[0];
            std::size_t k = 0;
            for (int m = 1; m <= m_max; ++m) {
                k += j;
                if (k >= static_cast<std::size_t>(np)) k %= np;
                v += gc[m] * cp[k] + gs[m] * sp[k];
            }
            out[grid.index(i, j)] = v;
        }
    }
    return out;
}

// Series evaluation at one arbitrary direction (used for off-grid probes).
// m_limit < 0 means all stored orders.
inline double synthesize_at(const HarmonicSpectrum& spec, Vec3 omega, int m_limit = -1) {
    const int L = spec.max_degree();
    const int m_max = m_limit < 0 ? spec.max_order() : std::min(m_limit, spec.max_order());
    const double cos_t = std::clamp(omega.z, -1.0, 1.0);
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = std::atan2(omega.y, omega.x);
    const double sqrt2 = std::numbers::sqrt2;
    std::vector<double> q(L + 1);
    double v = 0.0;
    for (int m = 0; m <= m_max; ++m) {
        if (sin_t == 0.0 && m > 0) break;  // poles carry only m = 0 content
        detail::legendre_row(L, m, cos_t, sin_t, q.data(), nullptr);
        double acc_c = 0.0, acc_s = 0.0;
        for (int l = m; l <= L; ++l) {
            acc_c += spec(l, m) * q[l - m];
            if (m > 0) acc_s += spec(l, -m) * q[l - m];
        }
        if (m == 0)
            v += acc_c;
        else
            v += sqrt2 * (acc_c * std::cos(m * phi) + acc_s * std::sin(m * phi));
    }
    return v;
}

// Spectral quadratic form sum (l(l+1) - 2) c_{l,m}^2. Degree one is its kernel;
// degree two contributes with factor 4.
inline double quadratic_form_Q2(const HarmonicSpectrum& spec) {
    KahanSum s;
    for (int l = 0; l <= spec.max_degree(); ++l)
        s.add((l * (l + 1.0) - 2.0) * spec.degree_energy(l));
    return s.value();
}

// Zero out the mean and the three translation modes, leave the rest untouched.
inline HarmonicSpectrum project_out_low_modes(const HarmonicSpectrum& spec) {
    HarmonicSpectrum out = spec;
    out.at(0, 0) = 0.0;
    if (spec.max_degree() >= 1) {
        out.at(1, 0) = 0.0;
        if (spec.max_order() >= 1) {
            out.at(1, 1) = 0.0;
            out.at(1, -1) = 0.0;
        }
    }
    return out;
}

// Tangential gradient of a grid function, by synthesis of the analyzed
// spectrum at the grid band limit. Components are (d_theta, d_phi / sin(theta)).
struct SurfaceGradient {
    std::vector<double> d_theta;
    std::vector<double> d_phi_over_sin;
    std::vector<double> norm_sq;
    // Set when more than 10% of the field energy sits in the top 10% of
    // degrees, i.e. the signal is not resolvable at the band limit.
    bool band_limit_warning = false;
};

inline SurfaceGradient surface_gradient(const SphereGrid& grid, const std::vector<double>& u) {
    const int L = grid.band_limit();
    const HarmonicSpectrum spec = analyze(grid, u, L);

    SurfaceGradient g;
    g.d_theta.assign(grid.size(), 0.0);
    g.d_phi_over_sin.assign(grid.size(), 0.0);
    g.norm_sq.assign(grid.size(), 0.0);

    double total = 0.0, top = 0.0;
    const int top_start = L - L / 10;
    for (int l = 0; l <= L; ++l) {
        const double e = spec.degree_energy(l);
        total += e;
        if (l >= top_start) top += e;
    }
    g.band_limit_warning = (total > 0.0) && (top > 0.1 * total);

    const int m_max = spec.max_order();
    const int nt = grid.n_theta(), np = grid.n_phi();
    const double sqrt2 = std::numbers::sqrt2;
    std::vector<double> q(L + 1), dq(L + 1);
    const auto& cp = grid.cos_phi();
    const auto& sp = grid.sin_phi();
    for (int i = 0; i < nt; ++i) {
        const double inv_sin = 1.0 / grid.sin_theta()[i];
        std::vector<double> tc(m_max + 1, 0.0), ts(m_max + 1, 0.0);  // d_theta parts
        std::vector<double> pc(m_max + 1, 0.0), ps(m_max + 1, 0.0);  // Q sums for d_phi
        for (int m = 0; m <= m_max; ++m) {
            detail::legendre_row(L, m, grid.cos_theta()[i], grid.sin_theta()[i], q.data(),
                                 dq.data());
            double acc_c = 0.0, acc_s = 0.0, qc = 0.0, qs = 0.0;
            for (int l = m; l <= L; ++l) {
                acc_c += spec(l, m) * dq[l - m];
                qc += spec(l, m) * q[l - m];
                if (m > 0) {
                    acc_s += spec(l, -m) * dq[l - m];
                    qs += spec(l, -m) * q[l - m];
                }
            }
            const double scale = (m == 0) ? 1.0 : sqrt2;
            tc[m] = scale * acc_c;
            ts[m] = scale * acc_s;
            pc[m] = scale * qc;
            ps[m] = scale * qs;
        }
        for (int j = 0; j < np; ++j) {
            double dt = tc[0];
            double dp = 0.0;
            std::size_t k = 0;
            for (int m = 1; m <= m_max; ++m) {
                k += j;
                if (k >= static_cast<std::size_t>(np)) k %= np;
                dt += tc[m] * cp[k] + ts[m] * sp[k];
                dp += m * (-pc[m] * sp[k] + ps[m] * cp[k]);
            }
            const std::size_t idx = grid.index(i, j);
            g.d_theta[idx] = dt;
            g.d_phi_over_sin[idx] = dp * inv_sin;
            g.norm_sq[idx] = dt * dt + g.d_phi_over_sin[idx] * g.d_phi_over_sin[idx];
        }
    }
    return g;
}

// Finite spectral-gap check for fields with no degree 0/1 content:
// Q2 >= 4 ||u||^2, with equality exactly when all energy sits at degree two.
struct SpectralGapResult {
    double q2;
    double l2_sq;
    double margin;
};

inline SpectralGapResult spectral_gap_check(const SphereGrid& grid, const std::vector<double>& u) {
    const HarmonicSpectrum spec = analyze(grid, u, grid.band_limit());
    const double l2 = std::sqrt(spec.parseval());
    const double low = std::sqrt(spec.degree_energy(0) + spec.degree_energy(1));
    if (low > 1e-6 * l2)
        throw std::invalid_argument(
            "spectral_gap_check: degree 0/1 contamination; recenter and remove the mean first");
    SpectralGapResult r;
    r.q2 = quadratic_form_Q2(spec);
    r.l2_sq = spec.parseval();
    r.margin = r.q2 - 4.0 * r.l2_sq;
    return r;
}

}  // namespace isoq
