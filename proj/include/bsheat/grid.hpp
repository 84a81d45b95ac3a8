#ifndef BSHEAT_GRID_HPP
#define BSHEAT_GRID_HPP

#include <cmath>

#include "bsheat/errors.hpp"
#include "bsheat/kernel.hpp"

namespace bsheat {

// Inverse complementary error function by bisection. erfc is strictly
// decreasing on [0, inf); 200 halvings of [0, 40] pin the root to far below
// double precision. Only used for window sizing, so speed is irrelevant.
inline double erfc_inv(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("erfc_inv: argument must be in (0,1)");
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::erfc(mid) > eps) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Uniform space-time grid on [x_min, x_max] x [0, t_horizon].
// Spatial nodes x_j = x_min + j*h, h = (x_max - x_min)/(n_x - 1).
// Time slices t_n = n*dt, dt = t_horizon/(n_t - 1), so slice 0 is the data
// and slice n_t - 1 sits at the horizon.
struct Grid {
    double x_min = -8.0;
    double x_max = 8.0;
    int n_x = 257;
    double t_horizon = 0.25;
    int n_t = 33;
    double tail_epsilon = 1e-10;

    double h() const { return (x_max - x_min) / (n_x - 1); }
    double dt() const { return t_horizon / (n_t - 1); }
    double x(int j) const { return x_min + j * h(); }
    double t(int n) const { return n * dt(); }

    // Half-width W such that the kernel mass outside [-W, W] is eps:
    // erfc(W/(2*sqrt(t))) = eps.
    static double tail_half_width(double eps, double t) {
        if (!(t > 0.0)) throw DomainError("tail_half_width: t must be > 0");
        return 2.0 * std::sqrt(t) * erfc_inv(eps);
    }

    // Width of the boundary layer excluded from reported results.
    double boundary_layer() const { return 6.0 * std::sqrt(2.0 * t_horizon); }

    struct TrustInterior {
        double lo, hi; // x-range
        int j_lo, j_hi; // inclusive index range
    };

    // Sub-window whose values are unaffected by window truncation up to
    // tail_epsilon effects: everything further than the boundary layer from
    // either edge.
    TrustInterior trust_interior() const {
        const double w = boundary_layer();
        TrustInterior ti;
        ti.lo = x_min + w;
        ti.hi = x_max - w;
        ti.j_lo = static_cast<int>(std::ceil((ti.lo - x_min) / h() - 1e-12));
        ti.j_hi = static_cast<int>(std::floor((ti.hi - x_min) / h() + 1e-12));
        if (ti.j_lo > ti.j_hi)
            throw DomainError("trust interior is empty: window too narrow for t_horizon");
        return ti;
    }

    void validate() const {
        if (n_x < 2) throw DomainError("grid: n_x must be >= 2");
        if (n_t < 2) throw DomainError("grid: n_t must be >= 2");
        if (!(x_max > x_min)) throw DomainError("grid: x_max must exceed x_min");
        if (!(t_horizon > 0.0)) throw DomainError("grid: t_horizon must be > 0");
        if (!(tail_epsilon > 0.0 && tail_epsilon < 1.0))
            throw DomainError("grid: tail_epsilon must be in (0,1)");
        const double need = 2.0 * tail_half_width(tail_epsilon, t_horizon);
        if (x_max - x_min < need)
            throw DomainError("grid: window narrower than twice the kernel tail half-width");
    }
};

} // namespace bsheat

#endif
