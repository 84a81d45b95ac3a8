#ifndef BSHEAT_FIELD_HPP
#define BSHEAT_FIELD_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "bsheat/errors.hpp"
#include "bsheat/grid.hpp"

namespace bsheat {

// Discrete space-time field: n_t slices of n_x spatial values, slice n at
// time t_n. Stored row-major by time slice.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    explicit SpaceTimeField(const Grid& g)
        : grid_(g), values_(static_cast<std::size_t>(g.n_t) * g.n_x, 0.0) {}

    const Grid& grid() const { return grid_; }

    std::span<double> slice(int n) {
        return {values_.data() + static_cast<std::size_t>(n) * grid_.n_x,
                static_cast<std::size_t>(grid_.n_x)};
    }
    std::span<const double> slice(int n) const {
        return {values_.data() + static_cast<std::size_t>(n) * grid_.n_x,
                static_cast<std::size_t>(grid_.n_x)};
    }

    double& at(int n, int j) { return values_[static_cast<std::size_t>(n) * grid_.n_x + j]; }
    double at(int n, int j) const { return values_[static_cast<std::size_t>(n) * grid_.n_x + j]; }

    const std::vector<double>& raw() const { return values_; }
    std::vector<double>& raw() { return values_; }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

// Discrete L^p norm of one spatial slice: (h * sum |u_j|^p)^(1/p).
// Uniform Riemann weights keep the discrete Young inequality exact, which
// the convolution and Duhamel estimates rely on. Evaluated in max-scaled
// form so large p does not underflow.
inline double lp_norm(std::span<const double> u, double p, const Grid& g) {
    if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1");
    if (u.size() != static_cast<std::size_t>(g.n_x))
        throw DomainError("lp_norm: slice length does not match grid");
    double peak = 0.0;
    for (double v : u) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return 0.0;
    double acc = 0.0;
    for (double v : u) acc += std::pow(std::abs(v) / peak, p);
    return peak * std::pow(g.h() * acc, 1.0 / p);
}

// sup over time slices of the slice L^p norm.
inline double sup_t_lp_norm(const SpaceTimeField& u, double p) {
    double best = 0.0;
    for (int n = 0; n < u.grid().n_t; ++n)
        best = std::max(best, lp_norm(u.slice(n), p, u.grid()));
    return best;
}

// Pointwise distance helpers used by the fixed-point loop.
inline double sup_t_lp_distance(const SpaceTimeField& a, const SpaceTimeField& b, double p) {
    const Grid& g = a.grid();
    if (b.grid().n_t != g.n_t || b.grid().n_x != g.n_x)
        throw DomainError("sup_t_lp_distance: field shapes differ");
    std::vector<double> diff(static_cast<std::size_t>(g.n_x));
    double best = 0.0;
    for (int n = 0; n < g.n_t; ++n) {
        auto as = a.slice(n);
        auto bs = b.slice(n);
        for (int j = 0; j < g.n_x; ++j) diff[j] = as[j] - bs[j];
        best = std::max(best, lp_norm(diff, p, g));
    }
    return best;
}

} // namespace bsheat

#endif
