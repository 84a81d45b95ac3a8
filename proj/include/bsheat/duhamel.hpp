#ifndef BSHEAT_DUHAMEL_HPP
#define BSHEAT_DUHAMEL_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bsheat/convolution.hpp"
#include "bsheat/errors.hpp"
#include "bsheat/field.hpp"
#include "bsheat/fft.hpp"
#include "bsheat/grid.hpp"
#include "bsheat/kernel.hpp"

// Discrete Duhamel integral
//   I(t_n) = int_0^{t_n} K(t_n - s) * G(s) ds
// in two forms:
//
// Plain form, K = Phi: trapezoid in s. The s = t_n endpoint is the identity
// (Phi(0+) * G -> G); sub-steps whose kernel the grid cannot resolve use the
// same identity substitution instead of producing garbage.
//
// Derivative form, K = Phi_x: the integrand carries an integrable
// (t_n - s)^(-1/2) singularity, so plain trapezoid is not used. Writing
// H(s) = sqrt(t_n - s) * (Phi_x(t_n - s) * G(s)), each sub-interval
// integrates the singular weight exactly against a piecewise-linear H.
// The final sub-step uses the tau -> 0 limit of the smoothed derivative,
// a centered difference of G(t_n); unresolved sub-steps fall back to the
// same limit.
//
// Both forms reduce to weighted sums of convolutions of time slices, so the
// engine caches kernel spectra per time offset and reuses them across calls.
// Accumulation order is fixed, giving bitwise-deterministic results.

namespace bsheat {

class DuhamelEngine {
public:
    explicit DuhamelEngine(const Grid& g)
        : g_(g), use_fft_(g.n_x >= fft_threshold_nx),
          n_fft_(fft::next_pow2(static_cast<std::size_t>(3 * g.n_x - 2))) {
        g_.validate();
        if (use_fft_) plan_.emplace(n_fft_);
    }

    const Grid& grid() const { return g_; }

    bool resolved(int j) const { return std::sqrt(2.0 * j * g_.dt()) >= 2.0 * g_.h(); }

    // Phi(t_n) * f for every slice; slice 0 is f itself.
    SpaceTimeField evolve_homogeneous(std::span<const double> f) {
        if (f.size() != static_cast<std::size_t>(g_.n_x))
            throw DomainError("evolve_homogeneous: data length does not match grid");
        SpaceTimeField out(g_);
        auto s0 = out.slice(0);
        std::copy(f.begin(), f.end(), s0.begin());
        if (use_fft_) {
            std::vector<fft::cdouble> fhat = forward_padded(f);
            std::vector<fft::cdouble> acc(n_fft_);
            for (int n = 1; n < g_.n_t; ++n) {
                if (!resolved(n)) {
                    auto sn = out.slice(n);
                    std::copy(f.begin(), f.end(), sn.begin());
                    continue;
                }
                const auto& khat = kernel_spectrum(KernelKind::Gaussian, n);
                for (std::size_t i = 0; i < n_fft_; ++i) acc[i] = khat[i] * fhat[i];
                extract(acc, out.slice(n));
            }
        } else {
            for (int n = 1; n < g_.n_t; ++n) {
                auto sn = out.slice(n);
                if (!resolved(n)) {
                    std::copy(f.begin(), f.end(), sn.begin());
                    continue;
                }
                auto conv = detail::convolve_direct(f, kernel_samples(KernelKind::Gaussian, n), g_);
                std::copy(conv.begin(), conv.end(), sn.begin());
            }
        }
        return out;
    }

    // Full-field Duhamel integral of the source field G.
    SpaceTimeField integrate(const SpaceTimeField& G, bool derivative_form) {
        check_shape(G);
        SpaceTimeField out(g_);
        if (use_fft_) {
            const auto ghat = forward_all(G);
            std::vector<fft::cdouble> acc(n_fft_);
            for (int n = 1; n < g_.n_t; ++n)
                accumulate_fft(G, ghat, n, derivative_form, acc, out.slice(n));
        } else {
            for (int n = 1; n < g_.n_t; ++n)
                accumulate_direct(G, n, derivative_form, out.slice(n));
        }
        return out;
    }

    // Single output slice I(t_{t_index}).
    std::vector<double> at_index(const SpaceTimeField& G, int t_index, bool derivative_form) {
        check_shape(G);
        if (t_index < 0 || t_index >= g_.n_t)
            throw DomainError("duhamel: time index out of range");
        std::vector<double> out(g_.n_x, 0.0);
        if (t_index == 0) return out;
        if (use_fft_) {
            const auto ghat = forward_all(G);
            std::vector<fft::cdouble> acc(n_fft_);
            accumulate_fft(G, ghat, t_index, derivative_form, acc, out);
        } else {
            accumulate_direct(G, t_index, derivative_form, out);
        }
        return out;
    }

    // Discrete counterparts of the continuum estimate constants on this grid:
    // largest over n of (sum of quadrature weights times operator L1 norms),
    // normalized by t_n (plain form) or by 2*sqrt(t_n/pi) (derivative form).
    // The contraction envelope multiplies by these so it stays a true upper
    // bound for the discrete operator, not just the continuum one.
    double plain_bound_multiplier() {
        double worst = 0.0;
        for (int n = 1; n < g_.n_t; ++n) {
            double c = 0.0;
            for (int m = 0; m <= n; ++m) c += plain_weight(n, m) * effective_l1(KernelKind::Gaussian, n - m);
            worst = std::max(worst, c / g_.t(n));
        }
        return worst;
    }

    double deriv_bound_multiplier() {
        double worst = 0.0;
        for (int n = 1; n < g_.n_t; ++n) {
            const auto w = deriv_weights(n);
            double c = 0.0;
            for (int m = 0; m < n; ++m) c += w[m] * effective_l1(KernelKind::GaussianDx, n - m);
            c += 0.5 * g_.dt() / g_.h(); // centered-difference endpoint
            worst = std::max(worst, c / kernel_dx_l1_time_integral(g_.t(n)));
        }
        return worst;
    }

private:
    void check_shape(const SpaceTimeField& G) const {
        if (G.grid().n_t != g_.n_t || G.grid().n_x != g_.n_x)
            throw DomainError("duhamel: field shape does not match engine grid");
    }

    double plain_weight(int n, int m) const {
        return (m == 0 || m == n) ? 0.5 * g_.dt() : g_.dt();
    }

    // Scalar weights on phi_m = Phi_x((n-m) dt) * G_m from exact integration
    // of the singular factor against piecewise-linear interpolation; the
    // final sub-interval is the trapezoid of the regularized integrand.
    std::vector<double> deriv_weights(int n) const {
        const double dt = g_.dt();
        std::vector<double> w(n, 0.0);
        for (int m = 0; m + 1 < n; ++m) {
            const double a = (n - m) * dt;
            const double b = (n - m - 1) * dt;
            const double i0 = 2.0 * (std::sqrt(a) - std::sqrt(b));
            const double i1 = (2.0 / 3.0) * (a * std::sqrt(a) - b * std::sqrt(b));
            const double p = (a * i0 - i1) / dt;
            w[m] += std::sqrt(a) * (i0 - p);
            w[m + 1] += std::sqrt(b) * p;
        }
        w[n - 1] += 0.5 * dt;
        return w;
    }

    double effective_l1(KernelKind kind, int j) {
        if (!resolved(j)) return kind == KernelKind::Gaussian ? 1.0 : 1.0 / g_.h();
        auto& cache = kind == KernelKind::Gaussian ? l1_gauss_ : l1_dx_;
        auto it = cache.find(j);
        if (it != cache.end()) return it->second;
        double v = kernel_discrete_l1(kind, j * g_.dt(), g_);
        cache.emplace(j, v);
        return v;
    }

    const std::vector<double>& kernel_samples(KernelKind kind, int j) {
        auto& cache = kind == KernelKind::Gaussian ? samples_gauss_ : samples_dx_;
        if (cache.size() < static_cast<std::size_t>(g_.n_t)) cache.resize(g_.n_t);
        auto& slot = cache[j];
        if (slot.empty()) slot = sample_kernel(kind, j * g_.dt(), g_);
        return slot;
    }

    const std::vector<fft::cdouble>& kernel_spectrum(KernelKind kind, int j) {
        auto& cache = kind == KernelKind::Gaussian ? spectra_gauss_ : spectra_dx_;
        if (cache.size() < static_cast<std::size_t>(g_.n_t)) cache.resize(g_.n_t);
        auto& slot = cache[j];
        if (slot.empty()) {
            const auto& k = kernel_samples(kind, j);
            slot.assign(n_fft_, fft::cdouble{});
            for (std::size_t i = 0; i < k.size(); ++i) slot[i] = k[i];
            plan_->forward(slot);
        }
        return slot;
    }

    std::vector<fft::cdouble> forward_padded(std::span<const double> u) const {
        std::vector<fft::cdouble> a(n_fft_);
        for (int i = 0; i < g_.n_x; ++i) a[i] = u[i];
        plan_->forward(a);
        return a;
    }

    std::vector<std::vector<fft::cdouble>> forward_all(const SpaceTimeField& G) const {
        std::vector<std::vector<fft::cdouble>> ghat(g_.n_t);
        for (int m = 0; m < g_.n_t; ++m) ghat[m] = forward_padded(G.slice(m));
        return ghat;
    }

    // Spectral extraction: out_j = h * ifft(acc)[j + n_x - 1].
    void extract(std::vector<fft::cdouble>& acc, std::span<double> out) const {
        plan_->inverse(acc);
        const int m = g_.n_x - 1;
        const double h = g_.h();
        for (int j = 0; j < g_.n_x; ++j) out[j] = h * acc[j + m].real();
    }

    void accumulate_fft(const SpaceTimeField& G,
                        const std::vector<std::vector<fft::cdouble>>& ghat, int n,
                        bool derivative_form, std::vector<fft::cdouble>& acc,
                        std::span<double> out) {
        std::fill(acc.begin(), acc.end(), fft::cdouble{});
        std::vector<double> real_terms(g_.n_x, 0.0); // identity / centered-diff parts
        if (!derivative_form) {
            for (int m = 0; m < n; ++m) {
                const double w = plain_weight(n, m);
                if (!resolved(n - m)) {
                    auto gm = G.slice(m);
                    for (int j = 0; j < g_.n_x; ++j) real_terms[j] += w * gm[j];
                    continue;
                }
                const auto& khat = kernel_spectrum(KernelKind::Gaussian, n - m);
                const auto& gm = ghat[m];
                for (std::size_t i = 0; i < n_fft_; ++i) acc[i] += w * (khat[i] * gm[i]);
            }
            auto gn = G.slice(n);
            const double w = plain_weight(n, n);
            for (int j = 0; j < g_.n_x; ++j) real_terms[j] += w * gn[j];
        } else {
            const auto w = deriv_weights(n);
            for (int m = 0; m < n; ++m) {
                if (!resolved(n - m)) {
                    const auto dxg = centered_dx(G.slice(m), g_);
                    for (int j = 0; j < g_.n_x; ++j) real_terms[j] += w[m] * dxg[j];
                    continue;
                }
                const auto& khat = kernel_spectrum(KernelKind::GaussianDx, n - m);
                const auto& gm = ghat[m];
                for (std::size_t i = 0; i < n_fft_; ++i) acc[i] += w[m] * (khat[i] * gm[i]);
            }
            const auto dxg = centered_dx(G.slice(n), g_);
            for (int j = 0; j < g_.n_x; ++j) real_terms[j] += 0.5 * g_.dt() * dxg[j];
        }
        extract(acc, out);
        for (int j = 0; j < g_.n_x; ++j) out[j] += real_terms[j];
    }

    void accumulate_direct(const SpaceTimeField& G, int n, bool derivative_form,
                           std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        if (!derivative_form) {
            for (int m = 0; m < n; ++m) {
                const double w = plain_weight(n, m);
                if (!resolved(n - m)) {
                    auto gm = G.slice(m);
                    for (int j = 0; j < g_.n_x; ++j) out[j] += w * gm[j];
                    continue;
                }
                const auto conv =
                    detail::convolve_direct(G.slice(m), kernel_samples(KernelKind::Gaussian, n - m), g_);
                for (int j = 0; j < g_.n_x; ++j) out[j] += w * conv[j];
            }
            auto gn = G.slice(n);
            for (int j = 0; j < g_.n_x; ++j) out[j] += plain_weight(n, n) * gn[j];
        } else {
            const auto w = deriv_weights(n);
            for (int m = 0; m < n; ++m) {
                std::vector<double> conv;
                if (!resolved(n - m))
                    conv = centered_dx(G.slice(m), g_);
                else
                    conv = detail::convolve_direct(G.slice(m),
                                                   kernel_samples(KernelKind::GaussianDx, n - m), g_);
                for (int j = 0; j < g_.n_x; ++j) out[j] += w[m] * conv[j];
            }
            const auto dxg = centered_dx(G.slice(n), g_);
            for (int j = 0; j < g_.n_x; ++j) out[j] += 0.5 * g_.dt() * dxg[j];
        }
    }

    Grid g_;
    bool use_fft_;
    std::size_t n_fft_;
    std::optional<fft::Plan> plan_;
    std::vector<std::vector<double>> samples_gauss_, samples_dx_;
    std::vector<std::vector<fft::cdouble>> spectra_gauss_, spectra_dx_;
    std::map<int, double> l1_gauss_, l1_dx_;
};

// One-shot variant of the Duhamel integral at a single output time.
inline std::vector<double> duhamel_source(const SpaceTimeField& G, int t_index,
                                          bool derivative_form) {
    DuhamelEngine engine(G.grid());
    return engine.at_index(G, t_index, derivative_form);
}

} // namespace bsheat

#endif
