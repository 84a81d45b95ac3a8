#ifndef BSHEAT_CONVOLUTION_HPP
#define BSHEAT_CONVOLUTION_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "bsheat/errors.hpp"
#include "bsheat/fft.hpp"
#include "bsheat/field.hpp"
#include "bsheat/grid.hpp"
#include "bsheat/kernel.hpp"

// Discrete convolution with the sampled heat kernel (or its derivative):
//   (K * u)_j = h * sum_i K((j - i) h) u_i,   zero-padded outside the window.
// Zero padding gives a genuine linear convolution; periodic wrap-around would
// let mass re-enter through the opposite edge.
//
// The Gaussian kernel is sampled pointwise and renormalized to unit discrete
// mass, so the discrete Young inequality ||K * u||_p <= ||u||_p holds exactly.
// The FFT route is used for wide grids and is cross-checked against the
// direct summation route in the tests.

namespace bsheat {

enum class KernelKind { Gaussian, GaussianDx };

// Below this width the O(n^2) direct sum is cheaper than three FFTs.
inline constexpr int fft_threshold_nx = 256;

inline void require_resolved(double tau, double h) {
    if (std::sqrt(2.0 * tau) < 2.0 * h)
        throw ResolutionError(
            "kernel at dt unresolved by grid: sqrt(2*dt) < 2h; increase n_x or decrease n_t",
            tau, h);
}

// Kernel samples at offsets k*h for k in [-(n_x-1), n_x-1], index k + n_x - 1.
inline std::vector<double> sample_kernel(KernelKind kind, double tau, const Grid& g) {
    if (!(tau > 0.0)) throw DomainError("sample_kernel: tau must be > 0");
    require_resolved(tau, g.h());
    const int m = g.n_x - 1;
    const double h = g.h();
    std::vector<double> k(2 * static_cast<std::size_t>(m) + 1);
    for (int i = -m; i <= m; ++i)
        k[i + m] = (kind == KernelKind::Gaussian) ? heat_kernel(i * h, tau)
                                                  : heat_kernel_dx(i * h, tau);
    if (kind == KernelKind::Gaussian) {
        double mass = 0.0;
        for (double v : k) mass += v;
        mass *= h;
        for (double& v : k) v /= mass;
    }
    return k;
}

inline double kernel_discrete_l1(KernelKind kind, double tau, const Grid& g) {
    const auto k = sample_kernel(kind, tau, g);
    double acc = 0.0;
    for (double v : k) acc += std::abs(v);
    return acc * g.h();
}

namespace detail {

inline std::vector<double> convolve_direct(std::span<const double> u,
                                           const std::vector<double>& k, const Grid& g) {
    const int n = g.n_x;
    const int m = n - 1;
    const double h = g.h();
    std::vector<double> out(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += k[j - i + m] * u[i];
        out[j] = h * acc;
    }
    return out;
}

inline std::vector<double> convolve_fft(std::span<const double> u,
                                        const std::vector<double>& k, const Grid& g) {
    const int n = g.n_x;
    const int m = n - 1;
    const std::size_t n_fft = fft::next_pow2(static_cast<std::size_t>(3 * n - 2));
    fft::Plan plan(n_fft);
    std::vector<fft::cdouble> a(n_fft), b(n_fft);
    for (int i = 0; i < n; ++i) a[i] = u[i];
    for (std::size_t i = 0; i < k.size(); ++i) b[i] = k[i];
    plan.forward(a);
    plan.forward(b);
    for (std::size_t i = 0; i < n_fft; ++i) a[i] *= b[i];
    plan.inverse(a);
    std::vector<double> out(n);
    const double h = g.h();
    for (int j = 0; j < n; ++j) out[j] = h * a[j + m].real();
    return out;
}

} // namespace detail

// One-shot convolution of a slice with the kernel at time increment dt_step.
inline std::vector<double> convolve_kernel(std::span<const double> u, double dt_step,
                                           const Grid& g) {
    if (u.size() != static_cast<std::size_t>(g.n_x))
        throw DomainError("convolve_kernel: slice length does not match grid");
    const auto k = sample_kernel(KernelKind::Gaussian, dt_step, g);
    return g.n_x >= fft_threshold_nx ? detail::convolve_fft(u, k, g)
                                     : detail::convolve_direct(u, k, g);
}

// Same with the kernel spatial derivative (used by the flux/drift route).
inline std::vector<double> convolve_kernel_dx(std::span<const double> u, double dt_step,
                                              const Grid& g) {
    if (u.size() != static_cast<std::size_t>(g.n_x))
        throw DomainError("convolve_kernel_dx: slice length does not match grid");
    const auto k = sample_kernel(KernelKind::GaussianDx, dt_step, g);
    return g.n_x >= fft_threshold_nx ? detail::convolve_fft(u, k, g)
                                     : detail::convolve_direct(u, k, g);
}

// Second-order centered difference, one-sided at the window edges. This is
// the tau -> 0 limit of convolve_kernel_dx on resolved data.
inline std::vector<double> centered_dx(std::span<const double> u, const Grid& g) {
    const int n = g.n_x;
    const double h = g.h();
    std::vector<double> out(n, 0.0);
    if (n < 3) return out;
    out[0] = (u[1] - u[0]) / h;
    for (int j = 1; j + 1 < n; ++j) out[j] = (u[j + 1] - u[j - 1]) / (2.0 * h);
    out[n - 1] = (u[n - 1] - u[n - 2]) / h;
    return out;
}

} // namespace bsheat

#endif
