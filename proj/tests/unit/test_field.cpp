#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "bsheat/convolution.hpp"
#include "bsheat/duhamel.hpp"
#include "bsheat/field.hpp"

using namespace bsheat;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Grid wide_grid(int n_x, double t_horizon = 0.25, int n_t = 21) {
    Grid g;
    g.x_min = -16.0;
    g.x_max = 16.0;
    g.n_x = n_x;
    g.t_horizon = t_horizon;
    g.n_t = n_t;
    return g;
}

std::vector<double> sample(const Grid& g, const std::function<double(double)>& f) {
    std::vector<double> u(g.n_x);
    for (int j = 0; j < g.n_x; ++j) u[j] = f(g.x(j));
    return u;
}

} // namespace

TEST_CASE("grid accessors and validation", "[field]") {
    Grid g = wide_grid(513);
    g.validate();
    REQUIRE_THAT(g.h(), WithinRel(32.0 / 512.0, 1e-15));
    REQUIRE_THAT(g.dt(), WithinRel(0.25 / 20.0, 1e-15));
    REQUIRE(g.x(0) == -16.0);
    REQUIRE(g.x(512) == 16.0);
    REQUIRE(g.t(0) == 0.0);
    REQUIRE_THAT(g.t(20), WithinRel(0.25, 1e-15));

    Grid bad = g;
    bad.n_x = 1;
    REQUIRE_THROWS_AS(bad.validate(), DomainError);
    bad = g;
    bad.x_max = bad.x_min;
    REQUIRE_THROWS_AS(bad.validate(), DomainError);
    bad = g;
    bad.t_horizon = 0.0;
    REQUIRE_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("Lp norm of a sampled Gaussian matches the closed form", "[field]") {
    // The kernel at t = 1 sampled on a wide fine window: the uniform Riemann
    // sum of a smooth rapidly decaying function converges spectrally, so the
    // discrete norm sits on the analytic value.
    const Grid g = wide_grid(2001);
    const auto u = sample(g, [](double x) { return heat_kernel(x, 1.0); });
    REQUIRE_THAT(lp_norm(u, 1.0, g), WithinRel(1.0, 1e-12));
    REQUIRE_THAT(lp_norm(u, 2.0, g), WithinRel(0.44662192086900121, 1e-12));
    const auto ux = sample(g, [](double x) { return heat_kernel_dx(x, 1.0); });
    // |K_x|^p is not smooth at the origin (kinked for p = 1, limited
    // regularity for p = 3), which caps the Riemann sum accuracy.
    REQUIRE_THAT(lp_norm(ux, 1.0, g), WithinRel(0.56418958354775628, 1e-4));
    REQUIRE_THAT(lp_norm(ux, 3.0, g), WithinRel(0.17086675175433616, 1e-8));
}

TEST_CASE("Lp norm basics", "[field]") {
    const Grid g = wide_grid(401);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> u(g.n_x), v(g.n_x);
    for (int j = 0; j < g.n_x; ++j) {
        u[j] = uni(rng);
        v[j] = uni(rng);
    }
    for (double p : {1.0, 2.0, 3.5}) {
        // Absolute homogeneity and the triangle inequality.
        std::vector<double> u3(u);
        for (auto& x : u3) x *= -3.0;
        REQUIRE_THAT(lp_norm(u3, p, g), WithinRel(3.0 * lp_norm(u, p, g), 1e-13));
        std::vector<double> w(u);
        for (int j = 0; j < g.n_x; ++j) w[j] += v[j];
        REQUIRE(lp_norm(w, p, g) <= lp_norm(u, p, g) + lp_norm(v, p, g) + 1e-13);
    }
    REQUIRE_THROWS_AS(lp_norm(u, 0.5, g), DomainError);
    std::vector<double> short_vec(3, 1.0);
    REQUIRE_THROWS_AS(lp_norm(short_vec, 2.0, g), DomainError);
}

TEST_CASE("convolution is bounded by the kernel L1 norm", "[field]") {
    const Grid g = wide_grid(401);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> u(g.n_x);
    for (auto& x : u) x = uni(rng);
    const double dt_step = 0.05;
    const auto ku = convolve_kernel(u, dt_step, g);
    for (double p : {1.0, 2.0, 4.0})
        REQUIRE(lp_norm(ku, p, g) <= lp_norm(u, p, g) * (1.0 + 1e-12));
}

TEST_CASE("convolving a constant preserves it away from the window edge", "[field]") {
    const Grid g = wide_grid(401);
    const std::vector<double> ones(g.n_x, 1.0);
    const auto ku = convolve_kernel(ones, 0.05, g);
    const auto kxu = convolve_kernel_dx(ones, 0.05, g);
    const auto ti = g.trust_interior();
    for (int j = ti.j_lo; j <= ti.j_hi; ++j) {
        REQUIRE_THAT(ku[j], WithinAbs(1.0, 1e-10));
        REQUIRE_THAT(kxu[j], WithinAbs(0.0, 1e-8));
    }
}

TEST_CASE("convolution semigroup property", "[field]") {
    // K(t) * K(s) = K(t + s) exactly, which exercises sampling, mass
    // renormalization and the h-weighted sum against an analytic answer.
    const Grid g = wide_grid(801);
    const double s = 0.3, t = 0.2;
    const auto u = sample(g, [s](double x) { return heat_kernel(x, s); });
    const auto ku = convolve_kernel(u, t, g);
    const auto kxu = convolve_kernel_dx(u, t, g);
    const auto ti = g.trust_interior();
    for (int j = ti.j_lo; j <= ti.j_hi; ++j) {
        REQUIRE_THAT(ku[j], WithinAbs(heat_kernel(g.x(j), s + t), 1e-8));
        REQUIRE_THAT(kxu[j], WithinAbs(heat_kernel_dx(g.x(j), s + t), 1e-8));
    }
}

TEST_CASE("FFT and direct convolution agree", "[field]") {
    // n_x = 300 crosses the dispatch threshold; run both code paths
    // explicitly on identical inputs.
    Grid g = wide_grid(300);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> u(g.n_x);
    for (auto& x : u) x = uni(rng);
    for (auto kind : {KernelKind::Gaussian, KernelKind::GaussianDx}) {
        const auto k = sample_kernel(kind, 0.08, g);
        const auto d = detail::convolve_direct(u, k, g);
        const auto f = detail::convolve_fft(u, k, g);
        for (int j = 0; j < g.n_x; ++j) REQUIRE_THAT(f[j], WithinAbs(d[j], 1e-12));
    }
}

TEST_CASE("unresolved kernel sampling is rejected", "[field]") {
    Grid g = wide_grid(401);
    // sqrt(2 tau) < 2h rejects sampling below the grid scale.
    const double tau = g.h() * g.h();
    REQUIRE_THROWS_AS(convolve_kernel(std::vector<double>(g.n_x, 1.0), tau, g),
                      ResolutionError);
    try {
        convolve_kernel(std::vector<double>(g.n_x, 1.0), tau, g);
    } catch (const ResolutionError& e) {
        REQUIRE(e.dt_step == tau);
        REQUIRE(e.spacing == g.h());
    }
}

TEST_CASE("time integration of a vanishing source is zero", "[field]") {
    const Grid g = wide_grid(300, 0.2, 11);
    DuhamelEngine engine(g);
    const SpaceTimeField zero(g);
    const SpaceTimeField out = engine.integrate(zero, false);
    const SpaceTimeField out_dx = engine.integrate(zero, true);
    for (int n = 0; n < g.n_t; ++n)
        for (int j = 0; j < g.n_x; ++j) {
            REQUIRE(out.at(n, j) == 0.0);
            REQUIRE(out_dx.at(n, j) == 0.0);
        }
}

TEST_CASE("time integration of a unit source accumulates t", "[field]") {
    // With G = 1 the integral of K(t - s) * G over [0, t_n] is exactly t_n
    // thanks to unit kernel mass and the trapezoid weights.
    const Grid g = wide_grid(300, 0.2, 11);
    DuhamelEngine engine(g);
    SpaceTimeField ones(g);
    for (int n = 0; n < g.n_t; ++n)
        for (int j = 0; j < g.n_x; ++j) ones.at(n, j) = 1.0;
    const SpaceTimeField out = engine.integrate(ones, false);
    const auto ti = g.trust_interior();
    for (int n = 1; n < g.n_t; ++n)
        for (int j = ti.j_lo; j <= ti.j_hi; ++j)
            REQUIRE_THAT(out.at(n, j), WithinRel(g.t(n), 1e-10));
}

TEST_CASE("homogeneous evolution does not increase the L2 norm", "[field]") {
    const Grid g = wide_grid(512, 0.3, 16);
    DuhamelEngine engine(g);
    std::vector<double> f(g.n_x);
    for (int j = 0; j < g.n_x; ++j) f[j] = heat_kernel(g.x(j) + 1.0, 0.5);
    const SpaceTimeField u = engine.evolve_homogeneous(f);
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 0; n < g.n_t; ++n) {
        std::vector<double> s(u.slice(n).begin(), u.slice(n).end());
        const double norm = lp_norm(s, 2.0, g);
        REQUIRE(norm <= prev * (1.0 + 1e-12));
        prev = norm;
    }
}

TEST_CASE("sup-in-time distance requires matching shapes", "[field]") {
    const Grid g = wide_grid(300, 0.2, 11);
    const Grid g2 = wide_grid(301, 0.2, 11);
    const SpaceTimeField a(g), b(g2);
    REQUIRE_THROWS_AS(sup_t_lp_distance(a, b, 2.0), DomainError);
    REQUIRE(sup_t_lp_distance(a, SpaceTimeField(g), 2.0) == 0.0);
}
