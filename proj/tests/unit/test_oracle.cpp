#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bsheat/oracle.hpp"
#include "bsheat/picard.hpp"

using namespace bsheat;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Grid oracle_grid(int n_x = 701, double t_horizon = 0.1, int n_t = 41) {
    Grid g;
    g.x_min = -14.0;
    g.x_max = 14.0;
    g.n_x = n_x;
    g.t_horizon = t_horizon;
    g.n_t = n_t;
    return g;
}

// Drifted, damped evolution of a Gaussian has a closed form: a Gaussian of
// grown variance, shifted by a*t and scaled by e^{b*t}.
double gaussian_exact(double x, double t, double sigma, double a, double b) {
    const double var = sigma * sigma + 2.0 * t;
    return std::exp(b * t) * sigma / std::sqrt(var) *
           std::exp(-0.5 * (x + a * t) * (x + a * t) / var);
}

} // namespace

TEST_CASE("normal cdf basics", "[oracle]") {
    REQUIRE_THAT(norm_cdf(0.0), WithinRel(0.5, 1e-15));
    REQUIRE_THAT(norm_cdf(1.959963984540054), WithinAbs(0.975, 1e-12));
    REQUIRE_THAT(norm_cdf(-8.0) + norm_cdf(8.0), WithinRel(1.0, 1e-14));
}

TEST_CASE("closed-form vanilla prices", "[oracle]") {
    const ModelSpec m = ModelSpec::classical(0.2, 0.05, 1.0);
    const Payoff call = Payoff::call(100.0);
    const Payoff put = Payoff::put(100.0);
    REQUIRE_THAT(bs_closed_form(m, call, 100.0, 0.0),
                 WithinRel(10.450583572185565, 1e-14));
    REQUIRE_THAT(bs_closed_form(m, put, 100.0, 0.0),
                 WithinRel(5.5735260222569707, 1e-14));
    REQUIRE_THAT(bs_closed_form(m, call, 90.0, 0.0), WithinRel(5.0912220788175517, 1e-14));
}

TEST_CASE("put-call parity holds across spots", "[oracle]") {
    const ModelSpec m = ModelSpec::classical(0.25, 0.03, 2.0);
    const Payoff call = Payoff::call(100.0);
    const Payoff put = Payoff::put(100.0);
    for (double S : {60.0, 90.0, 100.0, 130.0, 220.0}) {
        const double lhs = bs_closed_form(m, call, S, 0.0) - bs_closed_form(m, put, S, 0.0);
        const double rhs = S - 100.0 * std::exp(-0.03 * 2.0);
        REQUIRE_THAT(lhs, WithinAbs(rhs, 1e-12 * std::max(1.0, S)));
    }
}

TEST_CASE("at maturity the price is the intrinsic payoff", "[oracle]") {
    const ModelSpec m = ModelSpec::classical(0.2, 0.05, 1.0);
    REQUIRE(bs_closed_form(m, Payoff::call(100.0), 87.0, 1.0) == 0.0);
    REQUIRE_THAT(bs_closed_form(m, Payoff::call(100.0), 123.0, 1.0), WithinRel(23.0, 1e-15));
    REQUIRE_THAT(bs_closed_form(m, Payoff::put(100.0), 87.0, 1.0), WithinRel(13.0, 1e-15));
}

TEST_CASE("closed form rejects what it cannot price", "[oracle]") {
    ModelSpec m = ModelSpec::classical(0.2, 0.05, 1.0);
    m.C = 0.01; // breaks C = -B, no longer the classical discounted model
    REQUIRE_THROWS_AS(bs_closed_form(m, Payoff::call(100.0), 100.0, 0.0), DomainError);
    const ModelSpec ok = ModelSpec::classical(0.2, 0.05, 1.0);
    REQUIRE_THROWS_AS(bs_closed_form(ok, Payoff::call_spread(90.0, 110.0), 100.0, 0.0),
                      DomainError);
    REQUIRE_THROWS_AS(bs_closed_form(ok, Payoff::call(100.0), -5.0, 0.0), DomainError);
}

TEST_CASE("tridiagonal solver", "[oracle]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const int n = 40;
    std::vector<double> lower(n), diag(n), upper(n), rhs(n);
    for (int i = 0; i < n; ++i) {
        lower[i] = uni(rng);
        upper[i] = uni(rng);
        diag[i] = 4.0 + uni(rng); // diagonally dominant
        rhs[i] = uni(rng);
    }
    lower[0] = 0.0;
    upper[n - 1] = 0.0;
    const std::vector<double> rhs_copy = rhs;
    std::vector<double> x = rhs;
    std::vector<double> lo = lower, di = diag, up = upper;
    solve_tridiagonal(lo, di, up, x);
    for (int i = 0; i < n; ++i) {
        double acc = diag[i] * x[i];
        if (i > 0) acc += lower[i] * x[i - 1];
        if (i + 1 < n) acc += upper[i] * x[i + 1];
        REQUIRE_THAT(acc, WithinAbs(rhs_copy[i], 1e-12));
    }
}

TEST_CASE("exact linear evolution against the analytic Gaussian", "[oracle]") {
    const Grid g = oracle_grid();
    const double sigma = 1.0;
    std::vector<double> f(g.n_x);
    for (int j = 0; j < g.n_x; ++j) f[j] = std::exp(-0.5 * g.x(j) * g.x(j));

    struct Case {
        double a, b;
    };
    for (const auto& c : {Case{1.2, 0.0}, Case{0.0, -0.7}, Case{1.2, -0.7}}) {
        const auto out = exact_drift_reaction(f, 0.1, c.a, c.b, g);
        const auto ti = g.trust_interior();
        for (int j = ti.j_lo; j <= ti.j_hi; ++j)
            REQUIRE_THAT(out[j], WithinAbs(gaussian_exact(g.x(j), 0.1, sigma, c.a, c.b), 1e-9));
    }
}

TEST_CASE("exact evolution at t = 0 returns the data", "[oracle]") {
    const Grid g = oracle_grid();
    std::vector<double> f(g.n_x);
    for (int j = 0; j < g.n_x; ++j) f[j] = std::sin(0.3 * g.x(j));
    const auto out = exact_drift_reaction(f, 0.0, 2.0, 1.0, g);
    for (int j = 0; j < g.n_x; ++j) REQUIRE(out[j] == f[j]);
}

TEST_CASE("problem-aware exact solution folds linear terms only", "[oracle]") {
    HeatProblem hp;
    hp.p = 2.0;
    hp.data = [](double x) { return std::exp(-0.5 * x * x); };
    hp.drift = 0.5;
    hp.reaction = 1.0;
    hp.nl_coeff = 0.5;
    hp.placement = HeatProblem::Placement::Flux;
    hp.nl = Nonlinearity::linear(1.0);

    const Grid g = oracle_grid();
    const auto f = sample_damped_data(hp, g);
    // Effective drift 0.5 + 0.5*1 = 1, reaction 1.
    const auto folded = exact_drift_reaction(hp, f, 0.1, g);
    const auto direct = exact_drift_reaction(f, 0.1, 1.0, 1.0, g);
    for (int j = 0; j < g.n_x; ++j) REQUIRE_THAT(folded[j], WithinAbs(direct[j], 1e-13));

    hp.nl = Nonlinearity::sat_sin(1.0);
    REQUIRE_THROWS_AS(exact_drift_reaction(hp, f, 0.1, g), DomainError);
}

TEST_CASE("finite differences agree with the exact linear solution", "[oracle]") {
    HeatProblem hp;
    hp.p = 2.0;
    hp.data = [](double x) { return std::exp(-0.5 * x * x); };
    hp.drift = 1.0;
    hp.reaction = -0.5;
    hp.nl_coeff = 0.0;
    hp.nl = Nonlinearity::zero();

    Grid g = oracle_grid(401, 0.2, 81);
    const SpaceTimeField fd = fd_solve(hp, g, FDConfig{});
    const auto f0 = sample_damped_data(hp, g);
    const auto exact = exact_drift_reaction(hp, f0, g.t_horizon, g);
    const auto ti = g.trust_interior();
    double sup = 0.0;
    const int n = g.n_t - 1;
    for (int j = ti.j_lo; j <= ti.j_hi; ++j)
        sup = std::max(sup, std::abs(fd.at(n, j) - exact[j]));
    REQUIRE(sup <= 10.0 * (g.h() * g.h() + g.dt() * g.dt()));
}

TEST_CASE("finite differences track the fixed point on a nonlinear problem",
          "[oracle]") {
    HeatProblem hp;
    hp.p = 2.0;
    hp.data = [](double x) { return std::exp(-0.5 * x * x); };
    hp.drift = 1.5;
    hp.reaction = -0.5;
    hp.nl_coeff = 1.0;
    hp.placement = HeatProblem::Placement::Source;
    hp.nl = Nonlinearity::sat_sin(1.0);

    Grid g;
    g.x_min = -10.0;
    g.x_max = 10.0;
    g.n_x = 512;
    g.t_horizon = 0.25;
    g.n_t = 64;
    const PicardResult res = picard_solve(hp, g, PicardConfig{});
    const SpaceTimeField fd = fd_solve(hp, g, FDConfig{});
    const auto ti = g.trust_interior();
    double sup = 0.0;
    const int n = g.n_t - 1;
    for (int j = ti.j_lo; j <= ti.j_hi; ++j)
        sup = std::max(sup, std::abs(res.field.at(n, j) - fd.at(n, j)));
    REQUIRE(sup <= 10.0 * (g.h() * g.h() + g.dt() * g.dt()));
}
