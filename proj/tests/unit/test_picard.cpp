#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "bsheat/oracle.hpp"
#include "bsheat/picard.hpp"

using namespace bsheat;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Grid test_grid(int n_x = 512, double t_horizon = 0.2, int n_t = 41) {
    Grid g;
    g.x_min = -10.0;
    g.x_max = 10.0;
    g.n_x = n_x;
    g.t_horizon = t_horizon;
    g.n_t = n_t;
    return g;
}

HeatProblem gaussian_problem() {
    HeatProblem hp;
    hp.p = 2.0;
    hp.data = [](double x) { return std::exp(-0.5 * x * x); };
    return hp;
}

} // namespace

TEST_CASE("local horizon solves the envelope equation", "[picard]") {
    // alpha sqrt(T) + beta T = safety; with alpha = beta = 1, safety = 1/2
    // the root is T = (2 - sqrt(3))/2.
    REQUIRE_THAT(solve_horizon(1.0, 1.0, 0.5), WithinRel((2.0 - std::sqrt(3.0)) / 2.0, 1e-14));
    REQUIRE_THAT(solve_horizon(1.0, 1.0, 0.5), WithinRel(0.13397459621556132, 1e-14));
    // Degenerate coefficients reduce to the single-term solutions.
    REQUIRE_THAT(solve_horizon(2.0, 0.0, 0.5), WithinRel(0.0625, 1e-14));
    REQUIRE_THAT(solve_horizon(0.0, 4.0, 0.5), WithinRel(0.125, 1e-14));
    REQUIRE(solve_horizon(0.0, 0.0, 0.5) == std::numeric_limits<double>::infinity());
}

TEST_CASE("contraction envelope is monotone and respects safety", "[picard]") {
    const ContractionEnvelope env{1.3, 0.7};
    double prev = 0.0;
    for (double T : {0.001, 0.01, 0.1, 1.0}) {
        REQUIRE(env.at(T) > prev);
        prev = env.at(T);
    }
    PicardConfig pc;
    pc.safety = 0.4;
    const double t_loc = choose_local_horizon(env, pc, 10.0);
    REQUIRE(env.at(t_loc) <= pc.safety + 1e-12);
    // A tame envelope is capped by the requested horizon instead.
    REQUIRE(choose_local_horizon(ContractionEnvelope{1e-3, 1e-3}, pc, 0.05) == 0.05);
}

TEST_CASE("pure heat flow converges immediately", "[picard]") {
    // No drift, reaction or nonlinearity: the first Picard application
    // reproduces the homogeneous evolution, so one confirmation pass ends it.
    const Grid g = test_grid();
    const PicardResult res = picard_solve(gaussian_problem(), g, PicardConfig{});
    REQUIRE(res.report.converged);
    REQUIRE(res.report.total_iterations == 2);
    REQUIRE(res.report.subintervals.size() == 1);
    REQUIRE(res.report.check_invariants().empty());
}

TEST_CASE("zero data short-circuits to the zero field", "[picard]") {
    HeatProblem hp = gaussian_problem();
    hp.data = [](double) { return 0.0; };
    hp.drift = 1.0;
    hp.reaction = 0.5;
    hp.nl_coeff = 1.0;
    hp.placement = HeatProblem::Placement::Source;
    hp.nl = Nonlinearity::sat_sin(1.0);
    const Grid g = test_grid();
    const PicardResult res = picard_solve(hp, g, PicardConfig{});
    REQUIRE(res.report.converged);
    REQUIRE(res.report.total_iterations == 0);
    for (int n = 0; n < g.n_t; ++n)
        for (int j = 0; j < g.n_x; ++j) REQUIRE(res.field.at(n, j) == 0.0);
}

TEST_CASE("linear flux problem matches the exact solution", "[picard]") {
    // Linear nonlinearity on the flux route folds into an effective drift,
    // for which the exact evolution is known in closed form.
    HeatProblem hp = gaussian_problem();
    hp.drift = 0.5;
    hp.reaction = 1.0;
    hp.nl_coeff = 0.5;
    hp.placement = HeatProblem::Placement::Flux;
    hp.nl = Nonlinearity::linear(1.0);
    const Grid g = test_grid(601, 0.2, 41);
    PicardConfig pc;
    pc.tol = 1e-11;
    const PicardResult res = picard_solve(hp, g, pc);
    REQUIRE(res.report.converged);

    const auto f0 = sample_damped_data(hp, g);
    const auto exact = exact_drift_reaction(hp, f0, g.t_horizon, g);
    const auto ti = g.trust_interior();
    const int n = g.n_t - 1;
    double sup = 0.0;
    for (int j = ti.j_lo; j <= ti.j_hi; ++j)
        sup = std::max(sup, std::abs(res.field.at(n, j) - exact[j]));
    REQUIRE(sup <= 5.0 * (g.h() * g.h() + g.dt()));
}

TEST_CASE("iterate distances decay geometrically", "[picard]") {
    HeatProblem hp = gaussian_problem();
    hp.drift = 1.0;
    hp.reaction = 0.3;
    hp.nl_coeff = 1.0;
    hp.placement = HeatProblem::Placement::Source;
    hp.nl = Nonlinearity::sat_sin(1.0);
    const Grid g = test_grid();
    const PicardResult res = picard_solve(hp, g, PicardConfig{});
    REQUIRE(res.report.converged);
    REQUIRE(res.report.check_invariants().empty());
    for (const auto& sub : res.report.subintervals) {
        REQUIRE(sub.measured_ratio <= sub.theoretical_bound * 1.05 + 1e-12);
        for (std::size_t i = 1; i < sub.iterate_distances.size(); ++i)
            REQUIRE(sub.iterate_distances[i] <=
                    sub.iterate_distances[i - 1] * (sub.measured_ratio + 1e-12) + 1e-300);
    }
}

TEST_CASE("iteration budget exhaustion raises a convergence error", "[picard]") {
    HeatProblem hp = gaussian_problem();
    hp.drift = 1.0;
    hp.reaction = 0.3;
    hp.nl_coeff = 1.0;
    hp.placement = HeatProblem::Placement::Source;
    hp.nl = Nonlinearity::sat_sin(1.0);
    PicardConfig pc;
    pc.tol = 1e-15;
    pc.max_iter = 2;
    const Grid g = test_grid();
    REQUIRE_THROWS_AS(picard_solve(hp, g, pc), ConvergenceError);
    try {
        picard_solve(hp, g, pc);
    } catch (const ConvergenceError& e) {
        REQUIRE(e.iterations == 2);
        REQUIRE(e.measured_ratio >= 0.0);
    }
}

TEST_CASE("solves are deterministic", "[picard]") {
    HeatProblem hp = gaussian_problem();
    hp.drift = 1.0;
    hp.reaction = 0.3;
    hp.nl_coeff = 1.0;
    hp.placement = HeatProblem::Placement::Source;
    hp.nl = Nonlinearity::sat_sin(1.0);
    const Grid g = test_grid();
    const PicardResult a = picard_solve(hp, g, PicardConfig{});
    const PicardResult b = picard_solve(hp, g, PicardConfig{});
    REQUIRE(a.field.raw().size() == b.field.raw().size());
    REQUIRE(std::memcmp(a.field.raw().data(), b.field.raw().data(),
                        a.field.raw().size() * sizeof(double)) == 0);
    REQUIRE(a.report.total_iterations == b.report.total_iterations);
    REQUIRE(a.report.final_residual == b.report.final_residual);
}

TEST_CASE("measured contraction ratios stay under the envelope", "[picard]") {
    HeatProblem hp = gaussian_problem();
    hp.drift = 1.0;
    hp.reaction = 0.3;
    hp.nl_coeff = 1.0;
    hp.placement = HeatProblem::Placement::Source;
    hp.nl = Nonlinearity::sat_sin(1.0);
    const Grid g = test_grid();
    PicardConfig pc;

    DuhamelEngine probe(g);
    const EnvelopeCalibration cal = detail::calibrate(hp, pc, probe);
    const ContractionEnvelope env = envelope_for(hp, cal);
    const double t_loc = choose_local_horizon(env, pc, g.t_horizon);
    const int steps =
        std::min(g.n_t - 1, std::max(1, static_cast<int>(std::floor(t_loc / g.dt() + 1e-12))));
    const Grid gl = detail::sub_grid(g, steps);

    const auto ratios = measure_contraction(hp, gl, pc, 12);
    REQUIRE(ratios.size() == 12);
    const double bound = env.at(gl.t_horizon);
    for (double r : ratios) {
        REQUIRE(r >= 0.0);
        REQUIRE(r < bound * 1.1);
    }
    REQUIRE_THROWS_AS(measure_contraction(hp, gl, pc, 0), DomainError);
}

TEST_CASE("solution map is Lipschitz in the data", "[picard]") {
    HeatProblem hp = gaussian_problem();
    hp.drift = 1.0;
    hp.reaction = 0.3;
    hp.nl_coeff = 1.0;
    hp.placement = HeatProblem::Placement::Source;
    hp.nl = Nonlinearity::sat_sin(1.0);
    const Grid g = test_grid();
    const LipschitzResult lr =
        solution_map_lipschitz(hp, g, PicardConfig{}, [](double x) {
            return std::exp(-0.5 * x * x) + 0.05 * std::exp(-2.0 * (x - 1.0) * (x - 1.0));
        });
    REQUIRE(lr.kappa < 1.0);
    REQUIRE(lr.bound >= 1.0);
    REQUIRE(lr.ratio <= lr.bound * 1.05);
    REQUIRE(lr.horizon > 0.0);
}

TEST_CASE("picard configuration is validated", "[picard]") {
    PicardConfig pc;
    pc.tol = 0.0;
    REQUIRE_THROWS_AS(pc.validate(), DomainError);
    pc = PicardConfig{};
    pc.max_iter = 1;
    REQUIRE_THROWS_AS(pc.validate(), DomainError);
    pc = PicardConfig{};
    pc.safety = 1.0;
    REQUIRE_THROWS_AS(pc.validate(), DomainError);
    pc = PicardConfig{};
    pc.safety = 0.0;
    REQUIRE_THROWS_AS(pc.validate(), DomainError);
}
