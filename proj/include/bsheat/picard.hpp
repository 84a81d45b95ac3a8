#ifndef BSHEAT_PICARD_HPP
#define BSHEAT_PICARD_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "bsheat/duhamel.hpp"
#include "bsheat/errors.hpp"
#include "bsheat/field.hpp"
#include "bsheat/grid.hpp"
#include "bsheat/kernel.hpp"
#include "bsheat/nonlinearity.hpp"
#include "bsheat/transform.hpp"

// Fixed-point construction of the mild solution:
//   Psi(u) = Phi(t) * f + int_0^t [ Phi(t-s) * P(u)(s) + Phi_x(t-s) * Q(u)(s) ] ds
// with P carrying the reaction term and source-placed nonlinearity, Q the
// drift term and flux-placed nonlinearity (the derivative hops from the
// nonlinear term onto the kernel; that is what buys the sqrt(T) estimate).
//
// Psi contracts once the horizon satisfies alpha*sqrt(T) + beta*T <= safety,
// where alpha collects the kernel-derivative-routed Lipschitz factors times
// 2/sqrt(pi), and beta the plain-routed ones. The solver splits the requested
// horizon into such certified subintervals, iterates each to tolerance, and
// restarts from the terminal slice.

namespace bsheat {

inline constexpr double deriv_route_constant = 1.1283791670955126; // 2/sqrt(pi)

struct PicardConfig {
    double tol = 1e-10;     // sup-in-time L^p distance between iterates
    int max_iter = 200;     // per subinterval
    double safety = 0.5;    // contraction envelope target, must be < 1
    double c_env = 0.0;     // 0: calibrate discrete constants from the grid
    std::uint64_t seed = 42;

    void validate() const {
        if (!(tol > 0.0)) throw DomainError("picard config: tol must be > 0");
        // The homogeneous base counts as the first iteration, so a budget of
        // one can never confirm convergence.
        if (max_iter < 2) throw DomainError("picard config: max_iter must be >= 2");
        if (!(safety > 0.0 && safety < 1.0))
            throw DomainError("picard config: safety must lie in (0,1)");
        if (c_env < 0.0) throw DomainError("picard config: c_env must be >= 0");
    }
};

// kappa(T) = alpha * sqrt(T) + beta * T
struct ContractionEnvelope {
    double alpha = 0.0;
    double beta = 0.0;
    double at(double T) const { return alpha * std::sqrt(T) + beta * T; }
};

// Estimate-constant multipliers. With c_env unset these come from the
// Duhamel engine's discrete quadrature bounds, so the envelope bounds the
// operator actually applied, not just its continuum limit.
struct EnvelopeCalibration {
    double plain_mult = 1.0;
    double deriv_mult = 1.0;
};

inline ContractionEnvelope envelope_for(const HeatProblem& hp,
                                        const EnvelopeCalibration& cal) {
    const double dL = std::abs(hp.nl_coeff) * hp.nl.certified_lipschitz();
    ContractionEnvelope env;
    if (hp.placement == HeatProblem::Placement::Source) {
        env.alpha = cal.deriv_mult * deriv_route_constant * std::abs(hp.drift);
        env.beta = cal.plain_mult * (std::abs(hp.reaction) + dL);
    } else {
        env.alpha = cal.deriv_mult * deriv_route_constant * (std::abs(hp.drift) + dL);
        env.beta = cal.plain_mult * std::abs(hp.reaction);
    }
    return env;
}

// Largest T with envelope.at(T) <= safety: the positive root of
// beta y^2 + alpha y - safety = 0 in y = sqrt(T). Unconstrained problems
// (alpha = beta = 0) get the requested horizon back.
inline double solve_horizon(double alpha, double beta, double safety) {
    if (!(safety > 0.0)) throw DomainError("solve_horizon: safety must be > 0");
    if (alpha < 0.0 || beta < 0.0) throw DomainError("solve_horizon: negative envelope");
    if (alpha == 0.0 && beta == 0.0) return std::numeric_limits<double>::infinity();
    if (beta == 0.0) {
        const double y = safety / alpha;
        return y * y;
    }
    const double y = (-alpha + std::sqrt(alpha * alpha + 4.0 * beta * safety)) / (2.0 * beta);
    return y * y;
}

inline double choose_local_horizon(const ContractionEnvelope& env, const PicardConfig& cfg,
                                   double requested) {
    cfg.validate();
    if (!(requested > 0.0)) throw DomainError("choose_local_horizon: requested horizon must be > 0");
    return std::min(solve_horizon(env.alpha, env.beta, cfg.safety), requested);
}

struct SolveReport {
    struct Subinterval {
        double t_start = 0.0;
        double t_length = 0.0;
        int steps = 0;
        int iterations = 0;
        double measured_ratio = 0.0;    // max consecutive iterate-distance ratio
        double theoretical_bound = 0.0; // envelope at t_length
        double residual = 0.0;          // final iterate distance
        std::vector<double> iterate_distances;
    };

    std::vector<Subinterval> subintervals;
    bool converged = false;
    bool fast_path_zero = false;
    bool clamp_activated = false;
    int total_iterations = 0;
    double final_residual = 0.0;
    double p = 2.0;
    double tol = 0.0;
    double safety = 0.0;
    double envelope_alpha = 0.0;
    double envelope_beta = 0.0;
    double calibration_plain = 1.0;
    double calibration_deriv = 1.0;
    double local_horizon = 0.0;
    double taper_width = 0.0;
    std::vector<double> slice_norms; // L^p of every global time slice

    // Internal consistency checks; empty list means the run certifies itself.
    std::vector<std::string> check_invariants() const {
        std::vector<std::string> bad;
        if (!converged) bad.push_back("run did not converge");
        for (std::size_t k = 0; k < subintervals.size(); ++k) {
            const auto& s = subintervals[k];
            if (s.measured_ratio > s.theoretical_bound * 1.05 + 1e-12)
                bad.push_back("subinterval " + std::to_string(k) +
                              ": measured contraction ratio " + std::to_string(s.measured_ratio) +
                              " exceeds envelope bound " + std::to_string(s.theoretical_bound) +
                              " by more than 5%");
            for (std::size_t i = 1; i < s.iterate_distances.size(); ++i)
                if (s.iterate_distances[i] >
                    s.iterate_distances[i - 1] * (s.measured_ratio + 1e-12) + 1e-300)
                    bad.push_back("subinterval " + std::to_string(k) +
                                  ": iterate distances not geometrically decaying");
        }
        for (double n : slice_norms)
            if (!std::isfinite(n)) bad.push_back("non-finite slice norm");
        return bad;
    }
};

namespace detail {

// Source slices for the two Duhamel routes. Returns false when the route
// is identically absent (zero coefficients), so the integral can be skipped.
struct SourceSplit {
    bool plain_active = false;
    bool deriv_active = false;
    double d_plain = 0.0;
    double d_deriv = 0.0;
    double reaction = 0.0;
    double drift = 0.0;

    explicit SourceSplit(const HeatProblem& hp) {
        reaction = hp.reaction;
        drift = hp.drift;
        const bool nl_on = hp.nonlinearity_active();
        if (hp.placement == HeatProblem::Placement::Source && nl_on) d_plain = hp.nl_coeff;
        if (hp.placement == HeatProblem::Placement::Flux && nl_on) d_deriv = hp.nl_coeff;
        plain_active = reaction != 0.0 || d_plain != 0.0;
        deriv_active = drift != 0.0 || d_deriv != 0.0;
    }
};

inline void fill_sources(const SpaceTimeField& u, const HeatProblem& hp,
                         const SourceSplit& split, SpaceTimeField* P, SpaceTimeField* Q,
                         bool& clamp_seen) {
    const Grid& g = u.grid();
    for (int n = 0; n < g.n_t; ++n) {
        auto us = u.slice(n);
        std::span<double> ps = P ? P->slice(n) : std::span<double>{};
        std::span<double> qs = Q ? Q->slice(n) : std::span<double>{};
        for (int j = 0; j < g.n_x; ++j) {
            const double v = us[j];
            double fv = 0.0;
            if (split.d_plain != 0.0 || split.d_deriv != 0.0) {
                fv = hp.nl.eval(v);
                if (hp.nl.clamp_active(v)) clamp_seen = true;
            }
            if (P) ps[j] = split.reaction * v + split.d_plain * fv;
            if (Q) qs[j] = split.drift * v + split.d_deriv * fv;
        }
    }
}

// One application of Psi given the precomputed homogeneous part.
inline SpaceTimeField psi_from_base(const SpaceTimeField& base, const SpaceTimeField& u,
                                    const HeatProblem& hp, const SourceSplit& split,
                                    DuhamelEngine& engine, bool& clamp_seen) {
    SpaceTimeField out = base;
    SpaceTimeField P, Q;
    if (split.plain_active) P = SpaceTimeField(u.grid());
    if (split.deriv_active) Q = SpaceTimeField(u.grid());
    fill_sources(u, hp, split, split.plain_active ? &P : nullptr,
                 split.deriv_active ? &Q : nullptr, clamp_seen);
    if (split.plain_active) {
        const SpaceTimeField I = engine.integrate(P, false);
        for (std::size_t i = 0; i < out.raw().size(); ++i) out.raw()[i] += I.raw()[i];
    }
    if (split.deriv_active) {
        const SpaceTimeField I = engine.integrate(Q, true);
        for (std::size_t i = 0; i < out.raw().size(); ++i) out.raw()[i] += I.raw()[i];
    }
    return out;
}

// Psi(u) - Psi(v) without the (cancelling) homogeneous part.
inline double contraction_ratio(const SpaceTimeField& u, const SpaceTimeField& v,
                                const HeatProblem& hp, const SourceSplit& split,
                                DuhamelEngine& engine, double p) {
    bool clamp_seen = false;
    SpaceTimeField zero_base(u.grid());
    const SpaceTimeField pu = psi_from_base(zero_base, u, hp, split, engine, clamp_seen);
    const SpaceTimeField pv = psi_from_base(zero_base, v, hp, split, engine, clamp_seen);
    const double den = sup_t_lp_distance(u, v, p);
    if (den == 0.0) throw DomainError("contraction ratio: degenerate pair (u == v)");
    return sup_t_lp_distance(pu, pv, p) / den;
}

inline EnvelopeCalibration calibrate(const HeatProblem& hp, const PicardConfig& cfg,
                                     DuhamelEngine& engine) {
    EnvelopeCalibration cal;
    if (cfg.c_env > 0.0) {
        cal.plain_mult = cfg.c_env;
        cal.deriv_mult = cfg.c_env;
        return cal;
    }
    const SourceSplit split(hp);
    cal.plain_mult = split.plain_active ? std::max(1.0, engine.plain_bound_multiplier()) : 1.0;
    cal.deriv_mult = split.deriv_active ? std::max(1.0, engine.deriv_bound_multiplier()) : 1.0;
    return cal;
}

inline Grid sub_grid(const Grid& g, int steps) {
    Grid gl = g;
    gl.n_t = steps + 1;
    gl.t_horizon = steps * g.dt();
    return gl;
}

// Smooth bounded random field: a few Gaussian bumps with mild oscillation
// in time. Used for contraction measurements and estimate checks.
inline SpaceTimeField random_smooth_field(const Grid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double span = g.x_max - g.x_min;
    struct Bump {
        double amp, center, width, omega, phase;
    };
    std::vector<Bump> bumps(3);
    for (auto& b : bumps) {
        b.amp = 2.0 * uni(rng) - 1.0;
        b.center = g.x_min + span * (0.25 + 0.5 * uni(rng));
        b.width = span * (0.03 + 0.06 * uni(rng));
        b.omega = 3.0 * uni(rng) / g.t_horizon;
        b.phase = 2.0 * pi * uni(rng);
    }
    SpaceTimeField u(g);
    for (int n = 0; n < g.n_t; ++n) {
        auto s = u.slice(n);
        const double t = g.t(n);
        for (const auto& b : bumps) {
            const double mod = b.amp * (1.0 + 0.3 * std::sin(b.omega * t + b.phase));
            for (int j = 0; j < g.n_x; ++j) {
                const double dx = (g.x(j) - b.center) / b.width;
                s[j] += mod * std::exp(-0.5 * dx * dx);
            }
        }
    }
    return u;
}

} // namespace detail

// One application of the solution operator Psi to a trial field, with data f.
inline SpaceTimeField apply_psi(const SpaceTimeField& u, const HeatProblem& hp,
                                std::span<const double> f) {
    hp.validate();
    DuhamelEngine engine(u.grid());
    const SpaceTimeField base = engine.evolve_homogeneous(f);
    const detail::SourceSplit split(hp);
    bool clamp_seen = false;
    return detail::psi_from_base(base, u, hp, split, engine, clamp_seen);
}

struct PicardResult {
    SpaceTimeField field;
    SolveReport report;
};

// Full solve over grid.t_horizon: certified subintervals, fixed-point
// iteration on each, restart from the terminal slice.
inline PicardResult picard_solve(const HeatProblem& hp, const Grid& g,
                                 const PicardConfig& cfg = {}) {
    hp.validate();
    cfg.validate();
    g.validate();
    require_resolved(g.dt(), g.h());

    PicardResult res;
    res.field = SpaceTimeField(g);
    SolveReport& rep = res.report;
    rep.p = hp.p;
    rep.tol = cfg.tol;
    rep.safety = cfg.safety;
    rep.taper_width = 0.5 * g.boundary_layer();

    std::vector<double> f = sample_damped_data(hp, g);

    // Calibrate on the full grid; its multipliers bound every sub-grid's.
    DuhamelEngine full_engine(g);
    const EnvelopeCalibration cal = detail::calibrate(hp, cfg, full_engine);
    const ContractionEnvelope env = envelope_for(hp, cal);
    rep.calibration_plain = cal.plain_mult;
    rep.calibration_deriv = cal.deriv_mult;
    rep.envelope_alpha = env.alpha;
    rep.envelope_beta = env.beta;

    const double t_loc = choose_local_horizon(env, cfg, g.t_horizon);
    rep.local_horizon = t_loc;
    const int total_steps = g.n_t - 1;
    const int steps_per_sub =
        std::min(total_steps, std::max(1, static_cast<int>(std::floor(t_loc / g.dt() + 1e-12))));

    // Zero data with a vanishing-at-zero nonlinearity: the solution is
    // identically zero; report it without iterating.
    bool data_zero = true;
    for (double v : f)
        if (v != 0.0) data_zero = false;
    const bool nl_keeps_zero = !hp.nonlinearity_active() || hp.nl.zero_at_zero();
    if (data_zero && nl_keeps_zero) {
        rep.fast_path_zero = true;
        rep.converged = true;
        rep.total_iterations = 0;
        rep.final_residual = 0.0;
        SolveReport::Subinterval sub;
        sub.t_start = 0.0;
        sub.t_length = g.t_horizon;
        sub.steps = total_steps;
        sub.theoretical_bound = env.at(std::min(static_cast<double>(steps_per_sub) * g.dt(),
                                                g.t_horizon));
        rep.subintervals.push_back(sub);
        rep.slice_norms.assign(g.n_t, 0.0);
        return res;
    }

    const detail::SourceSplit split(hp);
    std::map<int, DuhamelEngine> engines;

    std::vector<double> current = f;
    {
        auto s0 = res.field.slice(0);
        std::copy(current.begin(), current.end(), s0.begin());
    }

    int start_step = 0;
    while (start_step < total_steps) {
        const int steps = std::min(steps_per_sub, total_steps - start_step);
        const Grid gl = detail::sub_grid(g, steps);
        auto it = engines.find(steps);
        if (it == engines.end()) it = engines.emplace(steps, DuhamelEngine(gl)).first;
        DuhamelEngine& engine = it->second;

        SolveReport::Subinterval sub;
        sub.t_start = g.t(start_step);
        sub.t_length = gl.t_horizon;
        sub.steps = steps;
        sub.theoretical_bound = env.at(gl.t_horizon);

        const SpaceTimeField base = engine.evolve_homogeneous(current);
        SpaceTimeField u = base;
        sub.iterations = 1; // the homogeneous evolution is Psi of the zero-source anchor
        double dist = std::numeric_limits<double>::infinity();
        bool sub_converged = false;

        while (sub.iterations < cfg.max_iter) {
            bool clamp_seen = false;
            SpaceTimeField next =
                detail::psi_from_base(base, u, hp, split, engine, clamp_seen);
            if (clamp_seen) rep.clamp_activated = true;
            ++sub.iterations;
            const double d = sup_t_lp_distance(next, u, hp.p);
            sub.iterate_distances.push_back(d);
            if (std::isfinite(dist) && dist > 0.0)
                sub.measured_ratio = std::max(sub.measured_ratio, d / dist);
            dist = d;
            u = std::move(next);
            if (d <= cfg.tol) {
                sub_converged = true;
                break;
            }
        }
        sub.residual = sub.iterate_distances.empty() ? 0.0 : sub.iterate_distances.back();
        rep.total_iterations += sub.iterations;
        if (!sub_converged) {
            rep.subintervals.push_back(sub);
            throw ConvergenceError(
                "fixed-point iteration exhausted max_iter on subinterval starting at t = " +
                    std::to_string(sub.t_start) +
                    " (last contraction ratio " + std::to_string(sub.measured_ratio) + ")",
                sub.measured_ratio, sub.iterations);
        }

        for (int n = 1; n <= steps; ++n) {
            auto dst = res.field.slice(start_step + n);
            auto src = u.slice(n);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        auto last = u.slice(steps);
        current.assign(last.begin(), last.end());
        rep.final_residual = sub.residual;
        rep.subintervals.push_back(std::move(sub));
        start_step += steps;
    }

    rep.converged = true;
    rep.slice_norms.resize(g.n_t);
    for (int n = 0; n < g.n_t; ++n)
        rep.slice_norms[n] = lp_norm(res.field.slice(n), hp.p, g);
    if (!res.field.all_finite())
        throw ConvergenceError("solution field contains non-finite values", 0.0,
                               rep.total_iterations);
    return res;
}

// Measured operator contraction ratios on random smooth field pairs over a
// grid whose horizon should come from choose_local_horizon.
inline std::vector<double> measure_contraction(const HeatProblem& hp, const Grid& g,
                                               const PicardConfig& cfg, int trials) {
    hp.validate();
    cfg.validate();
    g.validate();
    if (trials < 1) throw DomainError("measure_contraction: trials must be >= 1");
    DuhamelEngine engine(g);
    const detail::SourceSplit split(hp);
    std::mt19937_64 rng(cfg.seed);
    std::vector<double> ratios;
    ratios.reserve(trials);
    for (int k = 0; k < trials; ++k) {
        const SpaceTimeField u = detail::random_smooth_field(g, rng);
        SpaceTimeField v = detail::random_smooth_field(g, rng);
        // Degenerate pairs would divide by ~0; resample (deterministically).
        int guard = 0;
        while (sup_t_lp_distance(u, v, hp.p) <
                   1e-12 * std::max(sup_t_lp_norm(u, hp.p), 1.0) &&
               guard++ < 100)
            v = detail::random_smooth_field(g, rng);
        ratios.push_back(detail::contraction_ratio(u, v, hp, split, engine, hp.p));
    }
    return ratios;
}

struct LipschitzResult {
    double ratio = 0.0;  // sup-in-time distance of solutions over data distance
    double kappa = 0.0;  // contraction ratio used for the bound
    double bound = 0.0;  // (1 - kappa)^{-1}
    double horizon = 0.0;
};

// Solution-map stability over one certified subinterval: solve with data f
// (from the problem) and with data g_data, compare distances.
inline LipschitzResult solution_map_lipschitz(const HeatProblem& hp, const Grid& g,
                                              const PicardConfig& cfg,
                                              std::function<double(double)> g_data) {
    hp.validate();
    cfg.validate();
    if (!g_data) throw DomainError("solution_map_lipschitz: second data function not set");

    DuhamelEngine probe(g);
    const EnvelopeCalibration cal = detail::calibrate(hp, cfg, probe);
    const ContractionEnvelope env = envelope_for(hp, cal);
    const double t_loc = choose_local_horizon(env, cfg, g.t_horizon);
    const int steps =
        std::min(g.n_t - 1, std::max(1, static_cast<int>(std::floor(t_loc / g.dt() + 1e-12))));
    const Grid gl = detail::sub_grid(g, steps);

    HeatProblem hp_g = hp;
    hp_g.data = std::move(g_data);

    const PicardResult rf = picard_solve(hp, gl, cfg);
    const PicardResult rg = picard_solve(hp_g, gl, cfg);

    const std::vector<double> f0 = sample_damped_data(hp, gl);
    const std::vector<double> g0 = sample_damped_data(hp_g, gl);
    std::vector<double> diff(f0.size());
    for (std::size_t j = 0; j < f0.size(); ++j) diff[j] = f0[j] - g0[j];
    const double den = lp_norm(diff, hp.p, gl);
    if (den == 0.0) throw DomainError("solution_map_lipschitz: identical data");

    LipschitzResult out;
    out.horizon = gl.t_horizon;
    out.ratio = sup_t_lp_distance(rf.field, rg.field, hp.p) / den;
    double kappa = 0.0;
    for (const auto& s : rf.report.subintervals) kappa = std::max(kappa, s.measured_ratio);
    for (const auto& s : rg.report.subintervals) kappa = std::max(kappa, s.measured_ratio);
    if (kappa == 0.0) kappa = env.at(gl.t_horizon);
    out.kappa = kappa;
    out.bound = kappa < 0.999 ? 1.0 / (1.0 - kappa) : std::numeric_limits<double>::infinity();
    return out;
}

} // namespace bsheat

#endif
