#ifndef BSHEAT_ORACLE_HPP
#define BSHEAT_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "bsheat/errors.hpp"
#include "bsheat/field.hpp"
#include "bsheat/grid.hpp"
#include "bsheat/kernel.hpp"
#include "bsheat/transform.hpp"

// Independent reference routes. Nothing here touches the FFT engine or the
// Duhamel weights: the closed form uses erfc, the finite-difference solver
// uses a theta-scheme with a tridiagonal solve, and the drift/reaction
// formula is direct summation of the continuum expression at shifted points.

namespace bsheat {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Vanilla price under the classical lognormal model at remaining time
// maturity - tau. The model must actually be the classical one (D = 0,
// C = -B, A > 0): anything else has no closed form here.
inline double bs_closed_form(const ModelSpec& m, const Payoff& payoff, double S, double tau) {
    if (!(S > 0.0)) throw DomainError("bs_closed_form: S must be > 0");
    if (!(tau >= 0.0 && tau <= m.maturity))
        throw DomainError("bs_closed_form: tau must lie in [0, maturity]");
    if (!m.is_classical())
        throw DomainError(
            "bs_closed_form: model is not classical (needs D = 0, C = -B, A > 0)");
    if (payoff.kind != Payoff::Kind::Call && payoff.kind != Payoff::Kind::Put)
        throw DomainError("bs_closed_form: only vanilla call/put supported");

    const double sigma = std::sqrt(2.0 * m.A);
    const double r = m.B;
    const double K = payoff.strike;
    const double theta = m.maturity - tau;
    if (theta == 0.0) return payoff(S);

    const double sq = sigma * std::sqrt(theta);
    const double d1 = (std::log(S / K) + (r + 0.5 * sigma * sigma) * theta) / sq;
    const double d2 = d1 - sq;
    const double df = std::exp(-r * theta);
    if (payoff.kind == Payoff::Kind::Call)
        return S * norm_cdf(d1) - K * df * norm_cdf(d2);
    return K * df * norm_cdf(-d2) - S * norm_cdf(-d1);
}

// Tridiagonal solve (Thomas algorithm). Overwrites its inputs.
inline void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                              std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

struct FDConfig {
    double theta = 0.5;      // 0.5 = Crank-Nicolson
    double inner_tol = 1e-12;
    int max_inner = 50;

    void validate() const {
        if (!(theta >= 0.0 && theta <= 1.0))
            throw DomainError("fd config: theta must lie in [0,1]");
        if (!(inner_tol > 0.0)) throw DomainError("fd config: inner_tol must be > 0");
        if (max_inner < 1) throw DomainError("fd config: max_inner must be >= 1");
    }
};

struct FDReport {
    int max_inner_iterations = 0;
    bool inner_converged = true;
};

// Theta-scheme solve of v_t = v_xx + a v_x + b v + d F(v) (or + d (F(v))_x)
// with homogeneous Dirichlet walls, matching the damped-data convention.
// The implicit nonlinear term is handled by lagged inner iteration.
inline SpaceTimeField fd_solve(const HeatProblem& hp, const Grid& g,
                               const FDConfig& cfg = {}, FDReport* report = nullptr) {
    hp.validate();
    cfg.validate();
    g.validate();

    const int nx = g.n_x;
    const double h = g.h();
    const double dt = g.dt();
    const double a = hp.drift;
    const double b = hp.reaction;
    const double d = hp.nonlinearity_active() ? hp.nl_coeff : 0.0;
    const bool flux = hp.placement == HeatProblem::Placement::Flux;

    SpaceTimeField out(g);
    std::vector<double> v = sample_damped_data(hp, g);
    v.front() = 0.0;
    v.back() = 0.0;
    {
        auto s0 = out.slice(0);
        std::copy(v.begin(), v.end(), s0.begin());
    }

    const double cl = 1.0 / (h * h) - a / (2.0 * h);
    const double cc = -2.0 / (h * h) + b;
    const double cu = 1.0 / (h * h) + a / (2.0 * h);

    auto apply_linear = [&](const std::vector<double>& w, std::vector<double>& Lw) {
        Lw.assign(nx, 0.0);
        for (int j = 1; j + 1 < nx; ++j)
            Lw[j] = cl * w[j - 1] + cc * w[j] + cu * w[j + 1];
    };
    auto apply_nonlinear = [&](const std::vector<double>& w, std::vector<double>& Nw) {
        Nw.assign(nx, 0.0);
        if (d == 0.0) return;
        if (!flux) {
            for (int j = 1; j + 1 < nx; ++j) Nw[j] = d * hp.nl.eval(w[j]);
        } else {
            for (int j = 1; j + 1 < nx; ++j)
                Nw[j] = d * (hp.nl.eval(w[j + 1]) - hp.nl.eval(w[j - 1])) / (2.0 * h);
        }
    };

    std::vector<double> Lv, Nv, Nw, rhs, lower(nx), diag(nx), upper(nx), w;
    FDReport rep;
    for (int n = 1; n < g.n_t; ++n) {
        apply_linear(v, Lv);
        apply_nonlinear(v, Nv);
        std::vector<double> base(nx);
        for (int j = 0; j < nx; ++j)
            base[j] = v[j] + dt * (1.0 - cfg.theta) * (Lv[j] + Nv[j]);

        w = v; // lagged iterate
        int inner = 0;
        double change = 0.0;
        do {
            apply_nonlinear(w, Nw);
            rhs = base;
            for (int j = 1; j + 1 < nx; ++j) rhs[j] += dt * cfg.theta * Nw[j];
            for (int j = 0; j < nx; ++j) {
                lower[j] = -dt * cfg.theta * cl;
                diag[j] = 1.0 - dt * cfg.theta * cc;
                upper[j] = -dt * cfg.theta * cu;
            }
            lower[0] = upper[0] = 0.0;
            diag[0] = 1.0;
            rhs[0] = 0.0;
            lower[nx - 1] = upper[nx - 1] = 0.0;
            diag[nx - 1] = 1.0;
            rhs[nx - 1] = 0.0;
            solve_tridiagonal(lower, diag, upper, rhs);
            change = 0.0;
            for (int j = 0; j < nx; ++j) change = std::max(change, std::abs(rhs[j] - w[j]));
            w = rhs;
            ++inner;
        } while (d != 0.0 && cfg.theta > 0.0 && change > cfg.inner_tol &&
                 inner < cfg.max_inner);
        rep.max_inner_iterations = std::max(rep.max_inner_iterations, inner);
        if (d != 0.0 && cfg.theta > 0.0 && change > cfg.inner_tol) rep.inner_converged = false;

        v = w;
        auto sn = out.slice(n);
        std::copy(v.begin(), v.end(), sn.begin());
    }
    if (report) *report = rep;
    return out;
}

// Continuum solution of the linear problem v_t = v_xx + a v_x + b v with the
// given sampled data: e^{b t} (Phi(., t) * f)(x + a t), computed by direct
// quadrature at the shifted points. Independent of the convolution engine.
inline std::vector<double> exact_drift_reaction(std::span<const double> f, double t,
                                                double drift, double reaction,
                                                const Grid& g) {
    if (f.size() != static_cast<std::size_t>(g.n_x))
        throw DomainError("exact_drift_reaction: data length does not match grid");
    if (!(t >= 0.0)) throw DomainError("exact_drift_reaction: t must be >= 0");
    std::vector<double> out(g.n_x);
    if (t == 0.0) {
        std::copy(f.begin(), f.end(), out.begin());
        return out;
    }
    if (std::sqrt(2.0 * t) < 2.0 * g.h())
        throw ResolutionError("exact_drift_reaction: kernel at t unresolved by grid", t, g.h());
    const double h = g.h();
    const double growth = std::exp(reaction * t);
    for (int j = 0; j < g.n_x; ++j) {
        const double xs = g.x(j) + drift * t;
        double acc = 0.0;
        for (int i = 0; i < g.n_x; ++i) acc += heat_kernel(xs - g.x(i), t) * f[i];
        out[j] = growth * h * acc;
    }
    return out;
}

// Problem-aware wrapper: folds a linear nonlinearity into the effective
// drift or reaction coefficient; anything genuinely nonlinear has no exact
// formula and is rejected.
inline std::vector<double> exact_drift_reaction(const HeatProblem& hp,
                                                std::span<const double> f, double t,
                                                const Grid& g) {
    double a = hp.drift;
    double b = hp.reaction;
    if (hp.nonlinearity_active()) {
        if (hp.nl.kind() != Nonlinearity::Kind::Linear)
            throw DomainError(
                "exact_drift_reaction: only zero or linear nonlinearities have an exact "
                "solution");
        const double lam = hp.nl_coeff * hp.nl.eval(1.0);
        if (hp.placement == HeatProblem::Placement::Flux)
            a += lam;
        else
            b += lam;
    }
    return exact_drift_reaction(f, t, a, b, g);
}

} // namespace bsheat

#endif
