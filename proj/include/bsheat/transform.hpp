#ifndef BSHEAT_TRANSFORM_HPP
#define BSHEAT_TRANSFORM_HPP

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bsheat/errors.hpp"
#include "bsheat/grid.hpp"
#include "bsheat/nonlinearity.hpp"

// Reduction of the generalized pricing equation
//   u_tau + A S^2 u_SS + B S u_S + C u = D * N(u),
// posed backward from maturity, to a forward semilinear heat problem
//   v_t - v_xx = a v_x + b v + d * [F(v) or (F(v))_x]
// via x = ln S, t = A (maturity - tau). Values are carried unchanged;
// the coefficient map is recorded on the reduced problem so run manifests
// can show where a, b, d came from.

namespace bsheat {

struct Payoff {
    enum class Kind { Call, Put, CallSpread, Table };

    static Payoff call(double strike) {
        require_positive_strike(strike);
        Payoff p;
        p.kind = Kind::Call;
        p.strike = strike;
        return p;
    }

    static Payoff put(double strike) {
        require_positive_strike(strike);
        Payoff p;
        p.kind = Kind::Put;
        p.strike = strike;
        return p;
    }

    static Payoff call_spread(double lo, double hi) {
        require_positive_strike(lo);
        require_positive_strike(hi);
        if (!(hi > lo)) throw DomainError("call spread: upper strike must exceed lower");
        Payoff p;
        p.kind = Kind::CallSpread;
        p.strike = lo;
        p.strike2 = hi;
        return p;
    }

    static Payoff table(std::vector<std::pair<double, double>> points) {
        if (points.size() < 2) throw DomainError("payoff table: need at least 2 points");
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!(points[i].first > 0.0)) throw DomainError("payoff table: S values must be > 0");
            if (!std::isfinite(points[i].first) || !std::isfinite(points[i].second))
                throw DomainError("payoff table: entries must be finite");
            if (i > 0 && !(points[i].first > points[i - 1].first))
                throw DomainError("payoff table: S values must be strictly increasing");
        }
        Payoff p;
        p.kind = Kind::Table;
        p.points = std::move(points);
        return p;
    }

    double operator()(double S) const {
        if (!(S > 0.0)) throw DomainError("payoff: S must be > 0");
        switch (kind) {
            case Kind::Call: return std::max(S - strike, 0.0);
            case Kind::Put: return std::max(strike - S, 0.0);
            case Kind::CallSpread:
                return std::max(S - strike, 0.0) - std::max(S - strike2, 0.0);
            case Kind::Table: {
                if (S < points.front().first || S > points.back().first)
                    throw DomainError(
                        "payoff table does not cover S = " + std::to_string(S) +
                        "; widen the table or narrow the grid window");
                std::size_t i = 1;
                while (points[i].first < S) ++i;
                const double slope = (points[i].second - points[i - 1].second) /
                                     (points[i].first - points[i - 1].first);
                return points[i - 1].second + slope * (S - points[i - 1].first);
            }
        }
        return 0.0;
    }

    Kind kind = Kind::Call;
    double strike = 0.0;
    double strike2 = 0.0;
    std::vector<std::pair<double, double>> points;

private:
    static void require_positive_strike(double k) {
        if (!(k > 0.0)) throw DomainError("payoff: strike must be > 0");
    }
};

struct ModelSpec {
    enum class Form { Source, Flux };

    double A = 0.0; // S^2 u_SS coefficient
    double B = 0.0; // S u_S coefficient
    double C = 0.0; // u coefficient
    double D = 0.0; // nonlinearity coefficient on the right-hand side
    Form form = Form::Source;
    double maturity = 0.0;

    static ModelSpec classical(double sigma, double rate, double maturity) {
        if (!(sigma > 0.0)) throw DomainError("classical model: sigma must be > 0");
        if (!(maturity > 0.0)) throw DomainError("classical model: maturity must be > 0");
        ModelSpec m;
        m.A = 0.5 * sigma * sigma;
        m.B = rate;
        m.C = -rate;
        m.D = 0.0;
        m.maturity = maturity;
        return m;
    }

    bool is_classical(double tol = 1e-12) const {
        return D == 0.0 && std::abs(B + C) <= tol * std::max(1.0, std::abs(B)) && A > 0.0;
    }
};

// Forward semilinear heat problem on the line. Initial data is an analytic
// function of x so the same problem can be sampled onto grids of different
// resolution (refinement studies, oracle grids).
struct HeatProblem {
    enum class Placement { Source, Flux };

    double drift = 0.0;    // a, routed through the kernel-derivative estimate
    double reaction = 0.0; // b, routed through the plain estimate
    double nl_coeff = 0.0; // d
    Placement placement = Placement::Source;
    Nonlinearity nl = Nonlinearity::zero();
    std::function<double(double)> data;
    double p = 2.0; // L^p index used for norms and convergence

    struct Reduction {
        bool from_model = false;
        double A = 0.0, B = 0.0, C = 0.0, D = 0.0, maturity = 0.0;
        double heat_horizon = 0.0;
        std::string note;
    };
    Reduction reduction;

    bool nonlinearity_active() const { return nl_coeff != 0.0 && !nl.is_zero(); }

    void validate() const {
        if (!(p >= 1.0)) throw DomainError("heat problem: p must be >= 1");
        if (!std::isfinite(drift) || !std::isfinite(reaction) || !std::isfinite(nl_coeff))
            throw DomainError("heat problem: coefficients must be finite");
        if (!data) throw DomainError("heat problem: initial data not set");
        if (nonlinearity_active()) {
            if (placement == Placement::Source && drift == 0.0)
                throw DomainError(
                    "heat problem: source-placed nonlinearity pairs with a drift term");
            if (placement == Placement::Flux && reaction == 0.0)
                throw DomainError(
                    "heat problem: flux-placed nonlinearity pairs with a reaction term");
            if (placement == Placement::Source && !nl.zero_at_zero())
                throw DomainError(
                    "heat problem: source-placed nonlinearity must satisfy F(0) = 0");
        }
    }

    // Canonical source-form problem: v_t - v_xx = v_x + F(v).
    static HeatProblem source_form(Nonlinearity F, std::function<double(double)> f,
                                   double p = 2.0) {
        HeatProblem hp;
        hp.drift = 1.0;
        hp.reaction = 0.0;
        hp.nl_coeff = 1.0;
        hp.placement = Placement::Source;
        hp.nl = std::move(F);
        hp.data = std::move(f);
        hp.p = p;
        hp.validate();
        return hp;
    }

    // Canonical flux-form problem: v_t - v_xx = v + (F(v))_x.
    static HeatProblem flux_form(Nonlinearity F, std::function<double(double)> f,
                                 double p = 2.0) {
        HeatProblem hp;
        hp.drift = 0.0;
        hp.reaction = 1.0;
        hp.nl_coeff = 1.0;
        hp.placement = Placement::Flux;
        hp.nl = std::move(F);
        hp.data = std::move(f);
        hp.p = p;
        hp.validate();
        return hp;
    }
};

// (S, tau) -> (x, t). Requires S > 0 and tau within [0, maturity].
inline std::pair<double, double> to_heat_coords(double S, double tau, const ModelSpec& m) {
    if (!(S > 0.0)) throw DomainError("to_heat_coords: S must be > 0");
    if (!(tau >= 0.0 && tau <= m.maturity))
        throw DomainError("to_heat_coords: tau must lie in [0, maturity]");
    if (!(m.A > 0.0)) throw DomainError("to_heat_coords: requires A > 0");
    return {std::log(S), m.A * (m.maturity - tau)};
}

// (x, t) -> (S, tau). Requires t within [0, A * maturity].
inline std::pair<double, double> from_heat_coords(double x, double t, const ModelSpec& m) {
    if (!(m.A > 0.0)) throw DomainError("from_heat_coords: requires A > 0");
    if (!(t >= 0.0 && t <= m.A * m.maturity + 1e-15 * m.A * m.maturity))
        throw DomainError("from_heat_coords: t must lie in [0, A * maturity]");
    return {std::exp(x), m.maturity - t / m.A};
}

inline HeatProblem reduce_to_heat(const ModelSpec& m, const Payoff& payoff,
                                  Nonlinearity nl = Nonlinearity::zero(), double p = 2.0) {
    if (m.A == 0.0)
        throw DomainError(
            "model reduction impossible: the S^2 u_SS coefficient A is zero, so the "
            "equation cannot be rescaled to unit diffusion");
    if (m.A < 0.0)
        throw DomainError(
            "model reduction impossible: A < 0 turns the problem into backward heat "
            "flow, which the forward solver cannot treat");
    if (!(m.maturity > 0.0)) throw DomainError("model reduction: maturity must be > 0");

    HeatProblem hp;
    hp.drift = (m.B - m.A) / m.A;
    hp.reaction = m.C / m.A;
    hp.nl_coeff = -m.D / m.A;
    hp.placement =
        m.form == ModelSpec::Form::Source ? HeatProblem::Placement::Source
                                          : HeatProblem::Placement::Flux;
    hp.nl = std::move(nl);
    hp.data = [payoff](double x) { return payoff(std::exp(x)); };
    hp.p = p;
    hp.reduction.from_model = true;
    hp.reduction.A = m.A;
    hp.reduction.B = m.B;
    hp.reduction.C = m.C;
    hp.reduction.D = m.D;
    hp.reduction.maturity = m.maturity;
    hp.reduction.heat_horizon = m.A * m.maturity;
    hp.reduction.note = "a=(B-A)/A, b=C/A, d=-D/A absorbed by x=ln S, t=A*(maturity-tau)";
    hp.validate();
    return hp;
}

// Cosine taper to zero over a ramp of half the boundary layer at each window
// edge. Payoff data (e.g. calls) grows at the window edge and is not p-summable;
// the taper restores that while staying inside the excluded boundary layer.
inline double edge_taper(double x, const Grid& g) {
    const double w = 0.5 * g.boundary_layer();
    const double dl = x - g.x_min;
    const double dr = g.x_max - x;
    double t = 1.0;
    if (dl < w) t = std::min(t, 0.5 * (1.0 - std::cos(pi * std::max(dl, 0.0) / w)));
    if (dr < w) t = std::min(t, 0.5 * (1.0 - std::cos(pi * std::max(dr, 0.0) / w)));
    return t;
}

// Initial slice used by the solver and both oracles: data sampled at the
// nodes, tapered at the window edges.
inline std::vector<double> sample_damped_data(const HeatProblem& hp, const Grid& g) {
    std::vector<double> f(g.n_x);
    for (int j = 0; j < g.n_x; ++j) {
        const double v = hp.data(g.x(j)) * edge_taper(g.x(j), g);
        if (!std::isfinite(v))
            throw DomainError("initial data is not finite at x = " + std::to_string(g.x(j)));
        f[j] = v;
    }
    return f;
}

} // namespace bsheat

#endif
