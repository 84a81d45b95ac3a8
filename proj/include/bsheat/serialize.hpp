#ifndef BSHEAT_SERIALIZE_HPP
#define BSHEAT_SERIALIZE_HPP

#include <string>

#include <json.hpp>

#include "bsheat/grid.hpp"
#include "bsheat/picard.hpp"
#include "bsheat/transform.hpp"

// JSON views of run artifacts. nlohmann keeps object keys sorted and prints
// shortest round-trip doubles, so identical inputs serialize byte-identically.

namespace bsheat {

inline nlohmann::json to_json(const Grid& g) {
    return {
        {"x_min", g.x_min},       {"x_max", g.x_max},
        {"n_x", g.n_x},           {"t_horizon", g.t_horizon},
        {"n_t", g.n_t},           {"tail_epsilon", g.tail_epsilon},
        {"h", g.h()},             {"dt", g.dt()},
        {"trust_lo", g.trust_interior().lo}, {"trust_hi", g.trust_interior().hi},
    };
}

inline nlohmann::json to_json(const HeatProblem& hp) {
    nlohmann::json j{
        {"drift", hp.drift},
        {"reaction", hp.reaction},
        {"nl_coeff", hp.nl_coeff},
        {"placement",
         hp.placement == HeatProblem::Placement::Source ? "source" : "flux"},
        {"nonlinearity", hp.nl.name()},
        {"lipschitz", hp.nl.certified_lipschitz()},
        {"p", hp.p},
    };
    if (hp.nl.kind() == Nonlinearity::Kind::ClampedPower)
        j["clamp_radius"] = hp.nl.clamp_radius();
    if (hp.reduction.from_model) {
        j["reduced_from_model"] = {
            {"A", hp.reduction.A},
            {"B", hp.reduction.B},
            {"C", hp.reduction.C},
            {"D", hp.reduction.D},
            {"maturity", hp.reduction.maturity},
            {"heat_horizon", hp.reduction.heat_horizon},
            {"note", hp.reduction.note},
        };
    }
    return j;
}

inline nlohmann::json to_json(const SolveReport& r) {
    nlohmann::json subs = nlohmann::json::array();
    for (const auto& s : r.subintervals) {
        subs.push_back({
            {"t_start", s.t_start},
            {"t_length", s.t_length},
            {"steps", s.steps},
            {"iterations", s.iterations},
            {"measured_contraction_ratio", s.measured_ratio},
            {"theoretical_bound", s.theoretical_bound},
            {"residual", s.residual},
            {"iterate_distances", s.iterate_distances},
        });
    }
    return {
        {"converged", r.converged},
        {"fast_path_zero", r.fast_path_zero},
        {"clamp_activated", r.clamp_activated},
        {"total_iterations", r.total_iterations},
        {"final_residual", r.final_residual},
        {"p", r.p},
        {"tol", r.tol},
        {"safety", r.safety},
        {"envelope_alpha", r.envelope_alpha},
        {"envelope_beta", r.envelope_beta},
        {"calibration_plain", r.calibration_plain},
        {"calibration_deriv", r.calibration_deriv},
        {"local_horizon", r.local_horizon},
        {"taper_width", r.taper_width},
        {"slice_norms", r.slice_norms},
        {"subintervals", subs},
    };
}

} // namespace bsheat

#endif
