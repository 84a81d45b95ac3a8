#ifndef BSHEAT_RUNNER_HPP
#define BSHEAT_RUNNER_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsheat/config.hpp"
#include "bsheat/csv.hpp"
#include "bsheat/errors.hpp"
#include "bsheat/oracle.hpp"
#include "bsheat/picard.hpp"
#include "bsheat/quadrature.hpp"
#include "bsheat/serialize.hpp"

// Task execution. Each task writes its artifact into the output directory
// and reports pass/fail; the run manifest ties every artifact to the config
// hash. Outputs carry no timestamps, so a rerun of the same config produces
// byte-identical files.

namespace bsheat {

inline constexpr int constants_table_version = 1;

struct TaskOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunOutcome {
    std::vector<TaskOutcome> tasks;
    std::string output_dir;
    std::string manifest_hash;

    bool all_passed() const {
        for (const auto& t : tasks)
            if (!t.passed) return false;
        return !tasks.empty();
    }
};

namespace rundetail {

namespace fs = std::filesystem;

// Lock file guarding the output directory against concurrent runs.
class OutputLock {
public:
    explicit OutputLock(const fs::path& dir) : path_(dir / ".lock") {
        if (fs::exists(path_))
            throw DomainError("output directory is locked by another run (found " +
                              path_.string() + "); remove the lock file if that run is dead");
        std::ofstream f(path_);
        f << "locked\n";
        if (!f) throw DomainError("cannot create lock file: " + path_.string());
        armed_ = true;
    }
    ~OutputLock() {
        if (armed_) {
            std::error_code ec;
            fs::remove(path_, ec);
        }
    }
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    fs::path path_;
    bool armed_ = false;
};

inline void write_json_file(const fs::path& path, nlohmann::json j,
                            const std::string& manifest_hash) {
    j["manifest"] = manifest_hash;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw DomainError("write failed: " + path.string());
}

inline TaskOutcome run_solve(const RunConfig& cfg, const fs::path& dir,
                             std::vector<std::string>& outputs) {
    TaskOutcome out;
    out.name = task_name(Task::Solve);
    const PicardResult res = picard_solve(cfg.problem, cfg.grid, cfg.picard);
    const auto violations = res.report.check_invariants();

    nlohmann::json j = to_json(res.report);
    j["problem"] = to_json(cfg.problem);
    j["grid"] = to_json(cfg.grid);
    j["invariant_violations"] = violations;
    write_json_file(dir / "report.json", j, cfg.config_hash);
    write_field_csv((dir / "solution.csv").string(), res.field, cfg.config_hash);
    outputs.push_back("report.json");
    outputs.push_back("solution.csv");

    out.passed = res.report.converged && violations.empty();
    out.detail = "iterations=" + std::to_string(res.report.total_iterations) +
                 " subintervals=" + std::to_string(res.report.subintervals.size()) +
                 " residual=" + fmt_double(res.report.final_residual);
    if (!violations.empty()) out.detail += " violations=" + std::to_string(violations.size());
    return out;
}

inline TaskOutcome run_contraction_scan(const RunConfig& cfg, const fs::path& dir,
                                        std::vector<std::string>& outputs) {
    TaskOutcome out;
    out.name = task_name(Task::ContractionScan);

    DuhamelEngine probe(cfg.grid);
    const EnvelopeCalibration cal = detail::calibrate(cfg.problem, cfg.picard, probe);
    const ContractionEnvelope env = envelope_for(cfg.problem, cal);
    const double t_loc = choose_local_horizon(env, cfg.picard, cfg.grid.t_horizon);
    const int steps = std::min(cfg.grid.n_t - 1,
                               std::max(1, static_cast<int>(std::floor(t_loc / cfg.grid.dt() + 1e-12))));
    const Grid gl = detail::sub_grid(cfg.grid, steps);

    const std::vector<double> ratios =
        measure_contraction(cfg.problem, gl, cfg.picard, cfg.trials);
    double worst = 0.0;
    for (double r : ratios) worst = std::max(worst, r);
    const double bound = env.at(gl.t_horizon);
    const double threshold = bound * 1.1;

    write_json_file(dir / "contraction.json",
                    {{"t_used", gl.t_horizon},
                     {"envelope_alpha", env.alpha},
                     {"envelope_beta", env.beta},
                     {"envelope_at_t", bound},
                     {"threshold", threshold},
                     {"trials", cfg.trials},
                     {"ratios", ratios},
                     {"max_ratio", worst},
                     {"passed", worst < threshold}},
                    cfg.config_hash);
    outputs.push_back("contraction.json");

    out.passed = worst < threshold;
    out.detail = "max_ratio=" + fmt_double(worst) + " bound=" + fmt_double(bound) +
                 " t=" + fmt_double(gl.t_horizon);
    return out;
}

inline TaskOutcome run_lipschitz_check(const RunConfig& cfg, const fs::path& dir,
                                       std::vector<std::string>& outputs) {
    TaskOutcome out;
    out.name = task_name(Task::LipschitzCheck);

    const std::vector<double> f0 = sample_damped_data(cfg.problem, cfg.grid);
    double fpeak = 0.0;
    for (double v : f0) fpeak = std::max(fpeak, std::abs(v));
    const double scale = std::max(1e-3, 0.05 * fpeak);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double span = cfg.grid.x_max - cfg.grid.x_min;

    nlohmann::json entries = nlohmann::json::array();
    bool all_ok = true;
    double worst_margin = 0.0;
    for (int k = 0; k < cfg.pairs; ++k) {
        const double amp = scale * (0.5 + 0.5 * uni(rng)) * (uni(rng) < 0.5 ? -1.0 : 1.0);
        const double center = cfg.grid.x_min + span * (0.3 + 0.4 * uni(rng));
        const double width = span * (0.04 + 0.05 * uni(rng));
        auto base = cfg.problem.data;
        auto g_data = [base, amp, center, width](double x) {
            const double z = (x - center) / width;
            return base(x) + amp * std::exp(-0.5 * z * z);
        };
        const LipschitzResult lr =
            solution_map_lipschitz(cfg.problem, cfg.grid, cfg.picard, g_data);
        const bool ok = lr.ratio <= lr.bound * 1.05;
        all_ok = all_ok && ok;
        worst_margin = std::max(worst_margin, lr.ratio / lr.bound);
        entries.push_back({{"ratio", lr.ratio},
                           {"kappa", lr.kappa},
                           {"bound", lr.bound},
                           {"horizon", lr.horizon},
                           {"passed", ok}});
    }

    write_json_file(dir / "lipschitz.json",
                    {{"pairs", cfg.pairs}, {"entries", entries}, {"passed", all_ok}},
                    cfg.config_hash);
    outputs.push_back("lipschitz.json");

    out.passed = all_ok;
    out.detail = "pairs=" + std::to_string(cfg.pairs) +
                 " worst_ratio_over_bound=" + fmt_double(worst_margin);
    return out;
}

inline TaskOutcome run_oracle_compare(const RunConfig& cfg, const fs::path& dir,
                                      std::vector<std::string>& outputs) {
    TaskOutcome out;
    out.name = task_name(Task::OracleCompare);

    const Grid& g = cfg.grid;
    const auto ti = g.trust_interior();
    const PicardResult res = picard_solve(cfg.problem, g, cfg.picard);
    const std::vector<double> f0 = sample_damped_data(cfg.problem, g);
    double fpeak = 0.0;
    for (double v : f0) fpeak = std::max(fpeak, std::abs(v));
    const double data_scale = std::max(1.0, fpeak);

    nlohmann::json j;
    bool ok = true;
    std::string detail;

    // Finite-difference cross-check at the terminal slice.
    {
        const SpaceTimeField fd = fd_solve(cfg.problem, g, cfg.fd);
        double sup = 0.0;
        const int n = g.n_t - 1;
        for (int jx = ti.j_lo; jx <= ti.j_hi; ++jx)
            sup = std::max(sup, std::abs(res.field.at(n, jx) - fd.at(n, jx)));
        const double tol =
            10.0 * (g.h() * g.h() + g.dt() * g.dt()) * data_scale;
        j["fd"] = {{"sup_discrepancy", sup}, {"tolerance", tol}, {"passed", sup <= tol}};
        ok = ok && sup <= tol;
        detail += "fd_sup=" + fmt_double(sup);
    }

    // Exact linear solution when one exists.
    const bool linear = !cfg.problem.nonlinearity_active() ||
                        cfg.problem.nl.kind() == Nonlinearity::Kind::Linear;
    if (linear) {
        const auto exact = exact_drift_reaction(cfg.problem, f0, g.t_horizon, g);
        double sup = 0.0;
        const int n = g.n_t - 1;
        for (int jx = ti.j_lo; jx <= ti.j_hi; ++jx)
            sup = std::max(sup, std::abs(res.field.at(n, jx) - exact[jx]));
        const double tol = 5.0 * (g.h() * g.h() + g.dt()) * data_scale;
        j["exact_linear"] = {{"sup_discrepancy", sup}, {"tolerance", tol},
                             {"passed", sup <= tol}};
        ok = ok && sup <= tol;
        detail += " exact_sup=" + fmt_double(sup);
    }

    // Closed-form price for the classical vanilla case.
    if (cfg.model && cfg.payoff && cfg.model->is_classical() &&
        !cfg.problem.nonlinearity_active() &&
        (cfg.payoff->kind == Payoff::Kind::Call || cfg.payoff->kind == Payoff::Kind::Put)) {
        const double K = cfg.payoff->strike;
        const int n = g.n_t - 1;
        double worst_rel = 0.0;
        int points = 0;
        for (int jx = ti.j_lo; jx <= ti.j_hi; ++jx) {
            const double S = std::exp(g.x(jx));
            if (S < 0.8 * K || S > 1.25 * K) continue;
            const double ref = bs_closed_form(*cfg.model, *cfg.payoff, S, 0.0);
            if (ref < 1e-8) continue;
            worst_rel = std::max(worst_rel, std::abs(res.field.at(n, jx) - ref) / ref);
            ++points;
        }
        const bool price_ok = points > 0 && worst_rel < 1e-3;
        j["closed_form"] = {{"points", points},
                            {"max_rel_error", worst_rel},
                            {"tolerance", 1e-3},
                            {"passed", price_ok}};
        ok = ok && price_ok;
        detail += " price_rel=" + fmt_double(worst_rel);
    }

    j["passed"] = ok;
    write_json_file(dir / "oracle.json", j, cfg.config_hash);
    outputs.push_back("oracle.json");

    out.passed = ok;
    out.detail = detail;
    return out;
}

inline TaskOutcome run_kernel_selftest(const RunConfig& cfg, const fs::path& dir,
                                       std::vector<std::string>& outputs) {
    TaskOutcome out;
    out.name = task_name(Task::KernelSelftest);

    const std::vector<double> ps = {1.0, 2.0, 3.0};
    const std::vector<double> ts = {0.01, 0.1, 1.0, 10.0};
    double worst_rel = 0.0;
    double worst_slope_err = 0.0;
    nlohmann::json rows = nlohmann::json::array();
    for (double p : ps) {
        std::vector<double> plain(ts.size()), deriv(ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double cf = kernel_lp_norm(p, ts[i]);
            const double q = kernel_norm_by_quadrature(p, ts[i], false);
            const double cfd = kernel_dx_lp_norm(p, ts[i]);
            const double qd = kernel_norm_by_quadrature(p, ts[i], true);
            worst_rel = std::max(worst_rel, std::abs(cf - q) / q);
            worst_rel = std::max(worst_rel, std::abs(cfd - qd) / qd);
            plain[i] = q;
            deriv[i] = qd;
            rows.push_back({{"p", p}, {"t", ts[i]}, {"norm", cf}, {"quadrature", q},
                            {"dx_norm", cfd}, {"dx_quadrature", qd}});
        }
        const double slope = loglog_slope(ts, plain);
        const double slope_dx = loglog_slope(ts, deriv);
        worst_slope_err = std::max(worst_slope_err,
                                   std::abs(slope - (-(1.0 - 1.0 / p) / 2.0)));
        worst_slope_err = std::max(worst_slope_err,
                                   std::abs(slope_dx - (-(1.0 - 1.0 / (2.0 * p)) / 1.0)));
    }
    const bool ok = worst_rel < 1e-8 && worst_slope_err < 1e-6;

    write_json_file(dir / "kernel_selftest.json",
                    {{"rows", rows},
                     {"max_rel_error", worst_rel},
                     {"max_scaling_exponent_error", worst_slope_err},
                     {"passed", ok}},
                    cfg.config_hash);
    outputs.push_back("kernel_selftest.json");

    out.passed = ok;
    out.detail = "max_rel=" + fmt_double(worst_rel) +
                 " max_slope_err=" + fmt_double(worst_slope_err);
    return out;
}

} // namespace rundetail

inline void print_constants_table(std::ostream& os) {
    os << "constants_table_version=" << constants_table_version << "\n";
    os << "plain_route_time_integral_constant=1 (int_0^T ||K(tau)||_1 dtau = T)\n";
    os << "deriv_route_time_integral_constant=" << fmt_double(deriv_route_constant)
       << " (int_0^T ||K_x(tau)||_1 dtau = 2 sqrt(T/pi))\n";
    os << "p,kernel_lp_norm(p,1),kernel_dx_lp_norm(p,1),t_exponent_plain,t_exponent_dx\n";
    for (double p : {1.0, 2.0, 3.0, 4.0, 8.0, 64.0})
        os << fmt_double(p) << "," << fmt_double(kernel_lp_norm(p, 1.0)) << ","
           << fmt_double(kernel_dx_lp_norm(p, 1.0)) << ","
           << fmt_double(-(1.0 - 1.0 / p) / 2.0) << ","
           << fmt_double(-(1.0 - 1.0 / (2.0 * p))) << "\n";
}

inline void print_nonlinearities(std::ostream& os) {
    os << "zero            F(v) = 0                  L = 0            F(0)=0\n";
    os << "linear          F(v) = slope*v            L = |slope|      F(0)=0\n";
    os << "satsin          F(v) = amplitude*sin(v)   L = |amplitude|  F(0)=0\n";
    os << "clamped_power   F(v) = sign(v)|v|^q, tangent extension beyond radius R\n";
    os << "                L = q*R^(q-1); radius defaults to 4*sup|data|   F(0)=0\n";
    os << "table           piecewise linear through given points\n";
    os << "                L = max segment slope; F(0)=0 iff the table crosses zero\n";
}

inline RunOutcome run(const RunConfig& cfg, const std::string& output_dir_override = "",
                      int verbosity = 1, std::ostream* log = nullptr) {
    namespace fs = std::filesystem;
    RunOutcome outcome;
    outcome.output_dir = output_dir_override.empty() ? cfg.output_dir : output_dir_override;
    outcome.manifest_hash = cfg.config_hash;

    const fs::path dir(outcome.output_dir);
    fs::create_directories(dir);
    rundetail::OutputLock lock(dir);

    std::vector<std::string> outputs;
    for (Task t : cfg.tasks) {
        TaskOutcome to;
        switch (t) {
            case Task::Solve: to = rundetail::run_solve(cfg, dir, outputs); break;
            case Task::ContractionScan:
                to = rundetail::run_contraction_scan(cfg, dir, outputs);
                break;
            case Task::LipschitzCheck:
                to = rundetail::run_lipschitz_check(cfg, dir, outputs);
                break;
            case Task::OracleCompare:
                to = rundetail::run_oracle_compare(cfg, dir, outputs);
                break;
            case Task::KernelSelftest:
                to = rundetail::run_kernel_selftest(cfg, dir, outputs);
                break;
        }
        if (log && verbosity >= 1)
            *log << "[" << (to.passed ? "PASS" : "FAIL") << "] " << to.name
                 << (verbosity >= 2 && !to.detail.empty() ? "  " + to.detail : "") << "\n";
        outcome.tasks.push_back(std::move(to));
    }

    // Plain-text manifest; fixed field order, no timestamps.
    {
        std::ofstream m(dir / "manifest.txt", std::ios::binary);
        if (!m) throw DomainError("cannot write manifest");
        m << "config_hash=" << cfg.config_hash << "\n";
        m << "constants_table_version=" << constants_table_version << "\n";
        m << "seed=" << cfg.seed << "\n";
        m << "p=" << fmt_double(cfg.problem.p) << "\n";
        m << "problem: drift=" << fmt_double(cfg.problem.drift)
          << " reaction=" << fmt_double(cfg.problem.reaction)
          << " nl_coeff=" << fmt_double(cfg.problem.nl_coeff)
          << " placement="
          << (cfg.problem.placement == HeatProblem::Placement::Source ? "source" : "flux")
          << " nonlinearity=" << cfg.problem.nl.name()
          << " lipschitz=" << fmt_double(cfg.problem.nl.certified_lipschitz()) << "\n";
        if (cfg.problem.reduction.from_model)
            m << "reduction: A=" << fmt_double(cfg.problem.reduction.A)
              << " B=" << fmt_double(cfg.problem.reduction.B)
              << " C=" << fmt_double(cfg.problem.reduction.C)
              << " D=" << fmt_double(cfg.problem.reduction.D)
              << " maturity=" << fmt_double(cfg.problem.reduction.maturity)
              << " heat_horizon=" << fmt_double(cfg.problem.reduction.heat_horizon) << " ("
              << cfg.problem.reduction.note << ")\n";
        m << "grid: x_min=" << fmt_double(cfg.grid.x_min)
          << " x_max=" << fmt_double(cfg.grid.x_max) << " n_x=" << cfg.grid.n_x
          << " t_horizon=" << fmt_double(cfg.grid.t_horizon) << " n_t=" << cfg.grid.n_t
          << " tail_epsilon=" << fmt_double(cfg.grid.tail_epsilon) << "\n";
        m << "tasks:";
        for (Task t : cfg.tasks) m << " " << task_name(t);
        m << "\n";
        m << "results:";
        for (const auto& t : outcome.tasks)
            m << " " << t.name << "=" << (t.passed ? "pass" : "fail");
        m << "\n";
        m << "outputs:";
        for (const auto& o : outputs) m << " " << o;
        m << " manifest.txt\n";
    }
    return outcome;
}

} // namespace bsheat

#endif
