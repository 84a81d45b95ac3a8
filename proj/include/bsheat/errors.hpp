#ifndef BSHEAT_ERRORS_HPP
#define BSHEAT_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace bsheat {

// Invalid mathematical input: bad exponent, non-positive time where positive
// time is required, malformed payoff tables, coefficients outside the class
// the reduction can handle.
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Grid cannot resolve the requested kernel: sqrt(2*dt) < 2h.
class ResolutionError : public std::runtime_error {
public:
    ResolutionError(const std::string& what, double dt, double h)
        : std::runtime_error(what), dt_step(dt), spacing(h) {}
    double dt_step;
    double spacing;
};

// Fixed-point iteration exhausted max_iter without meeting tolerance.
// Carries the last measured contraction ratio so the caller can see whether
// the operator was actually contracting.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double ratio, int iterations)
        : std::runtime_error(what), measured_ratio(ratio), iterations(iterations) {}
    double measured_ratio;
    int iterations;
};

// Configuration rejected. Collects every violation found, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations(std::move(violations)) {}

    std::vector<std::string> violations;

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "invalid configuration:";
        for (const auto& s : v) {
            out += "\n  - ";
            out += s;
        }
        return out;
    }
};

} // namespace bsheat

#endif
