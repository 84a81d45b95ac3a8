#ifndef BSHEAT_NONLINEARITY_HPP
#define BSHEAT_NONLINEARITY_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bsheat/errors.hpp"

// Catalog of globally Lipschitz nonlinearities with certified constants.
// The fixed-point horizon is chosen from certified_lipschitz(), so every
// entry must report a bound that its eval() actually obeys; the test suite
// checks this with sampled difference quotients.

namespace bsheat {

class Nonlinearity {
public:
    enum class Kind { Zero, Linear, SatSin, ClampedPower, Table };

    static Nonlinearity zero() { return Nonlinearity(Kind::Zero); }

    static Nonlinearity linear(double slope) {
        Nonlinearity f(Kind::Linear);
        f.a_ = slope;
        return f;
    }

    // amplitude * sin(v): bounded by |amplitude|, Lipschitz |amplitude|.
    static Nonlinearity sat_sin(double amplitude) {
        Nonlinearity f(Kind::SatSin);
        f.a_ = amplitude;
        return f;
    }

    // sign(v)|v|^q inside [-R, R], tangent-line extension outside. The
    // extension keeps the function C^1 at +-R and globally Lipschitz with
    // constant q R^(q-1); the raw power alone is not globally Lipschitz.
    static Nonlinearity clamped_power(double q, double radius) {
        if (!(q >= 1.0)) throw DomainError("clamped_power: exponent must be >= 1");
        if (!(radius > 0.0)) throw DomainError("clamped_power: radius must be > 0");
        Nonlinearity f(Kind::ClampedPower);
        f.a_ = q;
        f.b_ = radius;
        return f;
    }

    // Piecewise-linear table, end segments extended with their own slopes.
    static Nonlinearity table(std::vector<std::pair<double, double>> points) {
        if (points.size() < 2) throw DomainError("table nonlinearity: need at least 2 points");
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!std::isfinite(points[i].first) || !std::isfinite(points[i].second))
                throw DomainError("table nonlinearity: points must be finite");
            if (i > 0 && !(points[i].first > points[i - 1].first))
                throw DomainError("table nonlinearity: abscissae must be strictly increasing");
        }
        Nonlinearity f(Kind::Table);
        f.points_ = std::move(points);
        return f;
    }

    Kind kind() const { return kind_; }

    double eval(double v) const {
        switch (kind_) {
            case Kind::Zero: return 0.0;
            case Kind::Linear: return a_ * v;
            case Kind::SatSin: return a_ * std::sin(v);
            case Kind::ClampedPower: {
                const double av = std::abs(v);
                const double s = v < 0.0 ? -1.0 : 1.0;
                if (av <= b_) return s * std::pow(av, a_);
                return s * (std::pow(b_, a_) + a_ * std::pow(b_, a_ - 1.0) * (av - b_));
            }
            case Kind::Table: return eval_table(v);
        }
        return 0.0;
    }

    double certified_lipschitz() const {
        switch (kind_) {
            case Kind::Zero: return 0.0;
            case Kind::Linear: return std::abs(a_);
            case Kind::SatSin: return std::abs(a_);
            case Kind::ClampedPower: return a_ * std::pow(b_, a_ - 1.0);
            case Kind::Table: {
                double worst = 0.0;
                for (std::size_t i = 1; i < points_.size(); ++i) {
                    const double slope = (points_[i].second - points_[i - 1].second) /
                                         (points_[i].first - points_[i - 1].first);
                    worst = std::max(worst, std::abs(slope));
                }
                return worst;
            }
        }
        return 0.0;
    }

    // Whether F(0) = 0 is guaranteed; the solver's zero-data fast path and
    // the vanishing-at-zero assumption on source-form problems rely on it.
    bool zero_at_zero() const {
        if (kind_ == Kind::Table) return std::abs(eval_table(0.0)) == 0.0;
        return true;
    }

    bool is_zero() const {
        return kind_ == Kind::Zero ||
               (kind_ != Kind::ClampedPower && certified_lipschitz() == 0.0 && zero_at_zero());
    }

    // True when v lies in the tangent-extension region of a clamped power.
    bool clamp_active(double v) const {
        return kind_ == Kind::ClampedPower && std::abs(v) > b_;
    }

    double clamp_radius() const { return kind_ == Kind::ClampedPower ? b_ : 0.0; }

    std::string name() const {
        switch (kind_) {
            case Kind::Zero: return "zero";
            case Kind::Linear: return "linear";
            case Kind::SatSin: return "satsin";
            case Kind::ClampedPower: return "clamped_power";
            case Kind::Table: return "table";
        }
        return "?";
    }

private:
    explicit Nonlinearity(Kind k) : kind_(k) {}

    double eval_table(double v) const {
        const auto& p = points_;
        std::size_t i;
        if (v <= p.front().first) i = 1;
        else if (v >= p.back().first) i = p.size() - 1;
        else {
            i = 1;
            while (p[i].first < v) ++i;
        }
        const double slope = (p[i].second - p[i - 1].second) / (p[i].first - p[i - 1].first);
        return p[i - 1].second + slope * (v - p[i - 1].first);
    }

    Kind kind_;
    double a_ = 0.0; // slope / amplitude / exponent
    double b_ = 0.0; // clamp radius
    std::vector<std::pair<double, double>> points_;
};

} // namespace bsheat

#endif
