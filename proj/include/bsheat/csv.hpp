#ifndef BSHEAT_CSV_HPP
#define BSHEAT_CSV_HPP

#include <cstdio>
#include <fstream>
#include <string>

#include "bsheat/errors.hpp"
#include "bsheat/field.hpp"

namespace bsheat {

// Shortest exact decimal form; %.17g round-trips doubles and is locale-free
// enough for our purposes (we never set a locale).
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Field export: metadata header, then a column of x and one value column per
// time slice. Every output cross-references the run manifest by hash.
inline void write_field_csv(const std::string& path, const SpaceTimeField& u,
                            const std::string& manifest_hash) {
    const Grid& g = u.grid();
    const auto ti = g.trust_interior();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open for writing: " + path);
    out << "# x_min=" << fmt_double(g.x_min) << " x_max=" << fmt_double(g.x_max)
        << " n_x=" << g.n_x << " t_horizon=" << fmt_double(g.t_horizon) << " n_t=" << g.n_t
        << " h=" << fmt_double(g.h()) << " dt=" << fmt_double(g.dt())
        << " tail_epsilon=" << fmt_double(g.tail_epsilon)
        << " trust_lo=" << fmt_double(ti.lo) << " trust_hi=" << fmt_double(ti.hi)
        << " manifest=" << manifest_hash << "\n";
    out << "x";
    for (int n = 0; n < g.n_t; ++n) out << ",t=" << fmt_double(g.t(n));
    out << "\n";
    for (int j = 0; j < g.n_x; ++j) {
        out << fmt_double(g.x(j));
        for (int n = 0; n < g.n_t; ++n) out << "," << fmt_double(u.at(n, j));
        out << "\n";
    }
    if (!out) throw DomainError("write failed: " + path);
}

} // namespace bsheat

#endif
