#ifndef BSHEAT_FFT_HPP
#define BSHEAT_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "bsheat/errors.hpp"
#include "bsheat/kernel.hpp"

namespace bsheat::fft {

using cdouble = std::complex<double>;

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative radix-2 Cooley-Tukey with precomputed twiddle tables.
// Deterministic: fixed butterfly order, no threading.
class Plan {
public:
    explicit Plan(std::size_t n) : n_(n) {
        if (n == 0 || (n & (n - 1)) != 0) throw DomainError("fft: size must be a power of two");
        bitrev_.resize(n);
        for (std::size_t i = 1, j = 0; i < n; ++i) {
            std::size_t bit = n >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            bitrev_[i] = j;
        }
        // One table per stage, forward sign; inverse conjugates on the fly.
        for (std::size_t len = 2; len <= n; len <<= 1) {
            std::vector<cdouble> w(len / 2);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const double ang = -2.0 * pi * static_cast<double>(k) / static_cast<double>(len);
                w[k] = {std::cos(ang), std::sin(ang)};
            }
            twiddles_.push_back(std::move(w));
        }
    }

    std::size_t size() const { return n_; }

    void forward(std::vector<cdouble>& a) const { run(a, false); }

    void inverse(std::vector<cdouble>& a) const {
        run(a, true);
        const double inv_n = 1.0 / static_cast<double>(n_);
        for (auto& v : a) v *= inv_n;
    }

private:
    void run(std::vector<cdouble>& a, bool inv) const {
        if (a.size() != n_) throw DomainError("fft: buffer length does not match plan");
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t j = bitrev_[i];
            if (i < j) std::swap(a[i], a[j]);
        }
        std::size_t stage = 0;
        for (std::size_t len = 2; len <= n_; len <<= 1, ++stage) {
            const auto& w = twiddles_[stage];
            const std::size_t half = len / 2;
            for (std::size_t i = 0; i < n_; i += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    const cdouble tw = inv ? std::conj(w[k]) : w[k];
                    const cdouble u = a[i + k];
                    const cdouble v = a[i + k + half] * tw;
                    a[i + k] = u + v;
                    a[i + k + half] = u - v;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<std::vector<cdouble>> twiddles_;
};

} // namespace bsheat::fft

#endif
