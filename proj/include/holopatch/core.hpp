#ifndef HOLOPATCH_CORE_HPP
#define HOLOPATCH_CORE_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace holopatch {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

inline bool is_finite(cplx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// Neumaier compensated accumulator. Fixed summation order keeps results
/// bit-stable across runs.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

struct KahanSumC {
    KahanSum re, im;
    void add(cplx z) {
        re.add(z.real());
        im.add(z.imag());
    }
    cplx value() const { return {re.value(), im.value()}; }
};

// ----------------------------------------------------------------------------
// Deterministic RNG. splitmix64 core with portable uniform doubles so that
// reports are byte-identical for a fixed seed on any platform.
// ----------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform on the closed unit disk.
    cplx unit_disk() {
        while (true) {
            double x = uniform(-1.0, 1.0), y = uniform(-1.0, 1.0);
            if (x * x + y * y <= 1.0) return {x, y};
        }
    }

private:
    std::uint64_t state_;
};

// Quantized position key, used to match samples shared between compacts.
// Exact (collision-free) for coordinates below ~2^31 quanta.
inline std::uint64_t position_key(cplx z, double h) {
    const double q = h / 1024.0;
    auto ix = static_cast<std::int32_t>(std::llround(z.real() / q));
    auto iy = static_cast<std::int32_t>(std::llround(z.imag() / q));
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32)
         | static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy));
}

}  // namespace holopatch

#endif
