#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace mde {

/// Seeded generator used by every randomized component. Raw output is
/// std::mt19937_64, whose sequence is fixed by the standard; bounded draws use
/// rejection sampling instead of std::uniform_int_distribution so that traces
/// are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Uniform in [0, n). `n` must be positive.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    /// Uniform in [lo, hi].
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

    /// True with probability num/den.
    bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

    template <class Vec>
    auto& pick(Vec& v) {
        return v[below(v.size())];
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace mde
