#pragma once

// Deterministic RNG plumbing. mt19937_64 has a standard-defined sequence;
// the modulo step is done with explicit rejection so draws are identical
// across platforms (std::uniform_int_distribution is not portable).

#include <cstdint>
#include <random>

namespace soltower {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Unbiased uniform draw in [0, n), n >= 1.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        for (;;) {
            std::uint64_t x = eng_();
            if (x < limit) return x % n;
        }
    }

    double unit_double() {
        return (eng_() >> 11) * (1.0 / 9007199254740992.0);
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace soltower
