#pragma once

#include <array>
#include <cstdint>

namespace graphwalk {

// xoshiro256** seeded through splitmix64.  Hand-rolled so that streams are
// identical across platforms and standard-library versions; every estimate
// records its seed for replay.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& si : state_) si = splitmix64(x);
    }

    // Worker streams are split deterministically from a master seed.
    static Rng for_worker(std::uint64_t master, std::uint64_t worker) {
        std::uint64_t x = master;
        std::uint64_t a = splitmix64(x);
        x = a ^ (worker * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
        Rng r(0);
        for (auto& si : r.state_) si = splitmix64(x);
        return r;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    std::uint32_t pick(std::uint32_t n) {
        return static_cast<std::uint32_t>(below(n));
    }

    // Uniform in [0, 1).
    double unit() { return double(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_;
};

}  // namespace graphwalk
