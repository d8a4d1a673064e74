#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "distlab/errors.hpp"

namespace distlab {

// SplitMix64-based splittable generator. Streams are derived by hashing
// (seed, tag...) so that (seed, module, index) always names the same stream
// regardless of thread scheduling or evaluation order. All runs in this
// project draw randomness exclusively through derived streams.
class rng {
  public:
    explicit rng(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ULL)) {}

    // New independent stream identified by the tag sequence.
    [[nodiscard]] rng derive(std::initializer_list<std::uint64_t> tags) const {
        std::uint64_t h = state_;
        for (std::uint64_t t : tags) h = mix(h ^ mix(t + 0xbf58476d1ce4e5b9ULL));
        return rng(from_state{}, h);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform in [0,1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Modulo bias is ~n/2^64, irrelevant here.
    int next_int(int n) {
        if (n <= 0) throw parameter_error("rng::next_int: n must be positive");
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    // Index sampled by CDF inversion. Probabilities need not be exactly
    // normalized; the final index absorbs the residual.
    int sample_categorical(std::span<const double> probs) {
        const double u = next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    int sample_categorical(const std::vector<double>& probs) {
        return sample_categorical(std::span<const double>(probs.data(), probs.size()));
    }

  private:
    struct from_state {};
    rng(from_state, std::uint64_t s) : state_(s) {}

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

// Stream tags for the modules that consume randomness. Call sites derive as
// rng(seed).derive({stream::X, index, ...}).
namespace stream {
inline constexpr std::uint64_t context = 0x10;
inline constexpr std::uint64_t action = 0x11;
inline constexpr std::uint64_t cost = 0x12;
inline constexpr std::uint64_t transition = 0x13;
inline constexpr std::uint64_t targets = 0x14;
inline constexpr std::uint64_t data = 0x15;
inline constexpr std::uint64_t trial = 0x16;
inline constexpr std::uint64_t generator = 0x17;
} // namespace stream

} // namespace distlab
