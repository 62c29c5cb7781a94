#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace csi2img {

// SplitMix64, used for seeding and stream derivation.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// xoshiro256++ with hand-rolled distributions. The standard library engines
// are portable but its distributions are not, and dataset/checkpoint files
// must be reproducible byte for byte from a seed.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    uint64_t next() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // [0, 1)
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive range. Spans here are tiny (class ids, jitter), so the
    // modulo bias is far below anything observable.
    int uniform_int(int lo, int hi) {
        const uint64_t span = uint64_t(int64_t(hi) - int64_t(lo)) + 1;
        return lo + int(next() % span);
    }

    // Box-Muller, cosine branch only: fixed two draws per call.
    double normal() {
        const double u1 = double((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = double(next() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<uint64_t, 4> state_;
};

// Stream tags, one per independent consumer of randomness.
enum : uint64_t {
    kStreamSceneTrain = 1,
    kStreamSceneTest = 2,
    kStreamNoiseTrain = 3,
    kStreamNoiseTest = 4,
    kStreamInitGenerator = 5,
    kStreamInitDiscriminator = 6,
    kStreamBatch = 7,
    kStreamDropout = 8,
    kStreamHybridNoise = 9,
};

inline uint64_t mix_seed(uint64_t seed, uint64_t tag, uint64_t index = 0) {
    uint64_t s = seed;
    uint64_t h = splitmix64(s);
    s ^= tag + 0x9e3779b97f4a7c15ull;
    h ^= splitmix64(s);
    s ^= index + 0x632be59bd9b4e019ull;
    h ^= splitmix64(s);
    return h;
}

inline Rng make_stream(uint64_t seed, uint64_t tag, uint64_t index = 0) {
    return Rng(mix_seed(seed, tag, index));
}

}  // namespace csi2img
