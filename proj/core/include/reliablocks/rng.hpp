#pragma once

#include <array>
#include <cstdint>

namespace reliablocks {

// splitmix64, used only to expand a user seed into xoshiro state.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256** (Blackman/Vigna). Fixed by algorithm so golden feeds are
// reproducible from other languages.
class Xoshiro256StarStar {
public:
    explicit Xoshiro256StarStar(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    explicit Xoshiro256StarStar(const std::array<std::uint64_t, 4>& state) : s_(state) {}

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // (0, 1], safe as a log() argument
    double uniform01_open() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    const std::array<std::uint64_t, 4>& state() const { return s_; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
};

} // namespace reliablocks
