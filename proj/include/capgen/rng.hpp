#pragma once

#include <cstdint>
#include <string_view>

namespace capgen::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Finalizer from the splitmix64 generator. Integer-only, so results are
// identical on every platform.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (splitmix64(b) + kGolden + (a << 6) + (a >> 2)));
}

// FNV-1a over the bytes, folded through splitmix64 with a keyed start.
inline std::uint64_t hash_bytes(std::uint64_t key, std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull ^ splitmix64(key);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return splitmix64(h);
}

// Top 53 bits -> [0, 1) double, exact in IEEE-754.
inline double u01(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1p-53; }

// Top 24 bits -> [0, 1) float; max value (2^24-1)/2^24 stays below 1.0f.
inline float u01f(std::uint64_t h) { return static_cast<float>(h >> 40) * 0x1p-24f; }

// Counter-based stream: draw n yields splitmix64(key + n*golden), the plain
// splitmix64 sequence seeded at `key`.
class Stream {
public:
    explicit Stream(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        std::uint64_t x = state_;
        state_ += kGolden;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    double next_u01() { return u01(next_u64()); }

    double next_uniform(double lo, double hi) { return lo + next_u01() * (hi - lo); }

    // Unbiased-enough index draw via 64x64 -> high 64 multiply.
    std::size_t next_below(std::size_t n) {
        return static_cast<std::size_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

// Fisher-Yates with the counter stream; std::shuffle is not stable across
// standard libraries.
template <typename Vec>
void shuffle(Vec& v, Stream& stream) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = stream.next_below(i);
        using std::swap;
        swap(v[i - 1], v[j]);
    }
}

}  // namespace capgen::rng
