#pragma once
#include <cstdint>
#include <cmath>
#include <string_view>

namespace bgadl {

// splitmix64 finalizer; the basis of the counter-based generator below.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream keys are derived by hashing (parent key, purpose tag, indices...).
// Every stochastic consumer gets its own named stream, so results do not
// depend on evaluation order or worker count.
inline std::uint64_t derive_key(std::uint64_t parent, std::string_view tag) {
    std::uint64_t h = parent ^ 0x517cc1b727220a95ULL;
    for (char c : tag) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return h;
}

inline std::uint64_t derive_key(std::uint64_t parent, std::uint64_t index) {
    return mix64(parent ^ mix64(index ^ 0xd1b54a32d192ed03ULL));
}

// Counter-based stream: stateless apart from the counter, cheap to copy.
// Same (key, counter) always produces the same draw.
struct RngStream {
    std::uint64_t key = 0;
    std::uint64_t counter = 0;
    bool has_spare = false;
    double spare = 0.0;

    RngStream() = default;
    explicit RngStream(std::uint64_t k) : key(k) {}

    std::uint64_t next_u64() { return mix64(key ^ mix64(counter++ ^ 0x632be59bd9b4e019ULL)); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal via Box-Muller; the pair's second value is cached
    double gaussian() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        // u1 in (0,1] so log stays finite
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare = r * std::sin(a);
        has_spare = true;
        return r * std::cos(a);
    }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection-free multiply-shift; bias is negligible for desk-scale n
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }
};

template <class... Ix>
inline RngStream named_stream(std::uint64_t seed, std::string_view tag, Ix... idx) {
    std::uint64_t k = derive_key(seed, tag);
    ((k = derive_key(k, static_cast<std::uint64_t>(idx))), ...);
    return RngStream(k);
}

template <class... Ix>
inline std::uint64_t named_key(std::uint64_t seed, std::string_view tag, Ix... idx) {
    std::uint64_t k = derive_key(seed, tag);
    ((k = derive_key(k, static_cast<std::uint64_t>(idx))), ...);
    return k;
}

} // namespace bgadl
