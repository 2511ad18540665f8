#include "qdiff/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qdiff {

std::uint64_t Rng::mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix(mix(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL))) {}

std::uint64_t Rng::next_u64() { return mix(key_ ^ mix(++counter_)); }

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

int Rng::below(int k) {
    if (k <= 0) throw std::invalid_argument("Rng::below needs k > 0");
    // Lemire-style multiply-shift; bias is below 2^-32 for the small k used here.
    const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned>(k);
    return static_cast<int>(m >> 64);
}

}  // namespace qdiff
