#pragma once

#include <cstdint>

namespace qdiff {

// Counter-based generator: the i-th draw of stream s under seed k is a pure
// function of (k, s, i), so results do not depend on execution order.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double uniform();  // [0, 1)
    double normal();   // standard normal, Box-Muller
    int below(int k);  // uniform integer in [0, k)

    static std::uint64_t mix(std::uint64_t x);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace qdiff
