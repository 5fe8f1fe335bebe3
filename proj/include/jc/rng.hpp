#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace jc {

// Counter-based random stream keyed by (master_seed, stream index).
// Each draw advances a counter through the splitmix64 finalizer, so streams
// are stateless apart from the counter and can be created per trajectory at
// negligible cost. Identical (seed, stream) always yields the identical
// sequence, independent of how work is scheduled across threads.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream)
        : state_(mix(mix(master_seed + 0x9E3779B97F4A7C15ULL) ^
                     mix(stream + 0xD1B54A32D192ED03ULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1], safe as a log argument
    double uniform_pos() { return 1.0 - uniform(); }

    // standard normal via Box-Muller (one value per call)
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // index drawn with probability weights[i] / sum(weights); weights >= 0,
    // zero-weight entries are never selected
    int weighted_choice(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        int last_positive = -1;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            last_positive = static_cast<int>(i);
            u -= weights[i];
            if (u < 0.0) return last_positive;
        }
        return last_positive; // rounding spill lands on the last positive weight
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace jc
