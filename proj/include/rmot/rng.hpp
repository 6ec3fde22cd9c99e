#pragma once

#include <cmath>
#include <cstdint>

namespace rmot {

// splitmix64: the project-wide seedable generator. Every randomized fixture
// derives from it so corrupted corpora are reproducible bit-for-bit across
// platforms. Substreams are keyed by index (one per frame) so parallel
// generation stays deterministic. The exact update is documented in the
// README; do not change it without regenerating frozen fixtures.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Substream for a keyed unit of work (e.g. one frame index).
    SplitMix64 substream(std::uint64_t key) const {
        SplitMix64 mix(state_ ^ (0xA0761D6478BD642Full * (key + 1)));
        return SplitMix64(mix.next());
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1).
    double uniform_open() {
        double u;
        do { u = uniform(); } while (u == 0.0);
        return u;
    }

    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    // Box-Muller; second deviate of each pair is cached.
    double normal(double sigma = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_ * sigma;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a) * sigma;
    }

    // Knuth's product method; fine for the small rates used here.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        double p = 1.0;
        int k = 0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace rmot
