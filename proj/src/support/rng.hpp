#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace gcrp {

// splitmix64-based generator. std::mt19937 + <random> distributions are
// implementation-defined, which would break the byte-identical dataset and
// checkpoint guarantees, so sampling is done from raw 64-bit draws here.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    uint64_t uniform_index(uint64_t n) { return n ? next_u64() % n : 0; }

    int64_t uniform_int(int64_t lo, int64_t hi) {  // inclusive bounds
        return lo + static_cast<int64_t>(uniform_index(static_cast<uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; one cached spare per draw pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Normal(0, std) with |z| <= 2*std, resampled on overflow.
    double truncated_normal(double std_dev) {
        double z = normal();
        while (std::abs(z) > 2.0) z = normal();
        return z * std_dev;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Stable derived stream, e.g. per-sample augmentation seeds
    // hash(global seed, epoch, index).
    static uint64_t derive(uint64_t a, uint64_t b, uint64_t c = 0) {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (uint64_t x : {a, b, c}) {
            for (int i = 0; i < 8; ++i) {
                h ^= (x >> (8 * i)) & 0xffULL;
                h *= 0x100000001b3ULL;
            }
        }
        return h;
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace gcrp
