#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace hsad {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent deterministic stream for a (seed, index) pair. Used for
// per-tree / per-repeat seeding so parallel and sequential runs agree.
inline uint64_t derive_stream(uint64_t seed, uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 1));
}

// mt19937_64 with hand-rolled distributions. The engine output is fixed by
// the standard; std::*_distribution is not, so we never use it.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

    uint64_t next_u64() { return eng_(); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n), unbiased via rejection
    uint64_t uniform_int(uint64_t n) {
        if (n == 0) return 0;
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Box-Muller, pair cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    double exponential() {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return -std::log(u);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // First k entries of a random permutation of 0..n-1.
    std::vector<size_t> sample_without_replacement(size_t n, size_t k) {
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        if (k > n) k = n;
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(uniform_int(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace hsad
