#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace triage {

// mt19937_64 with hand-rolled draw helpers so that output streams do not
// depend on the standard library's distribution implementations.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double in_range(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Standard normal via Box-Muller.
    double gaussian() {
        double u1 = unit();
        double u2 = unit();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace triage
