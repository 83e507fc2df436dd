#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nct {

/// mt19937_64 with hand-rolled draws, so shuffles and samples are
/// reproducible across standard libraries.
class DeterministicRng {
public:
    explicit DeterministicRng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    /// Uniform in [0, 1) with 53 bits.
    double next_unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct indices out of [0, n), by partial Fisher-Yates.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(next_below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace nct
