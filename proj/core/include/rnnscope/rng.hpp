#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace rnnscope {

/// Derive an independent stream seed from a base seed and a purpose tag.
/// FNV-1a over the tag mixed into the base via splitmix64, so distinct
/// pipeline stages never share a stream.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);

/// Deterministic random source. Wraps mt19937_64 (sequence pinned by the
/// standard) and hand-rolls the distributions, since the std distribution
/// algorithms are implementation-defined and the pipeline must reproduce
/// artifacts byte-for-byte.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n). Rejection sampling, n > 0.
    std::uint64_t uniform_int(std::uint64_t n);
    /// Standard normal via Box-Muller (second value cached).
    double normal();

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct indices from [0, n), in random order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace rnnscope
