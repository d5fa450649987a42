#pragma once

#include <atomic>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lfl {

using complex = std::complex<double>;

/// Raised when a field develops NaN/Inf or a numerically impossible state.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised on malformed run configurations (unknown keys, bad values).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a curvature matrix fails strict positivity at a grid point.
struct not_positive_error : std::runtime_error {
    std::int64_t point;
    explicit not_positive_error(std::int64_t flat_index)
        : std::runtime_error("curvature matrix not positive definite at grid point " +
                             std::to_string(flat_index)),
          point(flat_index) {}
};

// ---------------------------------------------------------------------------
// SplitMix64: keyed deterministic stream for seeded coefficients.

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    /// Uniform double in [-1, 1).
    double uniform_sym() {
        return static_cast<double>(next() >> 11) * (2.0 / 9007199254740992.0) - 1.0;
    }
};

/// Stream key for a (seed, frequency multi-index) pair; component order matters.
inline std::uint64_t key_for_frequency(std::uint64_t seed, const std::vector<int>& k) {
    std::uint64_t key = splitmix64_mix(seed);
    for (int ka : k) {
        key = splitmix64_mix(key ^ (0x9E3779B97F4A7C15ULL *
                                    static_cast<std::uint64_t>(static_cast<std::int64_t>(ka) + 1000003)));
    }
    return key;
}

// ---------------------------------------------------------------------------
// FNV-1a 64, used for golden checksums of binary payloads.

inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Worker pool. LFL_THREADS caps parallelism; outputs never depend on the
// thread count (disjoint writes, fixed-block reductions).

inline int thread_count() {
    static int cached = [] {
        if (const char* env = std::getenv("LFL_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) return v;
        }
        unsigned hw = std::thread::hardware_concurrency();
        int v = hw == 0 ? 1 : static_cast<int>(hw);
        return v > 16 ? 16 : v;
    }();
    return cached;
}

/// fn(begin, end) over a partition of [0, n).
template <class Fn>
void parallel_for(std::int64_t n, Fn&& fn) {
    int nt = thread_count();
    if (nt <= 1 || n < 4096) {
        if (n > 0) fn(std::int64_t{0}, n);
        return;
    }
    std::int64_t chunk = (n + nt - 1) / nt;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) {
        std::int64_t b = t * chunk;
        std::int64_t e = b + chunk < n ? b + chunk : n;
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

namespace detail {
constexpr std::int64_t kReduceBlock = 8192;
}

/// Deterministic sum: fixed 8192-element blocks, partials combined in block
/// order regardless of how many workers ran.
template <class T, class Fn>
T block_sum(std::int64_t n, Fn&& term) {
    if (n <= 0) return T{};
    std::int64_t nblocks = (n + detail::kReduceBlock - 1) / detail::kReduceBlock;
    std::vector<T> partial(static_cast<std::size_t>(nblocks), T{});
    parallel_for(nblocks, [&](std::int64_t b0, std::int64_t b1) {
        for (std::int64_t b = b0; b < b1; ++b) {
            std::int64_t lo = b * detail::kReduceBlock;
            std::int64_t hi = lo + detail::kReduceBlock < n ? lo + detail::kReduceBlock : n;
            T acc{};
            for (std::int64_t i = lo; i < hi; ++i) acc += term(i);
            partial[static_cast<std::size_t>(b)] = acc;
        }
    });
    T total{};
    for (const T& p : partial) total += p;
    return total;
}

template <class Fn>
double block_max(std::int64_t n, Fn&& term) {
    if (n <= 0) return 0.0;
    std::int64_t nblocks = (n + detail::kReduceBlock - 1) / detail::kReduceBlock;
    std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
    parallel_for(nblocks, [&](std::int64_t b0, std::int64_t b1) {
        for (std::int64_t b = b0; b < b1; ++b) {
            std::int64_t lo = b * detail::kReduceBlock;
            std::int64_t hi = lo + detail::kReduceBlock < n ? lo + detail::kReduceBlock : n;
            double m = term(lo);
            for (std::int64_t i = lo + 1; i < hi; ++i) {
                double v = term(i);
                if (v > m) m = v;
            }
            partial[static_cast<std::size_t>(b)] = m;
        }
    });
    double total = partial[0];
    for (double p : partial)
        if (p > total) total = p;
    return total;
}

}  // namespace lfl
