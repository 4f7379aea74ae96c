#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace fedgbdt {

/// Derive an independent child seed from a master seed, a role tag and a
/// numeric id.  Implemented as FNV-1a over the raw bytes followed by a
/// splitmix64 finalizer, so nearby masters or ids do not give nearby streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view role, std::uint64_t id = 0) {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](std::uint64_t byte) {
        h ^= byte;
        h *= 1099511628211ULL;
    };
    for (int i = 0; i < 8; ++i) mix((master >> (8 * i)) & 0xffULL);
    for (char c : role) mix(static_cast<unsigned char>(c));
    for (int i = 0; i < 8; ++i) mix((id >> (8 * i)) & 0xffULL);
    // splitmix64 finalizer
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

/// Deterministic random stream.  Uses std::mt19937_64 for the raw 64-bit
/// output (its sequence is fixed by the standard) but implements all
/// derived draws by hand: the std distributions and std::shuffle are
/// implementation-defined and would break reproducibility across builds.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Uniform double in [0, 1), 53-bit resolution.
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1); never returns an exact endpoint, safe for logs.
    double u01_open() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform integer in [0, n) via bitmask rejection (unbiased).
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t mask = mask_for(n - 1);
        std::uint64_t x;
        do {
            x = next() & mask;
        } while (x >= n);
        return x;
    }

    bool bernoulli(double p) { return u01() < p; }

    /// Laplace(0, scale) by inverse CDF on a symmetric open interval.
    double laplace(double scale) {
        const double u = u01_open() - 0.5; // (-0.5, 0.5)
        const double sign = u < 0.0 ? -1.0 : 1.0;
        return -scale * sign * std::log(1.0 - 2.0 * std::abs(u));
    }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = u01_open();
        const double u2 = u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Fisher-Yates shuffle with our own index draws.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct indices from [0, n), in draw order.
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> pool(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(k));
        for (int i = 0; i < k && i < n; ++i) {
            const std::size_t j = static_cast<std::size_t>(below(static_cast<std::uint64_t>(n - i))) +
                                  static_cast<std::size_t>(i);
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
            out.push_back(pool[static_cast<std::size_t>(i)]);
        }
        return out;
    }

private:
    static std::uint64_t mask_for(std::uint64_t v) {
        std::uint64_t m = v;
        m |= m >> 1;
        m |= m >> 2;
        m |= m >> 4;
        m |= m >> 8;
        m |= m >> 16;
        m |= m >> 32;
        return m;
    }

    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace fedgbdt
