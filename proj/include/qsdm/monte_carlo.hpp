// Seedable measurement simulator for statistical validation of a solution.
//
// Generator: xoshiro256** (Blackman & Vigna), state seeded via splitmix64.
// Shots are drawn in fixed-size chunks; chunk k of a run with seed S uses a
// generator seeded with splitmix64 stream (S, k). Workers that split shots on
// the same chunk boundaries therefore reproduce the single-threaded counts.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "qsdm/bloch.hpp"
#include "qsdm/povm.hpp"
#include "qsdm/states.hpp"

namespace qsdm {

namespace detail {

class Xoshiro256StarStar {
  public:
    explicit Xoshiro256StarStar(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    static std::uint64_t splitmix64(std::uint64_t& s) {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::array<std::uint64_t, 4> state_{};
};

inline std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk_index) {
    std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (chunk_index + 1));
    Xoshiro256StarStar warm(s);
    return warm.next();
}

constexpr std::int64_t kChunkShots = 1 << 16;

}  // namespace detail

struct SimulationStats {
    std::int64_t shots = 0;
    std::array<std::array<std::int64_t, 4>, 3> counts{};  // state index x outcome label
    double p_success_hat = 0.0;
    double p_error_hat = 0.0;
    double p_inconclusive_hat = 0.0;
    double stderr_success = 0.0;
    std::uint64_t seed = 0;
    std::string generator = "xoshiro256**";
};

// Conditional outcome probabilities tr(E_mu rho), mu = 0..3. Tiny negative
// values from rounding are clamped; anything below -1e-12 means the POVM is
// invalid and is rejected.
inline std::array<double, 4> outcome_distribution(const BlochOperator& state, const Povm& povm) {
    std::array<double, 4> p{};
    double total = 0.0;
    for (int mu = 0; mu < 4; ++mu) {
        double v = pair_trace(povm.elements[static_cast<std::size_t>(mu)], state);
        if (v < -1e-12)
            throw std::invalid_argument("outcome_distribution: POVM element with negative probability");
        v = std::max(0.0, v);
        p[static_cast<std::size_t>(mu)] = v;
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-10)
        throw std::invalid_argument("outcome_distribution: probabilities do not sum to 1");
    for (auto& v : p) v /= total;
    return p;
}

inline SimulationStats simulate(const Ensemble& ens, const Povm& povm, std::int64_t shots,
                                std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("simulate: shots must be >= 1");

    std::array<std::array<double, 4>, 3> dist{};
    for (int i = 0; i < 3; ++i)
        dist[static_cast<std::size_t>(i)] =
            outcome_distribution(ens.states[static_cast<std::size_t>(i)], povm);

    SimulationStats stats;
    stats.shots = shots;
    stats.seed = seed;

    std::int64_t done = 0;
    for (std::uint64_t chunk = 0; done < shots; ++chunk) {
        detail::Xoshiro256StarStar rng(detail::chunk_seed(seed, chunk));
        const std::int64_t in_chunk = std::min(detail::kChunkShots, shots - done);
        for (std::int64_t k = 0; k < in_chunk; ++k) {
            const double us = rng.uniform();
            int i = 0;
            double acc = ens.priors[0];
            while (i < 2 && us >= acc) acc += ens.priors[static_cast<std::size_t>(++i)];
            const double uo = rng.uniform();
            int mu = 0;
            acc = dist[static_cast<std::size_t>(i)][0];
            while (mu < 3 && uo >= acc) acc += dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(++mu)];
            ++stats.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(mu)];
        }
        done += in_chunk;
    }

    std::int64_t success = 0, inconclusive = 0;
    for (int i = 0; i < 3; ++i) {
        success += stats.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i + 1)];
        inconclusive += stats.counts[static_cast<std::size_t>(i)][0];
    }
    const auto total = static_cast<double>(shots);
    stats.p_success_hat = static_cast<double>(success) / total;
    stats.p_inconclusive_hat = static_cast<double>(inconclusive) / total;
    stats.p_error_hat = 1.0 - stats.p_success_hat - stats.p_inconclusive_hat;
    stats.stderr_success =
        std::sqrt(stats.p_success_hat * (1.0 - stats.p_success_hat) / total);
    return stats;
}

}  // namespace qsdm
