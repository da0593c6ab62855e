#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "rmpa/rm_code.hpp"

namespace rmpa {

// LLR vector indexed by z, sign convention: positive favors bit 0.
using LlrVector = std::vector<double>;

// Saturation applied to channel LLRs. exp(40) is far beyond any decision
// boundary, so the clamp has no measurable effect on error rates while
// keeping the projection arithmetic finite.
inline constexpr double kDefaultLlrCap = 40.0;

enum class ChannelKind { AwgnBpsk, Bsc };

struct ChannelConfig {
    ChannelKind kind = ChannelKind::AwgnBpsk;
    double ebn0_db = 0.0;    // AWGN only
    double crossover = 0.1;  // BSC only, in (0, 0.5)
    double rate = 0.5;       // k/n, fixes the Eb/N0 to sigma conversion
    double llr_cap = kDefaultLlrCap;
};

// Deterministic substream: the same (master_seed, stream_id) pair always
// yields the same sequence, independent of scheduling or worker count.
// Streams are value types; one per Monte Carlo trial.
class RngStream {
  public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : master_seed_(master_seed), stream_id_(stream_id) {
        std::uint64_t s = mix64(master_seed ^ 0x8a5cd789635d2dffULL);
        s = mix64(s + 0x9e3779b97f4a7c15ULL * (stream_id + 1));
        engine_.seed(s);
    }

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, bound)
    std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

    // standard normal via Box-Muller; the spare half of each pair is cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 == 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Noise standard deviation for unit-energy BPSK:
// sigma^2 = 1 / (2 * rate * 10^(ebn0_db/10)).
inline double noise_sigma(const ChannelConfig& cfg) {
    if (cfg.kind != ChannelKind::AwgnBpsk)
        throw std::invalid_argument("noise_sigma: AWGN channel required");
    if (cfg.rate <= 0.0) throw std::invalid_argument("noise_sigma: rate must be positive");
    return std::sqrt(1.0 / (2.0 * cfg.rate * std::pow(10.0, cfg.ebn0_db / 10.0)));
}

inline double bsc_llr_magnitude(const ChannelConfig& cfg) {
    if (cfg.kind != ChannelKind::Bsc)
        throw std::invalid_argument("bsc_llr_magnitude: BSC channel required");
    if (cfg.crossover <= 0.0 || cfg.crossover >= 0.5)
        throw std::invalid_argument("bsc_llr_magnitude: crossover must be in (0, 0.5)");
    return std::log((1.0 - cfg.crossover) / cfg.crossover);
}

inline double clamp_llr(double v, double cap) {
    if (v > cap) return cap;
    if (v < -cap) return -cap;
    return v;
}

// Modulates (bit 0 -> +1, bit 1 -> -1), applies the channel, and returns the
// capped LLR vector. AWGN: L = 2y/sigma^2. BSC: L = +/- ln((1-eps)/eps).
inline LlrVector transmit(const Codeword& code_word, const ChannelConfig& cfg, RngStream& rng) {
    const std::size_t n = code_word.size();
    LlrVector llr(n);
    if (cfg.kind == ChannelKind::AwgnBpsk) {
        const double sigma = noise_sigma(cfg);
        const double scale = 2.0 / (sigma * sigma);
        for (std::size_t z = 0; z < n; ++z) {
            const double symbol = code_word[z] ? -1.0 : 1.0;
            const double received = symbol + sigma * rng.normal();
            llr[z] = clamp_llr(scale * received, cfg.llr_cap);
        }
    } else {
        const double mag = clamp_llr(bsc_llr_magnitude(cfg), cfg.llr_cap);
        for (std::size_t z = 0; z < n; ++z) {
            const bool flip = rng.uniform01() < cfg.crossover;
            const std::uint8_t received = code_word[z] ^ static_cast<std::uint8_t>(flip);
            llr[z] = received ? -mag : mag;
        }
    }
    return llr;
}

}  // namespace rmpa
