#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rmpa/channel.hpp"
#include "rmpa/rm_code.hpp"

namespace rmpa {

enum class DecoderVariant { Rpa, Srpa, Sdss };
enum class IterationSchedule { Full, TopOnly };
enum class DistanceMetric { Raw, Weighted };

// Exact rational in (0, 1], used for the pruning factor so that subset sizes
// p = ceil(r_p * (n-1)) never suffer a floating-point off-by-one.
struct Rational {
    std::int64_t num = 1;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline std::int64_t ceil_scaled(Rational ratio, std::int64_t count) {
    return (ratio.num * count + ratio.den - 1) / ratio.den;
}

struct DecoderConfig {
    DecoderVariant variant = DecoderVariant::Rpa;
    Rational r_p{1, 1};   // fraction of the n-1 subspaces used per level
    double r_q = 0.0;     // 0 = fully random selection, 1 = fully deterministic
    double theta = 0.05;  // early-stop threshold
    IterationSchedule schedule = IterationSchedule::Full;
    double llr_cap = kDefaultLlrCap;
    // Reuse one subset per level for all iterations of a codeword instead of
    // redrawing every iteration (random selection only).
    bool fixed_subset = false;
    // When nonempty, overrides the selection at the top level. Used by the
    // exhaustive per-subset studies.
    std::vector<SubspaceId> forced_top_subset;
};

// Variant defaults: RPA uses every subspace; SDSS skips the inner-level
// iterations and interpolates selection with r_q.
inline DecoderConfig default_config(DecoderVariant variant) {
    DecoderConfig cfg;
    cfg.variant = variant;
    switch (variant) {
        case DecoderVariant::Rpa:
            cfg.r_p = {1, 1};
            cfg.schedule = IterationSchedule::Full;
            break;
        case DecoderVariant::Srpa:
            cfg.schedule = IterationSchedule::Full;
            break;
        case DecoderVariant::Sdss:
            cfg.schedule = IterationSchedule::TopOnly;
            cfg.r_q = 0.85;
            break;
    }
    return cfg;
}

inline void validate_config(const DecoderConfig& cfg, int m) {
    if (cfg.r_p.num <= 0 || cfg.r_p.den <= 0 || cfg.r_p.num > cfg.r_p.den)
        throw std::invalid_argument("decoder config: r_p must be a rational in (0, 1]");
    if (cfg.variant == DecoderVariant::Rpa && cfg.r_p.num != cfg.r_p.den)
        throw std::invalid_argument("decoder config: RPA requires r_p = 1");
    if (cfg.r_q < 0.0 || cfg.r_q > 1.0)
        throw std::invalid_argument("decoder config: r_q must be in [0, 1]");
    if (cfg.theta < 0.0) throw std::invalid_argument("decoder config: theta must be >= 0");
    const std::int64_t n = std::int64_t{1} << m;
    const std::int64_t p = ceil_scaled(cfg.r_p, n - 1);
    if (p < 1 || p > n - 1) throw std::invalid_argument("decoder config: p out of range");
}

struct SubsetSelection {
    std::vector<SubspaceId> chosen;  // ascending, no duplicates
    int candidate_pool_size = 0;     // q, size of the shortlist sampled from
};

struct DecodeOutcome {
    Codeword codeword;
    LlrVector final_llr;
    int iterations_used = 0;  // top-level iterations
    std::int64_t fht_count = 0;
    bool converged = false;
};

// Combines the two LLRs of one coset:
//   ln(exp(L0 + L1) + 1) - ln(exp(L0) + exp(L1)),
// evaluated in sign-magnitude form. The magnitude is a function of |a|, |b|
// only, so inputs of equal magnitude produce bit-identical outputs whatever
// their signs; downstream magnitude comparisons then see exact ties instead
// of rounding noise. Identical to the boxplus 2*atanh(tanh*tanh).
inline double project_pair(double a, double b) {
    const double lo = std::min(std::abs(a), std::abs(b));
    const double hi = std::max(std::abs(a), std::abs(b));
    const double mag =
        lo + std::log1p(std::exp(-(hi + lo))) - std::log1p(std::exp(-(hi - lo)));
    return std::signbit(a) == std::signbit(b) ? mag : -mag;
}

// Projects onto the quotient space of the given subspace; output index t is
// the quotient_map image of the coset representative.
inline LlrVector project(const LlrVector& llr, SubspaceId subspace) {
    const std::size_t n = llr.size();
    const int b = lowest_set_bit(subspace);
    LlrVector out(n / 2);
    for (std::size_t t = 0; t < n / 2; ++t) {
        const BitIndex rep = insert_bit(static_cast<BitIndex>(t), b);
        out[t] = project_pair(llr[rep], llr[rep ^ subspace]);
    }
    return out;
}

// In-place Walsh-Hadamard transform (natural Sylvester ordering).
inline void walsh_hadamard(std::vector<double>& values) {
    const std::size_t n = values.size();
    for (std::size_t half = 1; half < n; half <<= 1) {
        for (std::size_t block = 0; block < n; block += 2 * half) {
            for (std::size_t i = block; i < block + half; ++i) {
                const double a = values[i];
                const double c = values[i + half];
                values[i] = a + c;
                values[i + half] = a - c;
            }
        }
    }
}

// Soft ML decoding of a first-order code: the transform coefficient of
// largest magnitude identifies the best affine function <j, z> ^ s. Ties go
// to the smallest transform index; metric is the winning |coefficient|,
// which equals the maximum bipolar correlation over the codebook.
inline std::pair<Codeword, double> fht_decode_order1(const LlrVector& llr) {
    std::vector<double> transform(llr.begin(), llr.end());
    walsh_hadamard(transform);
    std::size_t best = 0;
    double best_mag = std::abs(transform[0]);
    for (std::size_t j = 1; j < transform.size(); ++j) {
        const double mag = std::abs(transform[j]);
        if (mag > best_mag) {
            best_mag = mag;
            best = j;
        }
    }
    const std::uint8_t flip = transform[best] < 0.0 ? 1 : 0;
    Codeword word(llr.size());
    for (std::size_t z = 0; z < llr.size(); ++z)
        word[z] = static_cast<std::uint8_t>(std::popcount(static_cast<std::uint32_t>(best) &
                                                          static_cast<std::uint32_t>(z)) &
                                            1) ^
                  flip;
    return {std::move(word), best_mag};
}

// Mean of the sign-corrected neighbor LLRs over the chosen subspaces:
//   Lhat(z) = (1/p) * sum_j (-1)^(rec_j[coset of z]) * L(z ^ z_j).
inline LlrVector aggregate(const LlrVector& llr,
                           const std::vector<std::pair<SubspaceId, Codeword>>& selections) {
    if (selections.empty()) throw std::invalid_argument("aggregate: empty selection set");
    const std::size_t n = llr.size();
    LlrVector out(n, 0.0);
    for (const auto& [subspace, reconstruction] : selections) {
        if (reconstruction.size() != n / 2)
            throw std::invalid_argument("aggregate: reconstruction length must be n/2");
        const int b = lowest_set_bit(subspace);
        for (std::size_t z = 0; z < n; ++z) {
            const BitIndex zz = static_cast<BitIndex>(z);
            const BitIndex rep = (zz >> b) & 1u ? zz ^ subspace : zz;
            const double neighbor = llr[zz ^ subspace];
            out[z] += reconstruction[drop_bit(rep, b)] ? -neighbor : neighbor;
        }
    }
    const double inv = 1.0 / static_cast<double>(selections.size());
    for (double& v : out) v *= inv;
    return out;
}

// Fixed-point test: |new - old| <= theta * |old| coordinate-wise.
inline bool is_converged(const LlrVector& before, const LlrVector& after, double theta) {
    if (before.size() != after.size())
        throw std::invalid_argument("is_converged: length mismatch");
    for (std::size_t z = 0; z < before.size(); ++z)
        if (std::abs(after[z] - before[z]) > theta * std::abs(before[z])) return false;
    return true;
}

// Per-subspace figure of merit, ascending subspace id. Raw: sum over cosets
// of ||L0| - |L1||. Weighted: sum of |exp(-|L0|) - exp(-|L1|)|, which
// saturates the influence of very reliable symbols.
inline std::vector<double> subspace_distances(const LlrVector& llr, DistanceMetric metric) {
    const std::size_t n = llr.size();
    std::vector<double> weight(n);
    for (std::size_t z = 0; z < n; ++z)
        weight[z] = metric == DistanceMetric::Weighted ? std::exp(-std::abs(llr[z]))
                                                       : std::abs(llr[z]);
    std::vector<double> dist(n - 1, 0.0);
    for (std::size_t zi = 1; zi < n; ++zi) {
        const int b = lowest_set_bit(static_cast<SubspaceId>(zi));
        double sum = 0.0;
        for (std::size_t t = 0; t < n / 2; ++t) {
            const BitIndex rep = insert_bit(static_cast<BitIndex>(t), b);
            sum += std::abs(weight[rep] - weight[rep ^ zi]);
        }
        dist[zi - 1] = sum;
    }
    return dist;
}

// Uniform p-subset of the pool (partial Fisher-Yates), returned ascending.
// p equal to the pool size returns the pool itself without consuming
// randomness.
inline SubsetSelection select_random(const std::vector<SubspaceId>& pool, int p, RngStream& rng) {
    if (p < 1 || p > static_cast<int>(pool.size()))
        throw std::invalid_argument("select_random: p out of range");
    SubsetSelection sel;
    sel.candidate_pool_size = static_cast<int>(pool.size());
    if (p == static_cast<int>(pool.size())) {
        sel.chosen = pool;
    } else {
        std::vector<SubspaceId> scratch = pool;
        for (int i = 0; i < p; ++i) {
            const std::size_t j =
                static_cast<std::size_t>(i) + rng.below(scratch.size() - static_cast<std::size_t>(i));
            std::swap(scratch[static_cast<std::size_t>(i)], scratch[j]);
        }
        sel.chosen.assign(scratch.begin(), scratch.begin() + p);
    }
    std::sort(sel.chosen.begin(), sel.chosen.end());
    return sel;
}

// Semi-deterministic subspace selection: shortlist the q subspaces with the
// smallest weighted distances (ties to the smaller id), then draw p of them
// uniformly. q interpolates between n-1 at r_q = 0 (fully random) and p at
// r_q = 1 (fully deterministic).
inline SubsetSelection sdss_select(const LlrVector& llr, int m, Rational r_p, double r_q,
                                   RngStream& rng) {
    const std::int64_t n = std::int64_t{1} << m;
    const std::int64_t p = ceil_scaled(r_p, n - 1);
    std::int64_t q;
    if (r_q <= 0.0) {
        q = n - 1;
    } else if (r_q >= 1.0) {
        q = p;
    } else {
        q = static_cast<std::int64_t>(
            std::ceil((1.0 - r_q + r_q * r_p.value()) * static_cast<double>(n - 1)));
        q = std::clamp(q, p, n - 1);
    }

    const std::vector<double> dist = subspace_distances(llr, DistanceMetric::Weighted);
    std::vector<SubspaceId> order(static_cast<std::size_t>(n - 1));
    std::iota(order.begin(), order.end(), SubspaceId{1});
    std::stable_sort(order.begin(), order.end(), [&dist](SubspaceId a, SubspaceId b) {
        return dist[a - 1] < dist[b - 1];
    });
    order.resize(static_cast<std::size_t>(q));

    SubsetSelection sel = select_random(order, static_cast<int>(p), rng);
    sel.candidate_pool_size = static_cast<int>(q);
    return sel;
}

// Majority-logic (Reed) decoding: estimates coefficients layer by layer from
// the highest degree down, each by majority vote over its 2^(m-d) disjoint
// characteristic sums (ties decode to 0), then peels the layer off. Output
// is always a codeword; up to 2^(m-r-1) - 1 errors are corrected.
inline Codeword reed_decode(const std::vector<std::uint8_t>& hard, const RmCode& code) {
    if (static_cast<int>(hard.size()) != code.n)
        throw std::invalid_argument("reed_decode: input length must equal n");
    std::vector<std::uint8_t> residual = hard;
    std::vector<std::uint8_t> message(static_cast<std::size_t>(code.k), 0);
    const std::uint32_t full = (code.n - 1) == 0 ? 0u : static_cast<std::uint32_t>(code.n - 1);

    for (int d = code.r; d >= 0; --d) {
        for (int i = 0; i < code.k; ++i) {
            const std::uint32_t mask = code.monomials[static_cast<std::size_t>(i)];
            if (std::popcount(mask) != d) continue;
            const std::uint32_t comp = full ^ mask;
            int ones = 0;
            int total = 0;
            std::uint32_t w = comp;
            while (true) {
                std::uint8_t sum = 0;
                std::uint32_t v = mask;
                while (true) {
                    sum ^= residual[w | v];
                    if (v == 0) break;
                    v = (v - 1) & mask;
                }
                ones += sum;
                ++total;
                if (w == 0) break;
                w = (w - 1) & comp;
            }
            if (2 * ones > total) message[static_cast<std::size_t>(i)] = 1;
        }
        // peel off the decoded layer
        for (int i = 0; i < code.k; ++i) {
            const std::uint32_t mask = code.monomials[static_cast<std::size_t>(i)];
            if (std::popcount(mask) != d || !message[static_cast<std::size_t>(i)]) continue;
            const auto& row = code.generator[static_cast<std::size_t>(i)];
            for (int z = 0; z < code.n; ++z)
                residual[static_cast<std::size_t>(z)] ^= row[static_cast<std::size_t>(z)];
        }
    }
    return encode(code, message);
}

namespace detail {

struct DecodeStats {
    std::int64_t fht_calls = 0;
    int top_iterations = 0;
    bool top_converged = false;
};

inline std::vector<SubspaceId> all_subspace_ids(int m) {
    std::vector<SubspaceId> ids(static_cast<std::size_t>((1 << m) - 1));
    std::iota(ids.begin(), ids.end(), SubspaceId{1});
    return ids;
}

inline std::vector<std::uint8_t> hard_decision(const LlrVector& llr) {
    std::vector<std::uint8_t> bits(llr.size());
    for (std::size_t z = 0; z < llr.size(); ++z) bits[z] = llr[z] < 0.0 ? 1 : 0;
    return bits;
}

// One level of the recursion. First-order codes go straight to the FHT
// decoder. Higher orders run project / decode / aggregate passes: the top
// level always iterates up to ceil(m/2) times with the early-stop rule,
// lower levels do the same on the Full schedule and a single pass on
// TopOnly. Returns the hard reconstruction of this level.
inline std::vector<std::uint8_t> rpa_decode_level(const LlrVector& llr_in, int m, int r,
                                                  const DecoderConfig& cfg, RngStream& rng,
                                                  bool top, DecodeStats& stats,
                                                  LlrVector* final_llr) {
    if (r == 1) {
        ++stats.fht_calls;
        if (top) {
            stats.top_iterations = 1;
            stats.top_converged = true;
            if (final_llr) *final_llr = llr_in;
        }
        return fht_decode_order1(llr_in).first;
    }

    const std::int64_t n = std::int64_t{1} << m;
    const int max_iters = (top || cfg.schedule == IterationSchedule::Full) ? (m + 1) / 2 : 1;
    const int p = static_cast<int>(ceil_scaled(cfg.r_p, n - 1));

    LlrVector current = llr_in;
    SubsetSelection selection;
    bool converged = false;
    int iterations = 0;

    for (int iter = 1; iter <= max_iters; ++iter) {
        iterations = iter;
        if (top && !cfg.forced_top_subset.empty()) {
            if (iter == 1) {
                selection.chosen = cfg.forced_top_subset;
                selection.candidate_pool_size = static_cast<int>(n - 1);
            }
        } else {
            switch (cfg.variant) {
                case DecoderVariant::Rpa:
                    if (iter == 1) {
                        selection.chosen = all_subspace_ids(m);
                        selection.candidate_pool_size = static_cast<int>(n - 1);
                    }
                    break;
                case DecoderVariant::Srpa:
                    if (iter == 1 || !cfg.fixed_subset)
                        selection = select_random(all_subspace_ids(m), p, rng);
                    break;
                case DecoderVariant::Sdss:
                    // always recomputed: the distances follow the current LLRs
                    selection = sdss_select(current, m, cfg.r_p, cfg.r_q, rng);
                    break;
            }
        }

        std::vector<std::pair<SubspaceId, Codeword>> reconstructions;
        reconstructions.reserve(selection.chosen.size());
        for (SubspaceId subspace : selection.chosen) {
            LlrVector projected = project(current, subspace);
            reconstructions.emplace_back(
                subspace, rpa_decode_level(projected, m - 1, r - 1, cfg, rng, false, stats, nullptr));
        }

        LlrVector updated = aggregate(current, reconstructions);
        converged = is_converged(current, updated, cfg.theta);
        current = std::move(updated);
        if (converged) break;
    }

    if (top) {
        stats.top_iterations = iterations;
        stats.top_converged = converged;
    }
    if (final_llr) *final_llr = current;
    return hard_decision(current);
}

}  // namespace detail

// Full recursive decode: project / decode / aggregate with the configured
// selection strategy, then a final majority-logic pass that maps the hard
// decision onto a valid codeword. Deterministic given the LLRs, the config
// and the stream state.
inline DecodeOutcome decode(const LlrVector& llr, const RmCode& code, const DecoderConfig& cfg,
                            RngStream& rng) {
    if (static_cast<int>(llr.size()) != code.n)
        throw std::invalid_argument("decode: LLR length must equal n");
    if (code.r < 1)
        throw std::invalid_argument("decode: order-0 codes are not supported");
    validate_config(cfg, code.m);

    LlrVector capped(llr.size());
    for (std::size_t z = 0; z < llr.size(); ++z) capped[z] = clamp_llr(llr[z], cfg.llr_cap);

    detail::DecodeStats stats;
    DecodeOutcome outcome;
    const std::vector<std::uint8_t> hard = detail::rpa_decode_level(
        capped, code.m, code.r, cfg, rng, true, stats, &outcome.final_llr);

    outcome.codeword = reed_decode(hard, code);
    outcome.iterations_used = stats.top_iterations;
    outcome.fht_count = stats.fht_calls;
    outcome.converged = stats.top_converged;
    return outcome;
}

}  // namespace rmpa
