#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rmpa {

// Index z into F_2^m. Variable v1 is the least-significant bit, vm the
// most-significant bit.
using BitIndex = std::uint32_t;

// Nonzero z_i identifying the one-dimensional subspace B_i = {0, z_i}.
// There are exactly n-1 of them for code length n = 2^m.
using SubspaceId = std::uint32_t;

using Codeword = std::vector<std::uint8_t>;

inline int lowest_set_bit(SubspaceId z) { return std::countr_zero(z); }

// Deletes bit position b from z; bits above b shift down by one.
inline BitIndex drop_bit(BitIndex z, int b) {
    const BitIndex low = z & ((BitIndex{1} << b) - 1u);
    return (z >> (b + 1) << b) | low;
}

// Inverse of drop_bit: widens z by inserting a zero bit at position b.
inline BitIndex insert_bit(BitIndex z, int b) {
    const BitIndex low = z & ((BitIndex{1} << b) - 1u);
    return ((z >> b) << (b + 1)) | low;
}

// Two-element coset {rep, rep ^ subspace} of E/B. The canonical
// representative has the lowest set bit of the subspace cleared.
struct Coset {
    BitIndex rep;
    SubspaceId subspace;
};

// Binary Reed-Muller code of length n = 2^m and order r. Generator rows are
// evaluation vectors of the monomials of degree <= r, ordered by degree and
// lexicographically by variable tuple within a degree. monomials[i] is the
// variable mask of row i (bit j set means v_{j+1} appears).
struct RmCode {
    int m = 0;
    int r = 0;
    int n = 0;
    int k = 0;
    std::vector<std::uint32_t> monomials;
    std::vector<std::vector<std::uint8_t>> generator;
};

inline std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::int64_t c = 1;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

// Evaluation vector of the monomial with the given variable mask: 1 at every
// point z that has all mask bits set.
inline std::vector<std::uint8_t> monomial_row(std::uint32_t mask, int n) {
    std::vector<std::uint8_t> row(static_cast<std::size_t>(n), 0);
    for (int z = 0; z < n; ++z)
        row[static_cast<std::size_t>(z)] =
            static_cast<std::uint8_t>((static_cast<std::uint32_t>(z) & mask) == mask);
    return row;
}

inline RmCode make_code(int m, int r) {
    if (m < 1 || m > 20) throw std::invalid_argument("make_code: m must be in [1, 20]");
    if (r < 0 || r > m) throw std::invalid_argument("make_code: need 0 <= r <= m");

    RmCode code;
    code.m = m;
    code.r = r;
    code.n = 1 << m;

    code.monomials.push_back(0);
    for (int d = 1; d <= r; ++d) {
        // combinations of d variables out of m, lexicographic
        std::vector<int> idx(static_cast<std::size_t>(d));
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            std::uint32_t mask = 0;
            for (int v : idx) mask |= 1u << v;
            code.monomials.push_back(mask);
            int j = d - 1;
            while (j >= 0 && idx[static_cast<std::size_t>(j)] == m - d + j) --j;
            if (j < 0) break;
            ++idx[static_cast<std::size_t>(j)];
            for (int t = j + 1; t < d; ++t)
                idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
        }
    }
    code.k = static_cast<int>(code.monomials.size());

    code.generator.reserve(static_cast<std::size_t>(code.k));
    for (std::uint32_t mask : code.monomials) code.generator.push_back(monomial_row(mask, code.n));
    return code;
}

inline Codeword encode(const RmCode& code, const std::vector<std::uint8_t>& message) {
    if (static_cast<int>(message.size()) != code.k)
        throw std::invalid_argument("encode: message length must equal k");
    Codeword out(static_cast<std::size_t>(code.n), 0);
    for (int i = 0; i < code.k; ++i) {
        if (!message[static_cast<std::size_t>(i)]) continue;
        const auto& row = code.generator[static_cast<std::size_t>(i)];
        for (int z = 0; z < code.n; ++z) out[static_cast<std::size_t>(z)] ^= row[static_cast<std::size_t>(z)];
    }
    return out;
}

// All n-1 nonzero one-dimensional subspaces, ascending.
inline std::vector<SubspaceId> enumerate_subspaces(const RmCode& code) {
    std::vector<SubspaceId> ids(static_cast<std::size_t>(code.n - 1));
    std::iota(ids.begin(), ids.end(), SubspaceId{1});
    return ids;
}

// The n/2 cosets of E/B ordered by ascending canonical representative. Reps
// are exactly the points with bit b(z_i) = 0, b the lowest set bit of z_i.
inline std::vector<Coset> cosets_of(SubspaceId subspace, int m) {
    if (subspace == 0 || subspace >= (SubspaceId{1} << m))
        throw std::invalid_argument("cosets_of: subspace must be nonzero and < 2^m");
    const int b = lowest_set_bit(subspace);
    const int half = 1 << (m - 1);
    std::vector<Coset> cosets;
    cosets.reserve(static_cast<std::size_t>(half));
    for (int t = 0; t < half; ++t)
        cosets.push_back(Coset{insert_bit(static_cast<BitIndex>(t), b), subspace});
    return cosets;
}

// Linear bijection E/B -> F_2^(m-1): deletes the pivot bit of the canonical
// representative. Cosets re-indexed this way give the standard indexing of
// the half-length code.
inline BitIndex quotient_map(const Coset& coset, int /*m*/) {
    return drop_bit(coset.rep, lowest_set_bit(coset.subspace));
}

// Exhaustive codebook, Gray-code order over messages. Test-scale oracle.
inline std::vector<Codeword> codebook(const RmCode& code) {
    if (code.k > 26) throw std::runtime_error("codebook: k too large for enumeration");
    const std::uint64_t total = std::uint64_t{1} << code.k;
    std::vector<Codeword> words;
    words.reserve(total);
    Codeword current(static_cast<std::size_t>(code.n), 0);
    words.push_back(current);
    for (std::uint64_t w = 1; w < total; ++w) {
        const int row = std::countr_zero(w);
        const auto& g = code.generator[static_cast<std::size_t>(row)];
        for (int z = 0; z < code.n; ++z) current[static_cast<std::size_t>(z)] ^= g[static_cast<std::size_t>(z)];
        words.push_back(current);
    }
    return words;
}

// Minimum nonzero codeword weight by enumeration. Test-scale oracle.
inline int min_distance(const RmCode& code) {
    if (code.k > 26) throw std::runtime_error("min_distance: k too large for enumeration");
    const std::uint64_t total = std::uint64_t{1} << code.k;
    Codeword current(static_cast<std::size_t>(code.n), 0);
    int best = code.n + 1;
    for (std::uint64_t w = 1; w < total; ++w) {
        const int row = std::countr_zero(w);
        const auto& g = code.generator[static_cast<std::size_t>(row)];
        int weight = 0;
        for (int z = 0; z < code.n; ++z) {
            current[static_cast<std::size_t>(z)] ^= g[static_cast<std::size_t>(z)];
            weight += current[static_cast<std::size_t>(z)];
        }
        if (weight < best) best = weight;
    }
    return best;
}

}  // namespace rmpa
