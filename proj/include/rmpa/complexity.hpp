#pragma once

#include <cstdint>
#include <stdexcept>

#include "rmpa/decoder.hpp"
#include "rmpa/rm_code.hpp"

namespace rmpa {

// Worst-case number of first-order transform decodes for one codeword.
// Every recursion level from order r down to order 2 contributes a factor
// ceil(r_p * (2^m' - 1)) for its subset size; levels that iterate contribute
// ceil(m'/2) as well. On the Full schedule that is every level, on TopOnly
// just the outermost one.
inline std::int64_t count_fht_bound(const RmCode& code, const DecoderConfig& cfg) {
    if (code.r < 2)
        throw std::invalid_argument("count_fht_bound: needs order >= 2");
    std::int64_t bound = 1;
    for (int level = 0; level <= code.r - 2; ++level) {
        const int m_level = code.m - level;
        const std::int64_t subspaces = (std::int64_t{1} << m_level) - 1;
        bound *= ceil_scaled(cfg.r_p, subspaces);
        if (level == 0 || cfg.schedule == IterationSchedule::Full)
            bound *= (m_level + 1) / 2;
    }
    return bound;
}

// Fraction of the budget left unused: 1 - mean_used / bound.
inline double complexity_gain(double mean_fht, std::int64_t bound) {
    if (bound <= 0) throw std::invalid_argument("complexity_gain: bound must be positive");
    return 1.0 - mean_fht / static_cast<double>(bound);
}

}  // namespace rmpa
