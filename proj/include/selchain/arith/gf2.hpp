#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace selchain::arith {

/// Rank over F_2 of a matrix whose rows are bit masks (at most 64 columns).
inline unsigned gf2_rank(std::vector<std::uint64_t> rows)
{
    unsigned rank = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] == 0) continue;
        const std::uint64_t pivot = rows[i] & -rows[i];
        for (std::size_t k = i + 1; k < rows.size(); ++k)
            if (rows[k] & pivot) rows[k] ^= rows[i];
        ++rank;
    }
    return rank;
}

} // namespace selchain::arith
