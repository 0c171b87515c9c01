#pragma once

// Lexicographic ranking of partial permutations: length-m sequences of
// distinct values drawn from {0..n-1}. Used as the index space for pattern
// database tables.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace bida {

// n * (n-1) * ... * (n-m+1)
inline std::uint64_t partial_perm_count(int n, int m) {
    if (m < 0 || m > n)
        throw std::invalid_argument("partial_perm_count: need 0 <= m <= n");
    std::uint64_t r = 1;
    for (int i = 0; i < m; ++i)
        r *= static_cast<std::uint64_t>(n - i);
    return r;
}

// Lexicographic rank of seq within all length-|seq| sequences of distinct
// values from {0..n-1}. The identity placement (0,1,2,...) ranks 0.
inline std::uint64_t partial_perm_rank(std::span<const std::uint8_t> seq, int n) {
    const int m = static_cast<int>(seq.size());
    if (m > n)
        throw std::invalid_argument("partial_perm_rank: sequence longer than base set");
    std::vector<std::uint8_t> avail(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        avail[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    int avail_len = n;

    std::uint64_t rank = 0;
    for (int i = 0; i < m; ++i) {
        int idx = 0;
        while (idx < avail_len && avail[static_cast<std::size_t>(idx)] != seq[static_cast<std::size_t>(i)])
            ++idx;
        if (idx >= avail_len)
            throw std::invalid_argument("partial_perm_rank: repeated or out-of-range value");
        std::uint64_t weight = 1;
        for (int a = 0; a < m - i - 1; ++a)
            weight *= static_cast<std::uint64_t>(n - i - 1 - a);
        rank += static_cast<std::uint64_t>(idx) * weight;
        for (int j = idx; j + 1 < avail_len; ++j)
            avail[static_cast<std::size_t>(j)] = avail[static_cast<std::size_t>(j + 1)];
        --avail_len;
    }
    return rank;
}

// Inverse of partial_perm_rank.
inline void partial_perm_unrank(std::uint64_t rank, int n, std::span<std::uint8_t> out) {
    const int m = static_cast<int>(out.size());
    if (m > n)
        throw std::invalid_argument("partial_perm_unrank: sequence longer than base set");
    if (rank >= partial_perm_count(n, m))
        throw std::invalid_argument("partial_perm_unrank: rank out of range");
    std::vector<std::uint8_t> avail(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        avail[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    int avail_len = n;

    for (int i = 0; i < m; ++i) {
        std::uint64_t weight = 1;
        for (int a = 0; a < m - i - 1; ++a)
            weight *= static_cast<std::uint64_t>(n - i - 1 - a);
        const int idx = static_cast<int>(rank / weight);
        rank %= weight;
        out[static_cast<std::size_t>(i)] = avail[static_cast<std::size_t>(idx)];
        for (int j = idx; j + 1 < avail_len; ++j)
            avail[static_cast<std::size_t>(j)] = avail[static_cast<std::size_t>(j + 1)];
        --avail_len;
    }
}

} // namespace bida
