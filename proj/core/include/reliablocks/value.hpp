#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "reliablocks/errors.hpp"

namespace reliablocks {

// Token amounts in base units (wei scale). 64 bits overflows past ~18 ETH,
// so amounts are carried as unsigned 128-bit integers end to end and cross
// serialization boundaries as decimal strings.
using u128 = unsigned __int128;

inline std::string u128_to_dec(u128 v) {
    if (v == 0) return "0";
    std::string out;
    while (v > 0) {
        out.push_back(static_cast<char>('0' + static_cast<unsigned>(v % 10)));
        v /= 10;
    }
    return {out.rbegin(), out.rend()};
}

inline u128 u128_from_dec(std::string_view s) {
    if (s.empty()) throw MalformedEvent("empty decimal string");
    u128 v = 0;
    constexpr u128 max = ~u128{0};
    for (char c : s) {
        if (c < '0' || c > '9')
            throw MalformedEvent("non-digit in decimal string: " + std::string(s));
        unsigned d = static_cast<unsigned>(c - '0');
        if (v > (max - d) / 10) throw MalformedEvent("decimal string overflows 128 bits");
        v = v * 10 + d;
    }
    return v;
}

// wei -> whole tokens as binary64, single division so rounding happens once
inline double base_units_to_tokens(u128 base_units) {
    return static_cast<double>(base_units) / 1e18;
}

} // namespace reliablocks
