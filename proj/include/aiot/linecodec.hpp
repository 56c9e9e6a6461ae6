#pragma once

// R2D and D2R line codes: Manchester, PIE, FM0, Miller-M.
//
// Conventions: Manchester 1 -> (1,0), 0 -> (0,1). PIE uses half-Tari chips,
// data-0 = 1 0 (one Tari), data-1 = 1 1 1 0 (two Tari). FM0 and Miller follow
// the ISO 18000-6C transition rules; both decoders ignore the starting phase.

#include "aiot/bitstream.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aiot {

class DecodeError : public std::runtime_error {
public:
    DecodeError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " at chip " + std::to_string(position)), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Line-coded chips. `chip_rate` is chips per second (or per unit time when
/// the caller has no absolute rate in mind).
struct ChipStream {
    std::vector<std::uint8_t> chips;
    double chip_rate = 1.0;

    std::size_t size() const { return chips.size(); }
    double duration() const { return static_cast<double>(chips.size()) / chip_rate; }
    friend bool operator==(const ChipStream&, const ChipStream&) = default;
};

namespace detail {
inline void check_chips(const ChipStream& c) {
    if (!(c.chip_rate > 0.0)) throw std::invalid_argument("chip rate must be positive");
    for (std::size_t i = 0; i < c.chips.size(); ++i) {
        if (c.chips[i] > 1) throw DecodeError("non-binary chip", i);
    }
}
}  // namespace detail

// --- Manchester -----------------------------------------------------------

inline ChipStream manchester_encode(const BitStream& bits, double bit_rate = 1.0) {
    ChipStream out{{}, 2.0 * bit_rate};
    out.chips.reserve(bits.size() * 2);
    for (auto b : bits) {
        out.chips.push_back(b);
        out.chips.push_back(static_cast<std::uint8_t>(b ^ 1u));
    }
    return out;
}

inline BitStream manchester_decode(const ChipStream& c) {
    detail::check_chips(c);
    if (c.chips.size() % 2 != 0) throw DecodeError("odd Manchester chip count", c.chips.size());
    std::vector<std::uint8_t> bits;
    bits.reserve(c.chips.size() / 2);
    for (std::size_t i = 0; i < c.chips.size(); i += 2) {
        if (c.chips[i] == c.chips[i + 1]) throw DecodeError("invalid Manchester pair", i);
        bits.push_back(c.chips[i]);
    }
    return BitStream(std::move(bits));
}

// --- PIE --------------------------------------------------------------------

inline ChipStream pie_encode(const BitStream& bits, double tari) {
    if (!(tari > 0.0)) throw std::invalid_argument("tari must be positive");
    ChipStream out{{}, 2.0 / tari};
    for (auto b : bits) {
        if (b) out.chips.insert(out.chips.end(), {1, 1, 1, 0});
        else out.chips.insert(out.chips.end(), {1, 0});
    }
    return out;
}

inline BitStream pie_decode(const ChipStream& c) {
    detail::check_chips(c);
    std::vector<std::uint8_t> bits;
    std::size_t i = 0;
    const auto n = c.chips.size();
    while (i < n) {
        std::size_t start = i, high = 0;
        while (i < n && c.chips[i] == 1) ++high, ++i;
        std::size_t low = 0;
        while (i < n && c.chips[i] == 0) ++low, ++i;
        if (low != 1) throw DecodeError("PIE low pulse must be one chip", start + high);
        if (high == 1) bits.push_back(0);
        else if (high == 3) bits.push_back(1);
        else throw DecodeError("PIE high run matches neither symbol", start);
    }
    return BitStream(std::move(bits));
}

// --- FM0 --------------------------------------------------------------------

/// `start_level` is the level of the first chip.
inline ChipStream fm0_encode(const BitStream& bits, std::uint8_t start_level = 1, double bit_rate = 1.0) {
    ChipStream out{{}, 2.0 * bit_rate};
    out.chips.reserve(bits.size() * 2);
    std::uint8_t level = start_level ? 1 : 0;
    for (auto b : bits) {
        out.chips.push_back(level);
        if (b == 0) level ^= 1u;
        out.chips.push_back(level);
        level ^= 1u;  // boundary inversion
    }
    return out;
}

inline BitStream fm0_decode(const ChipStream& c) {
    detail::check_chips(c);
    if (c.chips.size() % 2 != 0) throw DecodeError("odd FM0 chip count", c.chips.size());
    std::vector<std::uint8_t> bits;
    bits.reserve(c.chips.size() / 2);
    for (std::size_t i = 0; i < c.chips.size(); i += 2) {
        if (i > 0 && c.chips[i] == c.chips[i - 1]) throw DecodeError("missing FM0 boundary inversion", i);
        bits.push_back(c.chips[i] == c.chips[i + 1] ? 1 : 0);
    }
    return BitStream(std::move(bits));
}

// --- Miller-M ---------------------------------------------------------------

inline void check_miller_m(int m) {
    if (m != 2 && m != 4 && m != 8) throw std::invalid_argument("Miller M must be 2, 4 or 8");
}

/// Baseband Miller multiplied by an M-cycle square subcarrier; 2*M chips per bit.
inline ChipStream miller_encode(const BitStream& bits, int m, std::uint8_t start_level = 1, double bit_rate = 1.0) {
    check_miller_m(m);
    const auto half = static_cast<std::size_t>(m);
    ChipStream out{{}, 2.0 * m * bit_rate};
    out.chips.reserve(bits.size() * 2 * half);
    std::uint8_t level = start_level ? 1 : 0;
    auto emit_half = [&](std::uint8_t lvl) {
        for (std::size_t k = 0; k < half; ++k) {
            std::uint8_t sc = (k % 2 == 0) ? 1 : 0;
            out.chips.push_back(lvl ? sc : static_cast<std::uint8_t>(sc ^ 1u));
        }
    };
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (i > 0 && bits[i] == 0 && bits[i - 1] == 0) level ^= 1u;
        emit_half(level);
        if (bits[i] == 1) level ^= 1u;
        emit_half(level);
    }
    return out;
}

inline BitStream miller_decode(const ChipStream& c, int m) {
    check_miller_m(m);
    detail::check_chips(c);
    const auto half = static_cast<std::size_t>(m);
    if (c.chips.size() % (2 * half) != 0) throw DecodeError("Miller chip count not a multiple of 2M", c.chips.size());
    auto half_level = [&](std::size_t start) -> std::uint8_t {
        std::uint8_t lvl = c.chips[start];  // subcarrier chip 0 is 1, so chip 0 equals the level
        for (std::size_t k = 0; k < half; ++k) {
            std::uint8_t sc = (k % 2 == 0) ? 1 : 0;
            std::uint8_t expect = lvl ? sc : static_cast<std::uint8_t>(sc ^ 1u);
            if (c.chips[start + k] != expect) throw DecodeError("malformed Miller subcarrier", start + k);
        }
        return lvl;
    };
    std::vector<std::uint8_t> bits;
    bits.reserve(c.chips.size() / (2 * half));
    std::uint8_t prev_bit = 0, prev_level = 0;
    for (std::size_t i = 0; i < c.chips.size(); i += 2 * half) {
        std::uint8_t a = half_level(i);
        std::uint8_t b = half_level(i + half);
        std::uint8_t bit = (a != b) ? 1 : 0;
        if (i > 0) {
            bool need_flip = (bit == 0 && prev_bit == 0);
            if ((a != prev_level) != need_flip) throw DecodeError("Miller boundary rule violated", i);
        }
        bits.push_back(bit);
        prev_bit = bit;
        prev_level = b;
    }
    return BitStream(std::move(bits));
}

}  // namespace aiot
