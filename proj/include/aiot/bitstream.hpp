#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace aiot {

/// Payload bits. Every element is 0 or 1.
class BitStream {
public:
    BitStream() = default;
    explicit BitStream(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            if (bits_[i] > 1) {
                throw std::invalid_argument("bit " + std::to_string(i) + " is not binary");
            }
        }
    }
    BitStream(std::initializer_list<int> bits) {
        bits_.reserve(bits.size());
        for (int b : bits) {
            if (b != 0 && b != 1) throw std::invalid_argument("bit is not binary");
            bits_.push_back(static_cast<std::uint8_t>(b));
        }
    }

    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }
    auto begin() const { return bits_.begin(); }
    auto end() const { return bits_.end(); }

    void push_back(std::uint8_t b) {
        if (b > 1) throw std::invalid_argument("bit is not binary");
        bits_.push_back(b);
    }

    friend bool operator==(const BitStream&, const BitStream&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

inline BitStream random_bits(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> v(n);
    for (auto& b : v) b = static_cast<std::uint8_t>(rng() & 1u);
    return BitStream(std::move(v));
}

inline std::size_t count_bit_errors(const BitStream& a, const BitStream& b) {
    std::size_t n = std::min(a.size(), b.size());
    std::size_t errors = (a.size() > b.size() ? a.size() - b.size() : b.size() - a.size());
    for (std::size_t i = 0; i < n; ++i) errors += (a[i] != b[i]);
    return errors;
}

}  // namespace aiot
