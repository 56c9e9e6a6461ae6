#include "aiot/linecodec.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace aiot;

namespace {

// FM0 rules checked chip by chip: the level always flips at a bit boundary
// and flips mid-bit only for a zero.
bool fm0_rules_hold(const BitStream& bits, const std::vector<std::uint8_t>& chips) {
    if (chips.size() != 2 * bits.size()) return false;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bool mid_flip = chips[2 * i] != chips[2 * i + 1];
        if (mid_flip != (bits[i] == 0)) return false;
        if (i > 0 && chips[2 * i] == chips[2 * i - 1]) return false;
    }
    return true;
}

// Miller rules on the baseband recovered by removing the subcarrier: a one
// flips mid-bit, a zero holds, and consecutive zeros flip at their boundary.
bool miller_rules_hold(const BitStream& bits, const std::vector<std::uint8_t>& chips, int m) {
    const std::size_t half = static_cast<std::size_t>(m);
    if (chips.size() != bits.size() * 2 * half) return false;
    std::vector<int> base(chips.size());
    for (std::size_t i = 0; i < chips.size(); ++i) {
        int sc = ((i % half) % 2 == 0) ? 1 : 0;
        base[i] = sc ? chips[i] : 1 - chips[i];
    }
    for (std::size_t i = 0; i < chips.size(); i += half) {
        for (std::size_t k = 1; k < half; ++k) {
            if (base[i + k] != base[i]) return false;
        }
    }
    for (std::size_t b = 0; b < bits.size(); ++b) {
        int first = base[2 * half * b], second = base[2 * half * b + half];
        if ((first != second) != (bits[b] == 1)) return false;
        if (b > 0) {
            int prev_end = base[2 * half * b - 1];
            bool boundary_flip = prev_end != first;
            if (boundary_flip != (bits[b] == 0 && bits[b - 1] == 0)) return false;
        }
    }
    return true;
}

}  // namespace

TEST(Manchester, PinnedConvention) {
    EXPECT_TRUE(manchester_encode(BitStream{}).chips.empty());
    EXPECT_EQ(manchester_encode({1, 0}).chips, (std::vector<std::uint8_t>{1, 0, 0, 1}));
    EXPECT_DOUBLE_EQ(manchester_encode({1}, 10e3).chip_rate, 20e3);
}

TEST(Manchester, InvalidPairReportsIndex) {
    try {
        manchester_decode({{1, 1, 1, 0}, 1.0});
        FAIL();
    } catch (const DecodeError& e) {
        EXPECT_EQ(e.position(), 0u);
    }
    try {
        manchester_decode({{1, 0, 0, 1, 0, 0}, 1.0});
        FAIL();
    } catch (const DecodeError& e) {
        EXPECT_EQ(e.position(), 4u);
    }
    EXPECT_THROW(manchester_decode({{1, 0, 1}, 1.0}), DecodeError);
}

TEST(Manchester, ExhaustiveRejectionOverPairs) {
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            ChipStream c{{static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)}, 1.0};
            if (a == b) {
                EXPECT_THROW(manchester_decode(c), DecodeError);
            } else {
                EXPECT_EQ(manchester_decode(c).size(), 1u);
                EXPECT_EQ(manchester_decode(c)[0], a);
            }
        }
    }
}

TEST(Manchester, RejectsExactlyStreamsWithEqualPair) {
    // all 8-chip streams
    for (unsigned v = 0; v < 256; ++v) {
        ChipStream c{{}, 1.0};
        bool bad = false;
        for (int i = 0; i < 8; ++i) c.chips.push_back(static_cast<std::uint8_t>((v >> i) & 1u));
        for (int i = 0; i < 8; i += 2) bad = bad || c.chips[i] == c.chips[i + 1];
        bool threw = false;
        try {
            manchester_decode(c);
        } catch (const DecodeError&) {
            threw = true;
        }
        EXPECT_EQ(threw, bad) << v;
    }
}

TEST(Pie, SymbolGeometry) {
    EXPECT_TRUE(pie_encode(BitStream{}, 25e-6).chips.empty());
    auto c = pie_encode({0, 1}, 25e-6);
    EXPECT_EQ(c.chips, (std::vector<std::uint8_t>{1, 0, 1, 1, 1, 0}));
    EXPECT_NEAR(c.duration(), 3 * 25e-6, 1e-18);
    EXPECT_THROW(pie_encode({1}, 0.0), std::invalid_argument);
}

TEST(Pie, MalformedRunsRejected) {
    EXPECT_THROW(pie_decode({{1, 1, 0}, 1.0}), DecodeError);
    EXPECT_THROW(pie_decode({{1, 0, 0}, 1.0}), DecodeError);
    EXPECT_THROW(pie_decode({{0, 1, 0}, 1.0}), DecodeError);
    EXPECT_THROW(pie_decode({{1, 1, 1, 1, 0}, 1.0}), DecodeError);
}

TEST(Fm0, TransitionRuleVectors) {
    EXPECT_TRUE(fm0_encode(BitStream{}).chips.empty());
    EXPECT_EQ(fm0_encode({0}, 1).chips, (std::vector<std::uint8_t>{1, 0}));
    EXPECT_EQ(fm0_encode({1}, 1).chips, (std::vector<std::uint8_t>{1, 1}));
    EXPECT_EQ(fm0_encode({1, 0, 1, 1}, 1).chips, (std::vector<std::uint8_t>{1, 1, 0, 1, 0, 0, 1, 1}));
}

TEST(Fm0, MissingBoundaryInversionRejected) {
    try {
        fm0_decode({{1, 1, 1, 0}, 1.0});
        FAIL();
    } catch (const DecodeError& e) {
        EXPECT_EQ(e.position(), 2u);
    }
}

TEST(Miller, ChipsPerBitAndRejection) {
    EXPECT_TRUE(miller_encode(BitStream{}, 4).chips.empty());
    EXPECT_EQ(miller_encode({1}, 4).chips.size(), 8u);
    EXPECT_EQ(miller_encode({1, 0, 1}, 8).chips.size(), 48u);
    EXPECT_THROW(miller_encode({1}, 3), std::invalid_argument);
    auto c = miller_encode({1, 0, 0, 1}, 2);
    c.chips[1] ^= 1u;
    EXPECT_THROW(miller_decode(c, 2), DecodeError);
    EXPECT_THROW(miller_decode({{1, 0, 1}, 1.0}, 2), DecodeError);
}

class CodecRoundTrip : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(CodecRoundTrip, AllSchemes) {
    const auto bits = random_bits(10000, GetParam());
    EXPECT_EQ(manchester_decode(manchester_encode(bits)), bits);
    EXPECT_EQ(pie_decode(pie_encode(bits, 25e-6)), bits);
    for (std::uint8_t start : {0, 1}) {
        auto c = fm0_encode(bits, start);
        EXPECT_TRUE(fm0_rules_hold(bits, c.chips));
        EXPECT_EQ(fm0_decode(c), bits);
    }
    for (int m : {2, 4, 8}) {
        for (std::uint8_t start : {0, 1}) {
            auto c = miller_encode(bits, m, start);
            EXPECT_TRUE(miller_rules_hold(bits, c.chips, m));
            EXPECT_EQ(miller_decode(c, m), bits);
        }
    }
}

TEST_P(CodecRoundTrip, LengthAndBalanceInvariants) {
    const auto bits = random_bits(10000, GetParam());
    const std::size_t ones = static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
    auto man = manchester_encode(bits);
    auto fm0 = fm0_encode(bits);
    auto pie = pie_encode(bits, 1.0);
    EXPECT_EQ(man.size(), 2 * bits.size());
    EXPECT_EQ(fm0.size(), 2 * bits.size());
    EXPECT_EQ(pie.size(), 2 * bits.size() + 2 * ones);
    auto mean = [](const ChipStream& c) {
        return std::accumulate(c.chips.begin(), c.chips.end(), 0.0) / static_cast<double>(c.size());
    };
    EXPECT_NEAR(mean(man), 0.5, 1.0 / man.size());
    EXPECT_NEAR(mean(fm0), 0.5, 1.0 / fm0.size());
}

INSTANTIATE_TEST_SUITE_P(Seeds, CodecRoundTrip, ::testing::Range<std::uint64_t>(1, 11));
