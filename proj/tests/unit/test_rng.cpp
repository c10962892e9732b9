#include <gtest/gtest.h>

#include <vector>

#include "transmean/rng.hpp"

using transmean::Philox;

namespace {

std::vector<std::uint64_t> draw(Philox rng, int n) {
    std::vector<std::uint64_t> out;
    for (int k = 0; k < n; ++k) out.push_back(rng());
    return out;
}

}  // namespace

// Reference outputs of Philox4x64-10 from an independent implementation.
TEST(Philox, KnownAnswerZeroKey) {
    const std::vector<std::uint64_t> expected{0x2f4ba6408e4d89b,  0x3dd62b0b9ca8c5b2, 0x1c8667a55d902e79,
                                              0x907d7a052fd5b4dc, 0x809bf322883987c3, 0x471128b9e807f7dd,
                                              0xf250ba0dbec065b7, 0xfc6ed66767a457bc};
    EXPECT_EQ(draw(Philox({0, 0}, {1, 0, 0, 0}), 8), expected);
}

TEST(Philox, KnownAnswerNonzeroKey) {
    const std::vector<std::uint64_t> expected{0xdaf0bdc754a0b959, 0x38123d82f9ce12cf, 0x26cf92e903faab88,
                                              0x1c243f1f4212c6ad, 0xb21f50f322b0bda1, 0xb445706b57af3517,
                                              0xfb92f165c546c7a,  0xce47d53cd7edc6b9};
    EXPECT_EQ(draw(Philox({0x0123456789abcdefULL, 0}, {1, 0, 0, 0}), 8), expected);
}

TEST(Philox, KnownAnswerOffsetCounter) {
    const std::vector<std::uint64_t> expected{0x684c42e03728ff8c, 0x25e237ef1824fddb, 0x24393408a607efc2,
                                              0xc21a90789b190621, 0xa3a381e799fc2c64, 0x3c74da68d8ed3a21,
                                              0xe430915a6b23dbe6, 0xd6b65219b9b79ba3};
    EXPECT_EQ(draw(Philox({42, 0}, {8, 0, 0, 0}), 8), expected);
}

TEST(Philox, StreamsDifferAndReplay) {
    EXPECT_EQ(draw(Philox(7, 3), 16), draw(Philox(7, 3), 16));
    EXPECT_NE(draw(Philox(7, 3), 4), draw(Philox(7, 4), 4));
    EXPECT_NE(draw(Philox(7, 3), 4), draw(Philox(8, 3), 4));
}

TEST(Philox, CounterCarry) {
    Philox rng({1, 2}, {~0ULL, 0, 0, 0});
    for (int k = 0; k < 4; ++k) rng();
    const Philox::Block next = Philox::block({0, 1, 0, 0}, {1, 2});
    EXPECT_EQ(rng(), next[0]);
}
