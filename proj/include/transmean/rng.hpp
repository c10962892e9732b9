#pragma once

// Philox4x64-10 counter-based generator (Salmon et al., SC'11).
//
// Each (seed, stream) pair is a distinct key, so replicate k of a Monte Carlo
// run draws from Philox(seed, k) regardless of which thread executes it.

#include <array>
#include <cstdint>
#include <limits>

namespace transmean {

class Philox {
public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    Philox(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}
    Philox(Key key, Block counter) : key_(key), counter_(counter) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (position_ == 4) {
            buffer_ = block(counter_, key_);
            increment();
            position_ = 0;
        }
        return buffer_[position_++];
    }

    /// The 10-round bijection applied to one counter value.
    static Block block(Block counter, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            counter = single_round(counter, key);
        }
        return counter;
    }

private:
    static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

    static Block single_round(const Block& ctr, const Key& key) {
        const unsigned __int128 p0 = static_cast<unsigned __int128>(kMul0) * ctr[0];
        const unsigned __int128 p1 = static_cast<unsigned __int128>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
        const auto lo0 = static_cast<std::uint64_t>(p0);
        const auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
        const auto lo1 = static_cast<std::uint64_t>(p1);
        return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }

    void increment() {
        for (auto& word : counter_) {
            if (++word != 0) break;
        }
    }

    Key key_;
    Block counter_{0, 0, 0, 0};
    Block buffer_{};
    int position_ = 4;
};

}  // namespace transmean
