#pragma once

#include <boost/random/normal_distribution.hpp>

#include <array>
#include <cstdint>

namespace fracpersist {

/*
 * Philox4x32-10 (Salmon et al., SC'11). A counter-based generator: the
 * output is a pure function of (key, counter), so path j can draw from its
 * own substream without any shared state. Sample paths are therefore the
 * same whatever order worker threads reach them in.
 */
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          counter_{0u, 0u, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)}
    {
    }

    /// Next block of four 32-bit words.
    Block next() noexcept
    {
        Block out = round_trip(counter_, key_);
        if (++counter_[0] == 0) ++counter_[1];
        return out;
    }

    static Block round_trip(Block ctr, std::array<std::uint32_t, 2> key) noexcept
    {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    std::array<std::uint32_t, 2> key_;
    Block counter_;
};

/// Philox substream exposed as a 32-bit uniform random bit generator.
class PhiloxEngine {
public:
    using result_type = std::uint32_t;

    PhiloxEngine(std::uint64_t seed, std::uint64_t stream) noexcept : gen_(seed, stream) {}

    static constexpr result_type min() noexcept { return 0u; }
    static constexpr result_type max() noexcept { return 0xffffffffu; }

    result_type operator()() noexcept
    {
        if (used_ == 4) {
            block_ = gen_.next();
            used_ = 0;
        }
        return block_[used_++];
    }

private:
    Philox4x32 gen_;
    Philox4x32::Block block_{};
    int used_ = 4;
};

/// Standard normal variates from one Philox substream (ziggurat method).
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept : engine_(seed, stream) {}

    double operator()() { return normal_(engine_); }

    template <typename It>
    void fill(It first, It last)
    {
        for (; first != last; ++first) *first = normal_(engine_);
    }

private:
    PhiloxEngine engine_;
    boost::random::normal_distribution<double> normal_;
};

}  // namespace fracpersist
