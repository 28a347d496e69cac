// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
//
// Philox4x32-10 counter-based generator. A stream is addressed by
// (seed, replicate, stream) and produces blocks indexed by a 64-bit
// draw counter, so any replicate can be regenerated independently of
// the order in which replicates run.
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace spcut {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) noexcept
{
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += w0;
            key[1] += w1;
        }
        std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
        std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

//! UniformRandomBitGenerator over one (seed, replicate, stream) address.
class PhiloxStream {
  public:
    using result_type = std::uint32_t;

    PhiloxStream(std::uint64_t seed, std::uint32_t replicate, std::uint32_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          replicate_(replicate), stream_(stream)
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        if (pos_ == 4) {
            buf_ = philox4x32_10({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                  stream_, replicate_},
                                 key_);
            ++block_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    //! Uniform double in the open interval (0, 1) from 53 random bits.
    double uniform() noexcept
    {
        std::uint64_t hi = (*this)();
        std::uint64_t lo = (*this)();
        std::uint64_t bits = ((hi << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    //! Skip to an absolute block index.
    void seek(std::uint64_t block) noexcept
    {
        block_ = block;
        pos_ = 4;
    }

  private:
    PhiloxKey key_;
    std::uint32_t replicate_;
    std::uint32_t stream_;
    std::uint64_t block_ = 0;
    PhiloxBlock buf_{};
    int pos_ = 4;
};

//! Hands out streams for one master seed.
class StreamFactory {
  public:
    explicit StreamFactory(std::uint64_t seed) noexcept : seed_(seed) {}

    PhiloxStream operator()(std::uint32_t replicate, std::uint32_t stream) const noexcept
    {
        return {seed_, replicate, stream};
    }
    std::uint64_t seed() const noexcept { return seed_; }

  private:
    std::uint64_t seed_;
};

}  // namespace spcut
