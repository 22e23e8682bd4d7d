#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace penal {

struct Seed {
    std::uint64_t value = 0;
};

struct StreamId {
    std::uint64_t value = 0;
};

// Philox4x32-10 counter-based generator. The key holds the seed, the upper
// counter words hold the stream id, the lower words count blocks.
class RngStream {
  public:
    using result_type = std::uint64_t;

    RngStream(Seed seed, StreamId stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (cursor_ >= kWords) refill();
        const std::uint64_t lo = out_[cursor_];
        const std::uint64_t hi = out_[cursor_ + 1];
        cursor_ += 2;
        return lo | (hi << 32);
    }

    // Uniform on the open interval (0, 1).
    double uniform();
    double normal() { return normal_(*this); }

    // Independent stream derived from this one's (seed, stream) identity.
    RngStream substream(std::uint64_t index) const;

    Seed seed() const { return seed_; }
    StreamId stream() const { return stream_; }

  private:
    // Blocks generated per refill; the word sequence does not depend on it.
    static constexpr int kBlocks = 16;
    static constexpr int kWords = 4 * kBlocks;
    void refill();

    Seed seed_;
    StreamId stream_;
    std::array<std::uint32_t, 2> key_{};
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, kWords> out_{};
    int cursor_ = kWords;
    boost::random::normal_distribution<double> normal_;
};

// One Philox4x32-10 block.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// SplitMix64 finalizer, used to derive stream identities.
std::uint64_t mix64(std::uint64_t x);

}  // namespace penal
