#include "penal/rng.hpp"

namespace penal {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

RngStream::RngStream(Seed seed, StreamId stream) : seed_(seed), stream_(stream) {
    const std::uint64_t k = mix64(seed.value);
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void RngStream::refill() {
    // Structure of arrays so the rounds vectorize across blocks.
    std::uint32_t c0[kBlocks], c1[kBlocks], c2[kBlocks], c3[kBlocks];
    for (int j = 0; j < kBlocks; ++j) {
        const std::uint64_t b = block_ + static_cast<std::uint64_t>(j);
        c0[j] = static_cast<std::uint32_t>(b);
        c1[j] = static_cast<std::uint32_t>(b >> 32);
        c2[j] = static_cast<std::uint32_t>(stream_.value);
        c3[j] = static_cast<std::uint32_t>(stream_.value >> 32);
    }
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
        for (int j = 0; j < kBlocks; ++j) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0[j];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2[j];
            const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[j] ^ k0;
            const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[j] ^ k1;
            c1[j] = static_cast<std::uint32_t>(p1);
            c3[j] = static_cast<std::uint32_t>(p0);
            c0[j] = n0;
            c2[j] = n2;
        }
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    for (int j = 0; j < kBlocks; ++j) {
        out_[4 * j] = c0[j];
        out_[4 * j + 1] = c1[j];
        out_[4 * j + 2] = c2[j];
        out_[4 * j + 3] = c3[j];
    }
    block_ += kBlocks;
    cursor_ = 0;
}

double RngStream::uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

RngStream RngStream::substream(std::uint64_t index) const {
    return RngStream(seed_, StreamId{mix64(stream_.value ^ mix64(index + 0x51ED2701ull))});
}

}  // namespace penal
