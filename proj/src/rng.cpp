#include "qnd/rng.hpp"

#include <cmath>
#include <numbers>

namespace qnd {

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

// Uniform on the open interval (0, 1).
inline double to_unit(std::uint32_t u) { return (static_cast<double>(u) + 0.5) * 0x1p-32; }

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter c, Key k) {
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

NormalStream::NormalStream(std::uint64_t seed, std::uint32_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

void NormalStream::refill() {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), stream_, 0u};
    ++block_;
    const auto r = Philox4x32::block(ctr, key_);
    for (int i = 0; i < 4; i += 2) {
        // Box-Muller
        const double rad = std::sqrt(-2.0 * std::log(to_unit(r[i])));
        const double ang = 2.0 * std::numbers::pi * to_unit(r[i + 1]);
        buf_[i] = rad * std::cos(ang);
        buf_[i + 1] = rad * std::sin(ang);
    }
    pos_ = 0;
}

double NormalStream::next() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
}

}  // namespace qnd
