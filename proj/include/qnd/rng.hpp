#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace qnd {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr const char* kName = "philox4x32-10";

    static Counter block(Counter ctr, Key key);
};

/// Stream of standard normal deviates: key = seed, counter words 2 and 3
/// select a sub-stream, words 0 and 1 count blocks.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint32_t stream);

    double next();

private:
    void refill();

    Philox4x32::Key key_;
    std::uint64_t block_ = 0;
    std::uint32_t stream_;
    std::array<double, 4> buf_{};
    int pos_ = 4;
};

}  // namespace qnd
