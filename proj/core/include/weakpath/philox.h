#ifndef WEAKPATH_PHILOX_H
#define WEAKPATH_PHILOX_H

#include <array>
#include <cstdint>

namespace weakpath {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: every 128-bit counter maps to an independent 128-bit output
/// under a 64-bit key, so any sample can be regenerated without replaying a
/// stream.
class Philox4x32 {
   public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(Key key) : key_(key) {
    }
    explicit Philox4x32(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {
    }

    Counter operator()(Counter counter) const;

    const Key &key() const {
        return key_;
    }

   private:
    Key key_;
};

/// Maps two 32-bit words to a double in [0, 1) with 53 random bits.
double uniform_from_words(std::uint32_t hi, std::uint32_t lo);

}  // namespace weakpath

#endif
