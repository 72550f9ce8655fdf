#pragma once

#include <cstdint>
#include <random>

namespace adaptive_rd {

using Engine = std::mt19937_64;

// A named position in a tree of random streams. The same (root, index) always
// yields the same engine state; distinct indices are decorrelated by hashing
// both words through SplitMix64 before seeding.
class SeedStream {
  public:
    constexpr SeedStream() = default;
    constexpr SeedStream(std::uint64_t root, std::uint64_t index) : root_(root), index_(index) {}

    std::uint64_t root() const noexcept { return root_; }
    std::uint64_t index() const noexcept { return index_; }

    Engine engine() const;
    // A fresh stream rooted at this one; children of distinct streams never collide
    // in practice (64-bit mixed keys).
    SeedStream child(std::uint64_t index) const;

    friend bool operator==(const SeedStream &, const SeedStream &) = default;

  private:
    std::uint64_t root_ = 0;
    std::uint64_t index_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

double uniform01(Engine &rng);
double standard_normal(Engine &rng);
// Normal(mean, sd) restricted to [lo, hi] by rejection. Falls back to clamping
// after a bounded number of attempts so pathological bounds cannot hang.
double truncated_normal(Engine &rng, double mean, double sd, double lo, double hi);

} // namespace adaptive_rd
