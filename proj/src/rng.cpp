#include "adaptive_rd/rng.hpp"

#include <algorithm>

namespace adaptive_rd {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Engine SeedStream::engine() const
{
    return Engine(splitmix64(splitmix64(root_) ^ (index_ * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL)));
}

SeedStream SeedStream::child(std::uint64_t index) const
{
    return SeedStream(splitmix64(root_ ^ splitmix64(index_ + 0x632be59bd9b4e019ULL)), index);
}

double uniform01(Engine &rng)
{
    // 53 random mantissa bits, [0, 1)
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(Engine &rng)
{
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

double truncated_normal(Engine &rng, double mean, double sd, double lo, double hi)
{
    for (int attempt = 0; attempt < 1000; ++attempt) {
        double x = mean + sd * standard_normal(rng);
        if (x >= lo && x <= hi)
            return x;
    }
    return std::clamp(mean, lo, hi);
}

} // namespace adaptive_rd
