#pragma once

#include <cstdint>

namespace momentkit {

// Counter-based uniform generator. Draw i applies the splitmix64 finalizer
// to seed + (i+1) * 0x9e3779b97f4a7c15, so outputs depend only on (seed, i)
// and never on evaluation order or thread count. uniform01 fills the 53-bit
// mantissa, giving values in [0, 1).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(std::uint64_t counter) const {
    std::uint64_t z = seed_ + (counter + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform01(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform01(counter);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace momentkit
