#pragma once

#include <cstdint>

namespace ciw {

// Counter-based generator: value = splitmix64(seed, counter).  Stateless per
// draw, so every random quantity in the suite is reproducible from (seed,
// named counter) regardless of evaluation order or thread count.
inline std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed ^ (0xd1342543de82ef95ULL * stream)) {}

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(splitmix64(seed_, counter_++) >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Symmetric in [-1, 1].
  double sym() { return 2.0 * uniform() - 1.0; }
  std::uint64_t next_u64() { return splitmix64(seed_, counter_++); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace ciw
