#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace retweet {

// Seeded generator with platform-independent draws. The standard
// distributions are implementation-defined, so uniform values and shuffles
// are derived directly from the raw 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n);

  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream seed from the run seed and a purpose name
// ("split", "init", "shuffle", "plot").
std::uint64_t sub_seed(std::uint64_t seed, std::string_view purpose);

}  // namespace retweet
