#pragma once

// Counter-based random streams. A stream is keyed by a tuple such as
// (seed, step, prompt index, rollout index); the n-th draw is a pure
// function of the key and n, so results never depend on scheduling.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>

namespace autothink {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::initializer_list<std::uint64_t> key) {
    std::uint64_t k = 0x243f6a8885a308d3ULL;
    for (auto part : key) k = splitmix64(k ^ splitmix64(part));
    key_ = k;
  }

  std::uint64_t next_u64() { return splitmix64(key_ + 0x632be59bd9b4e019ULL * counter_++); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n == 0");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Inverse-CDF draw; probabilities are assumed to sum to ~1.
  std::size_t categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    // Rounding slack: fall back to the last non-zero entry.
    for (std::size_t i = probs.size(); i-- > 0;) {
      if (probs[i] > 0.0) return i;
    }
    return 0;
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Domain tags that keep independent stream families apart.
enum class StreamTag : std::uint64_t {
  kTasks = 1,
  kPromptPick = 2,
  kRollout = 3,
  kRebalance = 4,
  kEnvironment = 5,
};

}  // namespace autothink
