#ifndef GENBOUND_RANDOM_HPP
#define GENBOUND_RANDOM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <thread>
#include <utility>
#include <vector>

namespace genbound {

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based 64-bit generator: output k of stream `key` is mix64(key + k * golden).
/// Streams for parallel replicas are keyed by (master_seed, replica_index), so a
/// replica's draws never depend on scheduling.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = kDefaultSeed) noexcept : state_(seed) {}

  static SplitMix64 stream(std::uint64_t master_seed, std::uint64_t index) noexcept {
    return SplitMix64(mix64(master_seed ^ mix64(index + 0x632BE59BD9B4E019ULL)));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Rademacher sign.
  int sign() noexcept { return ((*this)() >> 63) ? 1 : -1; }

 private:
  std::uint64_t state_;
};

/// Evaluates `fn(r)` for r in [0, count) on `workers` threads and returns the
/// results in index order. Callers reduce the vector sequentially, so the
/// outcome is identical for every worker count.
template <class Fn>
auto parallel_replicas(std::size_t count, unsigned workers, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  std::vector<T> out(count);
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    for (std::size_t r = 0; r < count; ++r) out[r] = fn(r);
    return out;
  }
  const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (unsigned w = 0; w < used; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < count; r += used) out[r] = fn(r);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

/// Sample mean and standard error of the mean.
struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline MeanEstimate mean_and_stderr(const std::vector<double>& xs) {
  MeanEstimate est;
  if (xs.empty()) return est;
  double sum = 0.0;
  for (double x : xs) sum += x;
  est.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return est;
  double ss = 0.0;
  for (double x : xs) ss += (x - est.mean) * (x - est.mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  est.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
  return est;
}

}  // namespace genbound

#endif  // GENBOUND_RANDOM_HPP
