#pragma once

#include <cstdint>
#include <cstddef>
#include <string_view>

namespace effscreen {

// Identifies one reproducible random stream: a master seed plus a stream index
// (conventionally the replication id). Key derivation is pure, so any worker can
// reconstruct any stream independently.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

// Domain tags keep streams that serve different purposes disjoint even when they
// share (master_seed, stream_index).
enum : std::uint64_t {
  kDomainResponse = 0x01,     // response-vector noise
  kDomainPermutation = 0x02,  // permutation draws inside the step-up test
  kDomainScenario = 0x03,     // per-scenario master derivation
};

std::uint64_t mix64(std::uint64_t z);
std::uint64_t seed_combine(std::uint64_t h, std::uint64_t word);
std::uint64_t fnv1a64(std::string_view s);

// Standard normal CDF and its inverse (Wichura's rational approximations for the
// quantile; absolute error below 1e-15 over the full double range).
double normal_cdf(double x);
double normal_quantile(double p);

// Counter-based generator: output i is a bijective 64-bit mix of (key + i*odd).
// No hidden state beyond the counter, so jump-ahead and replay are trivial.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static CounterRng from(const SeedSpec& seed, std::uint64_t domain, std::uint64_t salt = 0) {
    std::uint64_t k = seed_combine(seed.master_seed, seed.stream_index);
    k = seed_combine(k, domain);
    k = seed_combine(k, salt);
    return CounterRng(k);
  }

  std::uint64_t next_u64() {
    counter_ += 0x9E3779B97F4A7C15ULL;
    return mix64(key_ + counter_);
  }

  // Uniform on the open interval (0, 1); never returns an exact endpoint.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal() { return normal_quantile(next_unit()); }

  // Unbiased-enough bounded draw (multiply-shift; bias < 2^-53 for bound < 2^11).
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  // Fisher-Yates shuffle of data[0..n-1], consuming exactly n-1 draws.
  template <typename T>
  void shuffle(T* data, std::size_t n) {
    for (std::size_t i = n - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i + 1));
      T tmp = data[i];
      data[i] = data[j];
      data[j] = tmp;
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace effscreen
