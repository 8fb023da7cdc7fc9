#ifndef SMTJ_RNG_HPP
#define SMTJ_RNG_HPP

#include <cstdint>
#include <random>

namespace smtj {

// SplitMix64 finalizer. Used to derive independent stream seeds from a master
// seed; the streams are what make sweep results independent of worker count.
std::uint64_t mix64(std::uint64_t x);

// Seed for sub-stream `stream` of `master`. Chaining is fine:
// derive_stream_seed(derive_stream_seed(s, run), device).
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream);

// Deterministic RNG: standardized mt19937_64 engine plus hand-rolled
// transforms, so sequences are reproducible across standard libraries
// (std::*_distribution would not be).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  // Uniform in [0, 1), 53-bit mantissa.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Exponential with the given mean, via inverse CDF.
  double exponential(double mean) {
    return -mean * std::log1p(-uniform());
  }

  // Zero-mean Gaussian (Box-Muller, fixed two draws per call).
  double gaussian(double sigma);

  bool bernoulli(double p_true) { return uniform() < p_true; }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace smtj

#endif
