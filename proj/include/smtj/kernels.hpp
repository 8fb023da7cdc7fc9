#ifndef SMTJ_KERNELS_HPP
#define SMTJ_KERNELS_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace smtj::kernels {

// Array kernels behind the trace statistics. Each has an OpenMP version
// (the default entry point) and a serial reference in kernels::serial; the
// two must produce bit-identical results for any thread count, which is why
// the accumulators are integers. tools/bench_kernels.cpp times the pairs.

struct PairCounts {
  std::uint64_t n = 0;
  std::uint64_t sum_a = 0;
  std::uint64_t sum_b = 0;
  std::uint64_t sum_ab = 0;
  std::array<std::uint64_t, 4> joint{};  // index 2a + b

  bool operator==(const PairCounts&) const = default;
};

// 1 where v > threshold, else 0 (ties low).
std::vector<std::uint8_t> digitize(std::span<const double> v,
                                   double threshold);

// Totals for two equal-length binary series.
PairCounts pair_counts(std::span<const std::uint8_t> a,
                       std::span<const std::uint8_t> b);

// Number of sample points k*dt in [0, t_end).
std::size_t sample_count(double t_end, double dt);

// Zero-order hold: out[k] = value at time k*dt of the step function defined
// by (times, values), times[0] == 0, times ascending.
std::vector<std::uint8_t> sample_zoh(std::span<const double> times,
                                     std::span<const std::uint8_t> values,
                                     double dt, std::size_t n_samples);

namespace serial {
std::vector<std::uint8_t> digitize(std::span<const double> v,
                                   double threshold);
PairCounts pair_counts(std::span<const std::uint8_t> a,
                       std::span<const std::uint8_t> b);
std::vector<std::uint8_t> sample_zoh(std::span<const double> times,
                                     std::span<const std::uint8_t> values,
                                     double dt, std::size_t n_samples);
}  // namespace serial

}  // namespace smtj::kernels

#endif
