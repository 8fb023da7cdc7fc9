// Compares the OpenMP kernels against the serial reference implementations
// on synthetic data: same results required, timings reported. Returns
// nonzero if any pair of implementations disagrees.

#include <omp.h>

#include <cstdint>
#include <cstdio>
#include <vector>

#include "smtj/kernels.hpp"
#include "smtj/rng.hpp"

namespace {

using smtj::kernels::PairCounts;

double time_best_of(int reps, auto&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = omp_get_wtime();
    fn();
    best = std::min(best, omp_get_wtime() - t0);
  }
  return best;
}

}  // namespace

int main() {
  const std::size_t n = 1u << 22;
  smtj::Rng rng(0xb1e55edULL);

  std::vector<double> volts(n);
  for (auto& v : volts) v = rng.uniform();
  std::vector<std::uint8_t> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.bernoulli(0.4) ? 1 : 0;
    b[i] = rng.bernoulli(0.6) ? 1 : 0;
  }
  // Event times of a synthetic telegraph signal, plus sample instants.
  std::vector<double> times;
  double t = 0.0;
  while (t < 100.0) {
    times.push_back(t);
    t += rng.exponential(2e-4);
  }
  const double dt = 5e-5;
  const std::size_t n_samples = smtj::kernels::sample_count(100.0, dt);
  std::vector<std::uint8_t> states(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) states[i] = i & 1;

  std::printf("threads available: %d\n", omp_get_max_threads());
  std::printf("%-14s %12s %12s %8s\n", "kernel", "serial [ms]", "openmp [ms]",
              "match");

  bool all_ok = true;

  std::vector<std::uint8_t> dig_s, dig_p;
  const double ts_dig =
      time_best_of(3, [&] { dig_s = smtj::kernels::serial::digitize(volts, 0.5); });
  const double tp_dig =
      time_best_of(3, [&] { dig_p = smtj::kernels::digitize(volts, 0.5); });
  const bool ok_dig = dig_s == dig_p;
  all_ok = all_ok && ok_dig;
  std::printf("%-14s %12.3f %12.3f %8s\n", "digitize", ts_dig * 1e3,
              tp_dig * 1e3, ok_dig ? "yes" : "NO");

  PairCounts pc_s, pc_p;
  const double ts_pc =
      time_best_of(3, [&] { pc_s = smtj::kernels::serial::pair_counts(a, b); });
  const double tp_pc =
      time_best_of(3, [&] { pc_p = smtj::kernels::pair_counts(a, b); });
  const bool ok_pc = pc_s == pc_p;
  all_ok = all_ok && ok_pc;
  std::printf("%-14s %12.3f %12.3f %8s\n", "pair_counts", ts_pc * 1e3,
              tp_pc * 1e3, ok_pc ? "yes" : "NO");

  std::vector<std::uint8_t> z_s, z_p;
  const double ts_z = time_best_of(3, [&] {
    z_s = smtj::kernels::serial::sample_zoh(times, states, dt, n_samples);
  });
  const double tp_z = time_best_of(3, [&] {
    z_p = smtj::kernels::sample_zoh(times, states, dt, n_samples);
  });
  const bool ok_z = z_s == z_p;
  all_ok = all_ok && ok_z;
  std::printf("%-14s %12.3f %12.3f %8s\n", "sample_zoh", ts_z * 1e3,
              tp_z * 1e3, ok_z ? "yes" : "NO");

  if (!all_ok) {
    std::printf("MISMATCH between serial and OpenMP results\n");
    return 1;
  }
  return 0;
}
