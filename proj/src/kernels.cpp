#include "smtj/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smtj::kernels {

namespace serial {

std::vector<std::uint8_t> digitize(std::span<const double> v,
                                   double threshold) {
  std::vector<std::uint8_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i] > threshold ? 1 : 0;
  }
  return out;
}

PairCounts pair_counts(std::span<const std::uint8_t> a,
                       std::span<const std::uint8_t> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("pair_counts: length mismatch");
  PairCounts c;
  c.n = a.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.sum_a += a[i];
    c.sum_b += b[i];
    c.sum_ab += static_cast<std::uint64_t>(a[i]) * b[i];
    ++c.joint[2 * a[i] + b[i]];
  }
  return c;
}

std::vector<std::uint8_t> sample_zoh(std::span<const double> times,
                                     std::span<const std::uint8_t> values,
                                     double dt, std::size_t n_samples) {
  if (times.empty() || times.size() != values.size())
    throw std::invalid_argument("sample_zoh: bad step function");
  std::vector<std::uint8_t> out(n_samples);
  // Single forward sweep; sample times are non-decreasing.
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    double t = static_cast<double>(k) * dt;
    while (seg + 1 < times.size() && times[seg + 1] <= t) ++seg;
    out[k] = values[seg];
  }
  return out;
}

}  // namespace serial

std::vector<std::uint8_t> digitize(std::span<const double> v,
                                   double threshold) {
  std::vector<std::uint8_t> out(v.size());
  const double* p = v.data();
  std::uint8_t* o = out.data();
  std::int64_t n = static_cast<std::int64_t>(v.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    o[i] = p[i] > threshold ? 1 : 0;
  }
  return out;
}

PairCounts pair_counts(std::span<const std::uint8_t> a,
                       std::span<const std::uint8_t> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("pair_counts: length mismatch");
  const std::uint8_t* pa = a.data();
  const std::uint8_t* pb = b.data();
  std::int64_t n = static_cast<std::int64_t>(a.size());
  std::uint64_t sa = 0, sb = 0, sab = 0, j0 = 0, j1 = 0, j2 = 0, j3 = 0;
#pragma omp parallel for schedule(static) \
    reduction(+ : sa, sb, sab, j0, j1, j2, j3)
  for (std::int64_t i = 0; i < n; ++i) {
    std::uint64_t ai = pa[i], bi = pb[i];
    sa += ai;
    sb += bi;
    sab += ai * bi;
    switch (2 * ai + bi) {
      case 0: ++j0; break;
      case 1: ++j1; break;
      case 2: ++j2; break;
      default: ++j3; break;
    }
  }
  PairCounts c;
  c.n = static_cast<std::uint64_t>(n);
  c.sum_a = sa;
  c.sum_b = sb;
  c.sum_ab = sab;
  c.joint = {j0, j1, j2, j3};
  return c;
}

std::size_t sample_count(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end >= 0.0))
    throw std::invalid_argument("sample_count: need dt > 0 and t_end >= 0");
  auto n = static_cast<std::size_t>(std::floor(t_end / dt));
  while (static_cast<double>(n) * dt < t_end) ++n;
  while (n > 0 && static_cast<double>(n - 1) * dt >= t_end) --n;
  return n;
}

std::vector<std::uint8_t> sample_zoh(std::span<const double> times,
                                     std::span<const std::uint8_t> values,
                                     double dt, std::size_t n_samples) {
  if (times.empty() || times.size() != values.size())
    throw std::invalid_argument("sample_zoh: bad step function");
  std::vector<std::uint8_t> out(n_samples);
  const double* pt = times.data();
  const std::uint8_t* pv = values.data();
  std::uint8_t* o = out.data();
  std::int64_t n = static_cast<std::int64_t>(n_samples);
  std::int64_t m = static_cast<std::int64_t>(times.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    double t = static_cast<double>(k) * dt;
    // Last event with time <= t; times[0] == 0 guarantees it exists.
    std::int64_t idx =
        std::upper_bound(pt, pt + m, t) - pt - 1;
    o[k] = pv[idx];
  }
  return out;
}

}  // namespace smtj::kernels
