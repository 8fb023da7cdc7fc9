#include "smtj/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smtj/errors.hpp"
#include "smtj/kernels.hpp"

namespace smtj::stats {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

struct RunAccumulator {
  std::array<std::uint64_t, 4> count{};
  std::array<double, 4> sum{};
  std::array<double, 4> sum_sq{};

  void add(int state, double length) {
    ++count[state];
    sum[state] += length;
    sum_sq[state] += length * length;
  }

  void fill(JointDwellSummary& out) const {
    for (int s = 0; s < 4; ++s) {
      out.counts[s] = count[s];
      if (count[s] == 0) continue;
      double n = static_cast<double>(count[s]);
      double mean = sum[s] / n;
      out.mean_dwell_s[s] = mean;
      if (count[s] > 1) {
        double var = (sum_sq[s] - n * mean * mean) / (n - 1.0);
        out.std_err_s[s] = std::sqrt(std::max(0.0, var) / n);
      }
    }
  }
};

// Walks the merged joint-state segments of two event timelines and calls
// visit(state, t_begin, t_end, first, last) per segment.
template <typename Visitor>
void for_each_joint_segment(const sim::TelegraphTrace& a,
                            const sim::TelegraphTrace& b, Visitor&& visit) {
  require(!a.times_s.empty() && !b.times_s.empty(), "empty trace");
  require(a.t_end_s == b.t_end_s, "traces cover different durations");
  std::size_t ia = 0, ib = 0;
  double t = 0.0;
  int state = 2 * a.states[0] + b.states[0];
  bool first = true;
  while (true) {
    double ta = ia + 1 < a.times_s.size() ? a.times_s[ia + 1]
                                          : a.t_end_s;
    double tb = ib + 1 < b.times_s.size() ? b.times_s[ib + 1]
                                          : b.t_end_s;
    bool a_next = ia + 1 < a.times_s.size();
    bool b_next = ib + 1 < b.times_s.size();
    if (!a_next && !b_next) {
      visit(state, t, a.t_end_s, first, true);
      return;
    }
    double tn = std::min(ta, tb);
    if (a_next && ta <= tn) ++ia;
    if (b_next && tb <= tn) ++ib;
    visit(state, t, tn, first, false);
    first = false;
    t = tn;
    state = 2 * a.states[ia] + b.states[ib];
  }
}

}  // namespace

std::vector<std::uint8_t> digitize(std::span<const double> v,
                                   double threshold_v) {
  require(std::isfinite(threshold_v), "threshold must be finite");
  return kernels::digitize(v, threshold_v);
}

JointDwellSummary joint_dwell_stats(std::span<const std::uint8_t> a,
                                    std::span<const std::uint8_t> b,
                                    double dt) {
  require(!a.empty(), "empty series");
  require(a.size() == b.size(), "series length mismatch");
  require(dt > 0.0, "dt must be positive");

  RunAccumulator acc;
  int state = 2 * a[0] + b[0];
  std::uint64_t run = 1;
  for (std::size_t i = 1; i < a.size(); ++i) {
    int s = 2 * a[i] + b[i];
    if (s == state) {
      ++run;
    } else {
      acc.add(state, static_cast<double>(run) * dt);
      state = s;
      run = 1;
    }
  }
  acc.add(state, static_cast<double>(run) * dt);

  JointDwellSummary out;
  acc.fill(out);
  out.total_time_s = static_cast<double>(a.size()) * dt;
  return out;
}

JointDwellSummary joint_dwell_from_events(const sim::TelegraphTrace& a,
                                          const sim::TelegraphTrace& b) {
  RunAccumulator acc;
  double total = 0.0;
  for_each_joint_segment(
      a, b, [&](int state, double t0, double t1, bool first, bool last) {
        total += t1 - t0;
        if (first || last) return;  // censored at the boundary
        acc.add(state, t1 - t0);
      });
  JointDwellSummary out;
  acc.fill(out);
  out.total_time_s = total;
  return out;
}

JointOccupancy occupancy_from_events(const sim::TelegraphTrace& a,
                                     const sim::TelegraphTrace& b,
                                     int n_batches) {
  require(n_batches >= 2, "need at least two batches");
  double t_end = a.t_end_s;
  require(t_end > 0.0, "empty observation window");

  JointOccupancy out;
  out.duration_s = t_end;
  out.transitions = a.transitions() + b.transitions();

  // Per-batch occupancy: segments are split across batch boundaries.
  std::vector<std::array<double, 4>> batch(
      n_batches, std::array<double, 4>{0.0, 0.0, 0.0, 0.0});
  double batch_len = t_end / n_batches;
  for_each_joint_segment(
      a, b, [&](int state, double t0, double t1, bool, bool) {
        int b0 = std::min(n_batches - 1,
                          static_cast<int>(std::floor(t0 / batch_len)));
        int b1 = std::min(n_batches - 1,
                          static_cast<int>(std::floor(t1 / batch_len)));
        for (int w = b0; w <= b1; ++w) {
          double lo = std::max(t0, w * batch_len);
          double hi = std::min(t1, (w + 1) * batch_len);
          if (hi > lo) batch[w][state] += hi - lo;
        }
      });

  for (int s = 0; s < 4; ++s) {
    double mean = 0.0;
    for (const auto& w : batch) mean += w[s];
    out.p[s] = mean / t_end;
    mean = 0.0;
    for (const auto& w : batch) mean += w[s] / batch_len;
    mean /= n_batches;
    double var = 0.0;
    for (const auto& w : batch) {
      double d = w[s] / batch_len - mean;
      var += d * d;
    }
    var /= (n_batches - 1);
    out.std_err[s] = std::sqrt(var / n_batches);
  }
  return out;
}

CorrelationResult pearson(std::span<const std::uint8_t> a,
                          std::span<const std::uint8_t> b) {
  require(a.size() == b.size(), "series length mismatch");
  require(a.size() >= 2, "need at least two samples");
  auto c = kernels::pair_counts(a, b);
  // Exact integer moments: covariance and variances scaled by n^2. The n^2
  // products stay within int64 for n up to ~3e9 samples.
  require(c.n < 3000000000ULL, "series too long for exact accumulation");
  auto i64 = [](std::uint64_t v) { return static_cast<std::int64_t>(v); };
  std::int64_t n = i64(c.n);
  std::int64_t cov_n2 = n * i64(c.sum_ab) - i64(c.sum_a) * i64(c.sum_b);
  std::int64_t var_a_n2 = n * i64(c.sum_a) - i64(c.sum_a) * i64(c.sum_a);
  std::int64_t var_b_n2 = n * i64(c.sum_b) - i64(c.sum_b) * i64(c.sum_b);
  if (var_a_n2 == 0 || var_b_n2 == 0) {
    throw UndefinedCorrelationError("constant series has no correlation");
  }
  double rho = static_cast<double>(cov_n2) /
               std::sqrt(static_cast<double>(var_a_n2) *
                         static_cast<double>(var_b_n2));
  rho = std::clamp(rho, -1.0, 1.0);
  CorrelationResult out;
  out.rho = rho;
  out.n_samples = c.n;
  out.std_err = (1.0 - rho * rho) / std::sqrt(static_cast<double>(c.n));
  return out;
}

bool equilibration_check(std::span<const std::uint8_t> a,
                         std::span<const std::uint8_t> b, double dt,
                         double window_s) {
  require(a.size() == b.size(), "series length mismatch");
  require(dt > 0.0 && window_s > 0.0, "dt and window must be positive");
  double duration = static_cast<double>(a.size()) * dt;
  require(window_s < duration, "window must be shorter than the series");
  std::size_t per_win = static_cast<std::size_t>(window_s / dt);
  require(per_win >= 1, "window shorter than one sample");
  std::size_t n_win = a.size() / per_win;
  require(n_win >= 4, "need at least four windows");

  std::size_t half = n_win / 2;
  // Occupancy fraction per window, then compare the two halves per state.
  for (int s = 0; s < 4; ++s) {
    double mean[2] = {0.0, 0.0};
    double sumsq[2] = {0.0, 0.0};
    std::size_t cnt[2] = {half, n_win - half};
    for (std::size_t w = 0; w < n_win; ++w) {
      std::uint64_t hits = 0;
      for (std::size_t i = w * per_win; i < (w + 1) * per_win; ++i) {
        if (2 * a[i] + b[i] == s) ++hits;
      }
      double f = static_cast<double>(hits) / static_cast<double>(per_win);
      int g = w < half ? 0 : 1;
      mean[g] += f;
      sumsq[g] += f * f;
    }
    double se2 = 0.0;
    for (int g = 0; g < 2; ++g) {
      double m = mean[g] / cnt[g];
      double var = (sumsq[g] - cnt[g] * m * m) / (cnt[g] - 1.0);
      se2 += std::max(0.0, var) / cnt[g];
      mean[g] = m;
    }
    double diff = std::abs(mean[0] - mean[1]);
    if (diff > 3.0 * std::sqrt(se2) + 1e-12) return false;
  }
  return true;
}

}  // namespace smtj::stats
