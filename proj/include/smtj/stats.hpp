#ifndef SMTJ_STATS_HPP
#define SMTJ_STATS_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "smtj/trace.hpp"

namespace smtj::stats {

// Dwell statistics over the four joint states 00, 01, 10, 11 (first device
// is the high bit). mean_dwell_s is 0 where counts is 0.
struct JointDwellSummary {
  std::array<double, 4> mean_dwell_s{};
  std::array<std::uint64_t, 4> counts{};
  std::array<double, 4> std_err_s{};
  double total_time_s = 0.0;
};

struct CorrelationResult {
  double rho;
  std::uint64_t n_samples;
  double std_err;  // 1/sqrt(n) Fisher-z width mapped back: (1 - rho^2)/sqrt(n)
};

// 1 where v > threshold, else 0 (ties low, like the threshold stage).
std::vector<std::uint8_t> digitize(std::span<const double> v,
                                   double threshold_v);

// Maximal constant-joint-state runs of the synchronized pair; mean run
// length * dt and std/sqrt(count) per state. Every run counts, including the
// two cut off by the series boundaries, so total_time_s (= sum of
// count*mean) equals the series duration exactly.
JointDwellSummary joint_dwell_stats(std::span<const std::uint8_t> a,
                                    std::span<const std::uint8_t> b,
                                    double dt);

// Joint dwell statistics on the exact event timelines of two traces. Here
// the boundary segments are censored observations (their start or end was
// not a switch), so they are excluded from the means.
JointDwellSummary joint_dwell_from_events(const sim::TelegraphTrace& a,
                                          const sim::TelegraphTrace& b);

// Time-weighted joint occupancy of two traces, with standard errors from
// batch means over n_batches equal windows.
struct JointOccupancy {
  std::array<double, 4> p{};
  std::array<double, 4> std_err{};
  double duration_s = 0.0;
  std::uint64_t transitions = 0;
};

JointOccupancy occupancy_from_events(const sim::TelegraphTrace& a,
                                     const sim::TelegraphTrace& b,
                                     int n_batches = 64);

// Sample Pearson coefficient of two 0/1 series. All accumulation is integer,
// so the result is exact for the given samples and identical for any thread
// count. Throws UndefinedCorrelationError on constant input.
CorrelationResult pearson(std::span<const std::uint8_t> a,
                          std::span<const std::uint8_t> b);

// True when the joint-occupancy estimates from the first and second half of
// the series agree within 3 sigma for every joint state, with sigma taken
// from the scatter of window-sized batches. `window_s` is the batch length.
bool equilibration_check(std::span<const std::uint8_t> a,
                         std::span<const std::uint8_t> b, double dt,
                         double window_s);

}  // namespace smtj::stats

#endif
