#ifndef SMTJ_TRACE_HPP
#define SMTJ_TRACE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "smtj/device.hpp"

namespace smtj::sim {

// One switching event, as exported in event CSVs.
struct SimEvent {
  double time_s;
  int device;
  MagState new_state;
};

// Telegraph signal of one device over [0, t_end]: entry i says the device
// entered states[i] at times[i]. times[0] == 0 carries the initial state and
// consecutive states alternate.
struct TelegraphTrace {
  int device = 0;
  std::vector<double> times_s;
  std::vector<std::uint8_t> states;  // 0 = P, 1 = AP
  double t_end_s = 0.0;
  std::optional<double> sample_hint_s;
  bool valid = true;  // false when a run aborted (breakdown)

  std::size_t transitions() const {
    return times_s.empty() ? 0 : times_s.size() - 1;
  }
};

// Zero-order-hold sampling at interval dt over [0, t_end): dwells shorter
// than dt can vanish, which is exactly the sampling artifact the analysis
// tools quantify.
std::vector<std::uint8_t> sample_trace(const TelegraphTrace& trace, double dt);

// Idealized sensed voltage i_balance * R(state) at the same sample points,
// optionally with additive Gaussian noise of the given sigma.
std::vector<double> sample_voltage(const TelegraphTrace& trace,
                                   const SmtjParams& params, double dt,
                                   double noise_sigma_v = 0.0,
                                   std::uint64_t noise_seed = 0);

}  // namespace smtj::sim

#endif
