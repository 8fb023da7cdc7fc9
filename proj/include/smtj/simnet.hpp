#ifndef SMTJ_SIMNET_HPP
#define SMTJ_SIMNET_HPP

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smtj/analog.hpp"
#include "smtj/errors.hpp"
#include "smtj/trace.hpp"

namespace smtj::sim {

// Deterministic square-wave drive replacing a device's stochastic dynamics
// (the bench "function generator" mode). State is AP on [phase, phase +
// duty*period) within each period.
struct DriveWaveform {
  double period_s;
  double duty = 0.5;
  double phase_s = 0.0;

  MagState state_at(double t) const;
  // First waveform edge strictly after t; +inf when duty is 0 or 1.
  double next_edge_after(double t) const;
};

// N coupled devices. couplings[j][k] is the circuit sensing device k and
// driving device j; the diagonal stays empty.
struct NetworkSpec {
  std::vector<SmtjParams> devices;
  std::vector<std::vector<std::optional<analog::PipelineConfig>>> couplings;
  double delay_s = 1e-6;
  std::map<int, DriveWaveform> drive_overrides;
  double quiescent_tol_a = 1e-8;
};

// Hard errors (shape mismatches, invalid params, breakdown-violating drive
// levels) throw; soft issues (quiescent current off a device's balance
// point) come back as warning strings.
std::vector<std::string> validate(const NetworkSpec& spec);

// Drive current of `device` given the delayed view of all source states:
// the device's balance current plus +-delta_current per incoming pipeline,
// sign set by the source state and the pipeline polarity. Throws
// BreakdownError at or above the device's limit.
double effective_current(const NetworkSpec& spec, int device,
                         std::span<const MagState> delayed_states);

// Event-driven continuous-time simulation over [0, t_end].
//
// Every device holds an exponential clock drawn at the rate implied by its
// current drive. When a device switches at t, each neighbour's view of it
// updates at t + delay (immediately for delay 0), and the neighbour's clock
// is re-drawn at the new rate; the exponential memoryless property makes the
// discard-and-resample exact. Ties process influence updates before
// switches, then go by device index. Each device consumes its own derived
// random stream, so traces are bit-reproducible for a fixed (spec, t_end,
// seed) regardless of how runs are scheduled around this one.
//
// initial_states overrides the default draw (each device's balance-point
// occupancy, i.e. a fair coin). On breakdown the run aborts by throwing
// SimulationBreakdown, which carries the partial traces flagged invalid.
std::vector<TelegraphTrace> simulate(
    const NetworkSpec& spec, double t_end_s, std::uint64_t seed,
    const std::vector<MagState>* initial_states = nullptr);

class SimulationBreakdown : public BreakdownError {
 public:
  SimulationBreakdown(const std::string& msg,
                      std::vector<TelegraphTrace> partial)
      : BreakdownError(msg), partial_traces(std::move(partial)) {}

  std::vector<TelegraphTrace> partial_traces;
};

}  // namespace smtj::sim

#endif
