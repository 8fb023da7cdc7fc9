#include "smtj/simnet.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "smtj/kernels.hpp"

namespace smtj::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

MagState DriveWaveform::state_at(double t) const {
  double u = std::fmod(t - phase_s, period_s);
  if (u < 0.0) u += period_s;
  return u < duty * period_s ? MagState::AP : MagState::P;
}

double DriveWaveform::next_edge_after(double t) const {
  if (duty <= 0.0 || duty >= 1.0) return kInf;
  // Edges at phase + k*period (rise) and phase + (k + duty)*period (fall),
  // built from the integer period count to avoid accumulation drift.
  double k = std::floor((t - phase_s) / period_s);
  for (int i = 0; i < 4; ++i) {
    double rise = phase_s + (k + i) * period_s;
    double fall = rise + duty * period_s;
    if (rise > t) return rise;
    if (fall > t) return fall;
  }
  return kInf;  // unreachable for finite inputs
}

std::vector<std::string> validate(const NetworkSpec& spec) {
  std::size_t n = spec.devices.size();
  check(n > 0, "network needs at least one device");
  check(spec.couplings.size() == n,
        "coupling matrix row count does not match device count");
  check(std::isfinite(spec.delay_s) && spec.delay_s >= 0.0,
        "delay must be non-negative");
  for (const auto& params : spec.devices) params.validate();
  for (const auto& [idx, wave] : spec.drive_overrides) {
    check(idx >= 0 && static_cast<std::size_t>(idx) < n,
          "drive override index out of range");
    check(std::isfinite(wave.period_s) && wave.period_s > 0.0,
          "drive waveform period must be positive");
    check(wave.duty >= 0.0 && wave.duty <= 1.0,
          "drive waveform duty must be in [0, 1]");
  }

  std::vector<std::string> warnings;
  for (std::size_t j = 0; j < n; ++j) {
    check(spec.couplings[j].size() == n,
          "coupling matrix column count does not match device count");
    double worst_case = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!spec.couplings[j][k].has_value()) continue;
      check(j != k, "self-coupling is not allowed");
      const auto& cfg = *spec.couplings[j][k];
      analog::validate(cfg);
      worst_case += analog::delta_current(cfg);
      double dc = analog::dc_current(cfg);
      if (std::abs(dc - spec.devices[j].i_balance_a) > spec.quiescent_tol_a) {
        std::ostringstream msg;
        msg << "device " << j << ": pipeline from " << k
            << " has quiescent current " << dc
            << " A, off the balance point " << spec.devices[j].i_balance_a
            << " A";
        warnings.push_back(msg.str());
      }
    }
    // Breakdown must be unreachable even with every source aligned high.
    if (spec.devices[j].i_balance_a + worst_case >=
        spec.devices[j].i_breakdown_a) {
      std::ostringstream msg;
      msg << "device " << j << ": worst-case drive "
          << spec.devices[j].i_balance_a + worst_case
          << " A reaches the breakdown limit "
          << spec.devices[j].i_breakdown_a << " A";
      throw BreakdownError(msg.str());
    }
  }
  return warnings;
}

double effective_current(const NetworkSpec& spec, int device,
                         std::span<const MagState> delayed_states) {
  if (delayed_states.size() != spec.devices.size())
    throw std::invalid_argument("delayed_states size mismatch");
  const auto& params = spec.devices[device];
  double i = params.i_balance_a;
  for (std::size_t k = 0; k < spec.devices.size(); ++k) {
    const auto& cfg = spec.couplings[device][k];
    if (!cfg.has_value()) continue;
    bool high = (delayed_states[k] == MagState::AP) ==
                (cfg->threshold.polarity == analog::Polarity::Positive);
    double di = analog::delta_current(*cfg);
    i += high ? di : -di;
  }
  if (i >= params.i_breakdown_a) {
    std::ostringstream msg;
    msg << "device " << device << " driven at " << i
        << " A, at or above breakdown limit " << params.i_breakdown_a << " A";
    throw BreakdownError(msg.str());
  }
  return i;
}

namespace {

// Per-source-state drive contribution of one pipeline, precomputed once.
struct Edge {
  int source;
  double contrib[2];  // indexed by source MagState
};

struct PendingUpdate {
  double time_s;
  int target;
  int source;
  MagState source_state;
};

}  // namespace

std::vector<TelegraphTrace> simulate(
    const NetworkSpec& spec, double t_end_s, std::uint64_t seed,
    const std::vector<MagState>* initial_states) {
  check(std::isfinite(t_end_s) && t_end_s > 0.0, "t_end must be positive");
  validate(spec);
  int n = static_cast<int>(spec.devices.size());
  if (initial_states != nullptr) {
    check(static_cast<int>(initial_states->size()) == n,
          "initial_states size mismatch");
  }

  // outgoing[k]: targets whose drive reacts to device k. incoming[j]:
  // per-source contribution table for device j's drive current.
  std::vector<std::vector<int>> outgoing(n);
  std::vector<std::vector<Edge>> incoming(n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const auto& cfg = spec.couplings[j][k];
      if (!cfg.has_value()) continue;
      double di = analog::delta_current(*cfg);
      bool positive = cfg->threshold.polarity == analog::Polarity::Positive;
      Edge e;
      e.source = k;
      e.contrib[static_cast<int>(MagState::P)] = positive ? -di : di;
      e.contrib[static_cast<int>(MagState::AP)] = positive ? di : -di;
      incoming[j].push_back(e);
      outgoing[k].push_back(j);
    }
  }

  std::vector<Rng> rng;
  rng.reserve(n);
  for (int j = 0; j < n; ++j) {
    rng.emplace_back(derive_stream_seed(seed, static_cast<std::uint64_t>(j)));
  }

  std::vector<MagState> state(n);
  std::vector<std::vector<MagState>> view(n);  // delayed source states
  std::vector<double> current(n);
  std::vector<double> next_switch(n, kInf);
  std::vector<TelegraphTrace> traces(n);
  std::deque<PendingUpdate> pending;

  auto driven = [&](int j) { return spec.drive_overrides.contains(j); };

  auto recompute_current = [&](int j) {
    double i = spec.devices[j].i_balance_a;
    for (const Edge& e : incoming[j]) {
      i += e.contrib[static_cast<int>(view[j][e.source])];
    }
    return i;
  };

  auto abort_breakdown = [&](int j, double t) -> void {
    std::ostringstream msg;
    msg << "device " << j << " driven at " << current[j]
        << " A, at or above breakdown limit " << spec.devices[j].i_breakdown_a
        << " A at t=" << t << " s";
    for (auto& tr : traces) {
      tr.valid = false;
      tr.t_end_s = t;
    }
    throw SimulationBreakdown(msg.str(), std::move(traces));
  };

  auto redraw = [&](int j, double t) {
    if (driven(j)) return;
    double mean = mean_dwell_time(spec.devices[j], state[j], current[j]);
    next_switch[j] = t + rng[j].exponential(mean);
  };

  // Initialisation: states first (one draw per free device, in index order),
  // then the coupled currents and the initial clocks.
  for (int j = 0; j < n; ++j) {
    if (driven(j)) {
      state[j] = spec.drive_overrides.at(j).state_at(0.0);
    } else if (initial_states != nullptr) {
      state[j] = (*initial_states)[j];
    } else {
      double p_ap = state_probability(spec.devices[j], MagState::AP,
                                      spec.devices[j].i_balance_a);
      state[j] = rng[j].bernoulli(p_ap) ? MagState::AP : MagState::P;
    }
  }
  for (int j = 0; j < n; ++j) {
    view[j] = state;
    traces[j].device = j;
    traces[j].t_end_s = t_end_s;
    traces[j].times_s.push_back(0.0);
    traces[j].states.push_back(static_cast<std::uint8_t>(state[j]));
  }
  for (int j = 0; j < n; ++j) {
    current[j] = recompute_current(j);
    if (current[j] >= spec.devices[j].i_breakdown_a) abort_breakdown(j, 0.0);
  }
  for (int j = 0; j < n; ++j) {
    if (driven(j)) {
      next_switch[j] = spec.drive_overrides.at(j).next_edge_after(0.0);
    } else {
      redraw(j, 0.0);
    }
  }

  // An influence update for target j: refresh its view of the source and,
  // if the drive current actually moved, re-draw its clock.
  auto apply_update = [&](int target, int source, MagState src_state,
                          double t) {
    view[target][source] = src_state;
    double i = recompute_current(target);
    if (i == current[target]) return;
    current[target] = i;
    if (i >= spec.devices[target].i_breakdown_a) abort_breakdown(target, t);
    redraw(target, t);
  };

  while (true) {
    double t_update = pending.empty() ? kInf : pending.front().time_s;
    int next_dev = 0;
    for (int j = 1; j < n; ++j) {
      if (next_switch[j] < next_switch[next_dev]) next_dev = j;
    }
    double t_switch = next_switch[next_dev];
    double t = std::min(t_update, t_switch);
    if (t > t_end_s) break;

    if (t_update <= t_switch) {
      PendingUpdate u = pending.front();
      pending.pop_front();
      apply_update(u.target, u.source, u.source_state, u.time_s);
      continue;
    }

    int j = next_dev;
    state[j] = flipped(state[j]);
    traces[j].times_s.push_back(t);
    traces[j].states.push_back(static_cast<std::uint8_t>(state[j]));

    for (int target : outgoing[j]) {
      if (spec.delay_s == 0.0) {
        apply_update(target, j, state[j], t);
      } else {
        pending.push_back({t + spec.delay_s, target, j, state[j]});
      }
    }

    if (driven(j)) {
      next_switch[j] = spec.drive_overrides.at(j).next_edge_after(t);
    } else {
      redraw(j, t);
    }
  }

  return traces;
}

std::vector<std::uint8_t> sample_trace(const TelegraphTrace& trace,
                                       double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  std::size_t count = kernels::sample_count(trace.t_end_s, dt);
  return kernels::sample_zoh(trace.times_s, trace.states, dt, count);
}

std::vector<double> sample_voltage(const TelegraphTrace& trace,
                                   const SmtjParams& params, double dt,
                                   double noise_sigma_v,
                                   std::uint64_t noise_seed) {
  auto states = sample_trace(trace, dt);
  std::vector<double> v(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    v[i] = params.i_balance_a *
           resistance(params, static_cast<MagState>(states[i]));
  }
  if (noise_sigma_v > 0.0) {
    Rng rng(noise_seed);
    for (auto& x : v) x += rng.gaussian(noise_sigma_v);
  }
  return v;
}

}  // namespace smtj::sim
