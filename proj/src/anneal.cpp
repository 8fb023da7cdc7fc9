#include "smtj/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <vector>

#include "smtj/errors.hpp"
#include "smtj/rng.hpp"

namespace smtj::anneal {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Device 0 occupies the highest bit of a configuration index.
int spin_of(std::uint32_t config, int n, int device) {
  return (config >> (n - 1 - device)) & 1u ? +1 : -1;
}

}  // namespace

void IsingProblem::validate() const {
  require(n >= 1, "ising problem needs at least one device");
  require(n <= 16, "ising problem too large (max 16 devices)");
  require(static_cast<int>(j.size()) == n, "coupling matrix must be n x n");
  for (int a = 0; a < n; ++a) {
    require(static_cast<int>(j[a].size()) == n, "coupling matrix must be n x n");
    require(j[a][a] == 0.0, "coupling matrix needs a zero diagonal");
    for (int b = 0; b < n; ++b) {
      require(std::isfinite(j[a][b]), "coupling matrix must be finite");
      require(j[a][b] == j[b][a], "coupling matrix must be symmetric");
    }
  }
}

double model_energy(const IsingProblem& problem, std::uint32_t config) {
  double e = 0.0;
  for (int a = 0; a < problem.n; ++a)
    for (int b = a + 1; b < problem.n; ++b)
      e += problem.j[a][b] * spin_of(config, problem.n, a) *
           spin_of(config, problem.n, b);
  return e;
}

std::vector<double> energies(const IsingProblem& problem) {
  problem.validate();
  std::vector<double> e(std::size_t{1} << problem.n);
  for (std::uint32_t c = 0; c < e.size(); ++c) e[c] = model_energy(problem, c);
  return e;
}

std::vector<double> boltzmann_from_energies(std::span<const double> e,
                                            double gain, double temperature) {
  require(gain >= 0.0 && std::isfinite(gain), "gain must be finite and >= 0");
  require(temperature > 0.0, "temperature must be positive");
  std::vector<double> p(e.size());
  if (e.empty()) return p;
  // exp(-G*E/kT), shifted by the max exponent before normalizing.
  double top = -kInf;
  for (std::size_t i = 0; i < e.size(); ++i) {
    p[i] = -gain * e[i] / temperature;
    top = std::max(top, p[i]);
  }
  double z = 0.0;
  for (auto& w : p) z += (w = std::exp(w - top));
  for (auto& w : p) w /= z;
  return p;
}

BoltzmannPrediction boltzmann_distribution(const IsingProblem& problem,
                                           double gain, double temperature) {
  auto e = energies(problem);
  BoltzmannPrediction out;
  out.probabilities = boltzmann_from_energies(e, gain, temperature);
  out.t_eff = gain > 0.0 ? temperature / gain : kInf;
  return out;
}

double GainCalibration::g(double gain) const {
  return std::exp(slope_b_per_a * delta_i_per_gain_a * gain);
}

double GainCalibration::t_eff(double gain) const {
  return gain > 0.0 ? temperature / gain : kInf;
}

GainCalibration calibrate_gain_to_temperature(
    const analog::PipelineConfig& pipeline, const SmtjParams& device) {
  device.validate();
  GainCalibration cal;
  cal.slope_b_per_a = device.slope_b_per_a();
  // dI is linear in G; the per-unit slope follows from the closed form.
  cal.delta_i_per_gain_a = pipeline.shift.input_gain() *
                           (pipeline.threshold.v_high_v / 2.0) /
                           pipeline.transcond.r_1_ohm;
  return cal;
}

void validate(const AnnealSchedule& schedule) {
  require(!schedule.empty(), "annealing schedule is empty");
  double prev = -kInf;
  for (const auto& step : schedule) {
    require(std::isfinite(step.duration_s) && step.duration_s > 0.0,
            "schedule durations must be positive");
    require(step.gain >= 0.0 && step.gain <= 0.1,
            "schedule gains must lie within [0, 0.1]");
    require(step.gain >= prev, "schedule gains must be non-decreasing");
    prev = step.gain;
  }
}

namespace {

// Walks all traces of one step in lockstep, accumulating time per joint
// configuration and appending an energy sample at every configuration change.
struct StepAccumulator {
  std::vector<double> occupancy;
  double mean_energy = 0.0;
  std::uint32_t final_config = 0;
};

StepAccumulator walk_step(const std::vector<sim::TelegraphTrace>& traces,
                          const std::vector<double>& energy,
                          double t_offset_s, double gain,
                          std::vector<EnergySample>& trail) {
  const int n = static_cast<int>(traces.size());
  StepAccumulator acc;
  acc.occupancy.assign(std::size_t{1} << n, 0.0);

  std::uint32_t config = 0;
  std::vector<std::size_t> ptr(n, 1);
  for (int i = 0; i < n; ++i)
    if (traces[i].states[0] == static_cast<std::uint8_t>(MagState::AP))
      config |= 1u << (n - 1 - i);

  const double t_end = traces[0].t_end_s;
  trail.push_back({t_offset_s, gain, energy[config]});

  double t = 0.0;
  while (t < t_end) {
    double t_next = t_end;
    for (int i = 0; i < n; ++i)
      if (ptr[i] < traces[i].times_s.size())
        t_next = std::min(t_next, traces[i].times_s[ptr[i]]);
    acc.occupancy[config] += t_next - t;
    if (t_next >= t_end) break;
    for (int i = 0; i < n; ++i)
      while (ptr[i] < traces[i].times_s.size() &&
             traces[i].times_s[ptr[i]] == t_next) {
        const std::uint32_t bit = 1u << (n - 1 - i);
        if (traces[i].states[ptr[i]] == static_cast<std::uint8_t>(MagState::AP))
          config |= bit;
        else
          config &= ~bit;
        ++ptr[i];
      }
    trail.push_back({t_offset_s + t_next, gain, energy[config]});
    t = t_next;
  }

  for (std::size_t c = 0; c < acc.occupancy.size(); ++c)
    acc.mean_energy += acc.occupancy[c] * energy[c];
  acc.mean_energy /= t_end;
  acc.final_config = config;
  return acc;
}

// Occupancy ranking of the last completed step; empty when nothing ran.
void rank_final_step(AnnealReport& report) {
  if (report.steps.empty()) return;
  const auto& last = report.steps.back();
  report.final_ranking.reserve(last.occupancy.size());
  for (std::uint32_t c = 0; c < last.occupancy.size(); ++c)
    report.final_ranking.emplace_back(c, last.occupancy[c]);
  std::stable_sort(report.final_ranking.begin(), report.final_ranking.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

AnnealReport anneal(const IsingProblem& problem, const sim::NetworkSpec& base,
                    const AnnealSchedule& schedule, std::uint64_t seed) {
  problem.validate();
  validate(schedule);
  const int n = problem.n;
  require(static_cast<int>(base.devices.size()) == n,
          "network template and ising problem disagree on device count");

  for (int t = 0; t < n; ++t)
    for (int s = 0; s < n; ++s)
      if (problem.j[t][s] != 0.0 && !base.couplings[t][s].has_value()) {
        std::ostringstream msg;
        msg << "coupling " << s << " -> " << t
            << " carries nonzero J but the network template has no pipeline";
        throw ConfigError(msg.str());
      }

  // Common |J| across nonzero edges, if there is one (Boltzmann mapping).
  double j_ref = 0.0;
  bool uniform_j = true;
  for (int a = 0; a < n && uniform_j; ++a)
    for (int b = a + 1; b < n; ++b) {
      const double m = std::abs(problem.j[a][b]);
      if (m == 0.0) continue;
      if (j_ref == 0.0)
        j_ref = m;
      else if (!close_rel(m, j_ref, 1e-9)) {
        uniform_j = false;
        break;
      }
    }

  const auto energy = energies(problem);
  AnnealReport report;
  report.steps.reserve(schedule.size());

  std::vector<MagState> carry;
  double t_offset = 0.0;

  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const auto& step = schedule[k];
    sim::NetworkSpec spec = base;
    for (int t = 0; t < n; ++t)
      for (int s = 0; s < n; ++s)
        if (auto& cp = spec.couplings[t][s]) {
          cp->gain.r_gain_ohm =
              step.gain * std::abs(problem.j[t][s]) * cp->gain.r_gs_ohm;
          if (problem.j[t][s] != 0.0)
            cp->threshold.polarity = problem.j[t][s] < 0.0
                                         ? analog::Polarity::Positive
                                         : analog::Polarity::Negative;
        }

    // Per-device calibrated g: defined when every incoming nonzero-J edge
    // stabilizes with the same exponent.
    std::vector<double> g_dev(n, 1.0);
    bool uniform_g = true;
    double ln_g_common = 0.0;
    bool have_edge = false;
    for (int t = 0; t < n; ++t) {
      double ln_g = 0.0;
      bool seen = false, consistent = true;
      for (int s = 0; s < n; ++s) {
        if (problem.j[t][s] == 0.0) continue;
        const double di = analog::delta_current(*spec.couplings[t][s]);
        const double lg = base.devices[t].slope_b_per_a() * di;
        if (!seen) {
          ln_g = lg;
          seen = true;
        } else if (!close_rel(lg, ln_g, 1e-9)) {
          consistent = false;
        }
      }
      if (!seen) continue;
      g_dev[t] = consistent ? std::exp(ln_g)
                            : std::numeric_limits<double>::quiet_NaN();
      if (!consistent) uniform_g = false;
      if (!have_edge) {
        ln_g_common = ln_g;
        have_edge = true;
      } else if (!close_rel(ln_g, ln_g_common, 1e-9)) {
        uniform_g = false;
      }
    }

    std::vector<sim::TelegraphTrace> traces;
    try {
      sim::validate(spec);
      traces = sim::simulate(spec, step.duration_s,
                             derive_stream_seed(seed, k),
                             carry.empty() ? nullptr : &carry);
    } catch (const BreakdownError& e) {
      std::ostringstream msg;
      msg << "annealing step " << k + 1 << " of " << schedule.size()
          << " (gain " << step.gain << "): " << e.what();
      rank_final_step(report);
      throw AnnealBreakdown(msg.str(), std::move(report));
    }

    auto acc = walk_step(traces, energy, t_offset, step.gain,
                         report.energy_trace);

    AnnealStepReport sr;
    sr.gain = step.gain;
    sr.duration_s = step.duration_s;
    sr.g = g_dev;
    sr.occupancy.resize(acc.occupancy.size());
    for (std::size_t c = 0; c < acc.occupancy.size(); ++c)
      sr.occupancy[c] = acc.occupancy[c] / step.duration_s;
    sr.mean_energy = acc.mean_energy;
    for (const auto& tr : traces) sr.transitions += tr.transitions();

    // ln g^2 = 2 G |E~| / kT fixes the model temperature the coupled system
    // samples at; only meaningful for uniform |J| and uniform g.
    if (uniform_j && uniform_g && j_ref > 0.0 && have_edge) {
      if (ln_g_common > 0.0) {
        const double t_model = step.gain * j_ref / ln_g_common;
        sr.boltzmann = boltzmann_from_energies(energy, step.gain, t_model);
        sr.t_eff = t_model / step.gain;
      } else {
        sr.boltzmann.assign(energy.size(), 1.0 / energy.size());
        sr.t_eff = kInf;
      }
    } else {
      sr.t_eff = kInf;
    }

    carry.resize(n);
    for (int i = 0; i < n; ++i)
      carry[i] = static_cast<MagState>(traces[i].states.back());
    t_offset += step.duration_s;
    report.steps.push_back(std::move(sr));
  }

  rank_final_step(report);
  return report;
}

}  // namespace smtj::anneal
