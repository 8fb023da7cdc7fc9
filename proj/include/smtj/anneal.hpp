#ifndef SMTJ_ANNEAL_HPP
#define SMTJ_ANNEAL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "smtj/simnet.hpp"

namespace smtj::anneal {

// Ising instance over the network's devices. Spins encode P -> -1, AP -> +1.
// Convention: J < 0 is ferromagnetic (same states lower the energy) and maps
// to Positive pipeline polarity; J > 0 maps to Negative polarity.
//
// Joint configurations are indexed with device 0 as the highest bit, so for
// two devices the order matches the 4-state model: 00, 01, 10, 11.
struct IsingProblem {
  int n = 0;
  std::vector<std::vector<double>> j;  // symmetric, zero diagonal

  void validate() const;  // throws ConfigError
};

// Model energy of one configuration: sum over pairs a<b of J_ab s_a s_b.
double model_energy(const IsingProblem& problem, std::uint32_t config);

// Energies of all 2^n configurations, indexed as above.
std::vector<double> energies(const IsingProblem& problem);

struct BoltzmannPrediction {
  std::vector<double> probabilities;  // over 2^n configurations
  double t_eff;                       // T/G, infinite at G = 0
};

// P_i proportional to exp(-gain * E_i / temperature); kT is 1 in model
// units, so only gain/temperature matters. Shift-invariant in the energies.
BoltzmannPrediction boltzmann_distribution(const IsingProblem& problem,
                                           double gain,
                                           double temperature = 1.0);
std::vector<double> boltzmann_from_energies(std::span<const double> e,
                                            double gain, double temperature);

// Physical calibration of one coupling pipeline against one device:
// g(G) = exp(B * dI(G)) and t_eff(G) = T/G.
struct GainCalibration {
  double slope_b_per_a;       // device dwell slope B
  double delta_i_per_gain_a;  // dI(G)/G of the pipeline
  double temperature = 1.0;

  double g(double gain) const;
  double t_eff(double gain) const;
};

GainCalibration calibrate_gain_to_temperature(
    const analog::PipelineConfig& pipeline, const SmtjParams& device);

// One annealing step: hold `gain` for `duration_s`.
struct AnnealStep {
  double duration_s;
  double gain;
};
using AnnealSchedule = std::vector<AnnealStep>;

// Throws ConfigError unless gains are non-decreasing, within [0, 0.1], and
// durations positive.
void validate(const AnnealSchedule& schedule);

struct AnnealStepReport {
  double gain = 0.0;
  double duration_s = 0.0;
  std::vector<double> g;          // calibrated g per device
  std::vector<double> occupancy;  // empirical, over 2^n configurations
  // Calibrated Boltzmann prediction; empty when the problem/couplings are
  // not uniform enough for the equilibrium mapping (unequal |J| or g).
  std::vector<double> boltzmann;
  double t_eff = 0.0;
  double mean_energy = 0.0;  // time-weighted
  std::uint64_t transitions = 0;
};

struct EnergySample {
  double time_s;  // global time across the whole schedule
  double gain;
  double energy;
};

struct AnnealReport {
  std::vector<AnnealStepReport> steps;
  std::vector<EnergySample> energy_trace;  // one row per configuration change
  // (configuration, final-step occupancy), sorted by occupancy descending.
  std::vector<std::pair<std::uint32_t, double>> final_ranking;
};

// A schedule step drove some device past its breakdown limit. Carries the
// report of the steps that completed before the abort.
class AnnealBreakdown : public BreakdownError {
 public:
  AnnealBreakdown(const std::string& msg, AnnealReport partial)
      : BreakdownError(msg), partial_report(std::move(partial)) {}

  AnnealReport partial_report;
};

// Runs one simulate() per schedule step with the step's gain applied to
// every coupling (per-edge gain G*|J_ab|, polarity from the sign of J_ab).
// Device states carry over between steps; step k uses the derived stream
// seed (seed, k). The base spec supplies devices, pipeline constants and
// delay; entries must exist wherever J_ab is nonzero. A gain step that
// reaches a breakdown limit throws AnnealBreakdown naming the step.
AnnealReport anneal(const IsingProblem& problem, const sim::NetworkSpec& base,
                    const AnnealSchedule& schedule, std::uint64_t seed);

}  // namespace smtj::anneal

#endif
