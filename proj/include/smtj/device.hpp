#ifndef SMTJ_DEVICE_HPP
#define SMTJ_DEVICE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smtj/rng.hpp"

namespace smtj {

// Free-layer orientation of a superparamagnetic tunnel junction.
// P = parallel (low resistance), AP = antiparallel (high resistance).
enum class MagState : std::uint8_t { P = 0, AP = 1 };

inline MagState flipped(MagState s) {
  return s == MagState::P ? MagState::AP : MagState::P;
}

// Thermally activated two-state junction biased by a DC current.
//
// Mean dwell times follow an Arrhenius law with a bias-linearised barrier:
//
//   tau_AP(I) = tau0 * exp(-(dE/kT) * (1 - (I - I0)/Ic))
//   tau_P(I)  = tau0 * exp(-(dE/kT) * (1 + (I - I0)/Ic))
//
// so raising the current above the balance point I0 stabilises AP and
// destabilises P. Only the combination B = (dE/kT)/Ic and the balanced dwell
// tau(I0) = tau0*exp(-dE/kT) are observable in the dwell statistics; see
// from_balanced_dwell() for the reduced parameterisation.
struct SmtjParams {
  double tau0_s;         // dwell prefactor (zero-barrier extrapolation)
  double barrier_kt;     // dE/kT, dimensionless
  double i_crit_a;       // bias-sensitivity current scale Ic
  double i_balance_a;    // I0, current of equal P/AP occupancy
  double r_p_ohm;        // parallel-state resistance
  double r_ap_ohm;       // antiparallel-state resistance
  double i_breakdown_a;  // hard upper current limit

  // Dwell slope: d(ln tau_AP)/dI = -d(ln tau_P)/dI.
  double slope_b_per_a() const { return barrier_kt / i_crit_a; }

  // Dwell time of either state at the balance current.
  double balanced_dwell_s() const;

  // Throws std::invalid_argument when a physical constraint is violated.
  void validate() const;
};

// Builds params from the reduced pair (tau(I0), B). The split into
// (tau0, dE/kT, Ic) is not observable in the dwell statistics, so the
// barrier is anchored canonically: dE/kT = ln(tau_balance / 1 ns), as if
// escape attempts ran at 1 GHz. tau_balance_s must exceed 1 ns.
SmtjParams from_balanced_dwell(double tau_balance_s, double slope_b_per_a,
                               double i_balance_a, double r_p_ohm,
                               double r_ap_ohm, double i_breakdown_a);

// Mean dwell time of `state` at bias current `i_a`. Throws
// std::invalid_argument on non-finite input; the breakdown guard lives in
// sample_dwell and the network simulator.
double mean_dwell_time(const SmtjParams& p, MagState state, double i_a);

// Stationary occupancy of `state` at bias `i_a`:
//   P_AP(I) = 1 / (1 + exp(-2*(dE/kT)*(I - I0)/Ic)),  P_P = 1 - P_AP.
// Equals tau_state / (tau_P + tau_AP).
double state_probability(const SmtjParams& p, MagState state, double i_a);

// Junction resistance in `state`.
double resistance(const SmtjParams& p, MagState state);

// One exponential dwell sample at the given state and bias.
double sample_dwell(const SmtjParams& p, MagState state, double i_a, Rng& rng);

// Named parameter sets for the three measured junctions. The balance
// currents are measured values; dwell scales, slopes and resistances are
// approximations read off characterisation plots (see presets.cpp).
struct DevicePreset {
  std::string name;
  double tau_balance_s;
  double slope_b_per_a;
  SmtjParams params;
};

std::span<const DevicePreset> device_presets();

// Throws ConfigError for an unknown name.
const DevicePreset& find_preset(const std::string& name);

}  // namespace smtj

#endif
