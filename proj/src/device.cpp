#include "smtj/device.hpp"

#include <cmath>
#include <stdexcept>

#include "smtj/errors.hpp"

namespace smtj {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

double SmtjParams::balanced_dwell_s() const {
  return tau0_s * std::exp(-barrier_kt);
}

void SmtjParams::validate() const {
  require(std::isfinite(tau0_s) && tau0_s > 0.0, "tau0_s must be positive");
  require(std::isfinite(barrier_kt) && barrier_kt > 0.0,
          "barrier_kt must be positive");
  require(std::isfinite(i_crit_a) && i_crit_a > 0.0,
          "i_crit_a must be positive");
  require(std::isfinite(i_balance_a) && i_balance_a > 0.0,
          "i_balance_a must be positive");
  require(std::isfinite(r_p_ohm) && r_p_ohm > 0.0, "r_p_ohm must be positive");
  require(std::isfinite(r_ap_ohm) && r_ap_ohm > r_p_ohm,
          "r_ap_ohm must exceed r_p_ohm");
  require(std::isfinite(i_breakdown_a) && i_breakdown_a > i_balance_a,
          "i_breakdown_a must exceed i_balance_a");
}

SmtjParams from_balanced_dwell(double tau_balance_s, double slope_b_per_a,
                               double i_balance_a, double r_p_ohm,
                               double r_ap_ohm, double i_breakdown_a) {
  constexpr double kAttemptTime = 1e-9;
  require(std::isfinite(tau_balance_s) && tau_balance_s > kAttemptTime,
          "tau_balance_s must exceed the 1 ns attempt time");
  require(std::isfinite(slope_b_per_a) && slope_b_per_a > 0.0,
          "slope_b_per_a must be positive");
  SmtjParams p{};
  // Anchor dE/kT to a 1 ns Arrhenius attempt time; the prefactor then
  // follows from tau(I0) = tau0 * exp(-dE/kT).
  p.barrier_kt = std::log(tau_balance_s / kAttemptTime);
  p.tau0_s = tau_balance_s * (tau_balance_s / kAttemptTime);
  p.i_crit_a = p.barrier_kt / slope_b_per_a;
  p.i_balance_a = i_balance_a;
  p.r_p_ohm = r_p_ohm;
  p.r_ap_ohm = r_ap_ohm;
  p.i_breakdown_a = i_breakdown_a;
  p.validate();
  return p;
}

double mean_dwell_time(const SmtjParams& p, MagState state, double i_a) {
  require(std::isfinite(i_a), "bias current must be finite");
  // sign = +1 stabilises AP above balance, destabilises P, and vice versa.
  double sign = state == MagState::AP ? 1.0 : -1.0;
  double x = (i_a - p.i_balance_a) / p.i_crit_a;
  return p.tau0_s * std::exp(-p.barrier_kt * (1.0 - sign * x));
}

double state_probability(const SmtjParams& p, MagState state, double i_a) {
  require(std::isfinite(i_a), "bias current must be finite");
  double sign = state == MagState::AP ? 1.0 : -1.0;
  double x = (i_a - p.i_balance_a) / p.i_crit_a;
  return 1.0 / (1.0 + std::exp(-2.0 * p.barrier_kt * sign * x));
}

double resistance(const SmtjParams& p, MagState state) {
  return state == MagState::AP ? p.r_ap_ohm : p.r_p_ohm;
}

double sample_dwell(const SmtjParams& p, MagState state, double i_a,
                    Rng& rng) {
  if (i_a >= p.i_breakdown_a) {
    throw BreakdownError("bias current " + std::to_string(i_a) +
                         " A at or above breakdown limit " +
                         std::to_string(p.i_breakdown_a) + " A");
  }
  return rng.exponential(mean_dwell_time(p, state, i_a));
}

}  // namespace smtj
