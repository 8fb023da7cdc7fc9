#ifndef SMTJ_MARKOV_HPP
#define SMTJ_MARKOV_HPP

#include <array>
#include <complex>

#include "smtj/analog.hpp"

namespace smtj::markov {

// Analytic model of a coupled pair. Joint states are indexed
//   0 = (P,P), 1 = (P,AP), 2 = (AP,P), 3 = (AP,AP)
// with device 1 the slower junction (first position, high bit).
//
// Each device's dwell time is multiplied or divided by its g depending on
// whether the partner's state currently stabilises or destabilises it;
// Positive polarity stabilises matching states.
struct CoupledPairModel {
  double tau1_s;           // slower device's balanced dwell time
  double ratio;            // timescale ratio tau1/tau2 >= 1
  double g1 = 1.0;         // exp(B1 * dI) for device 1
  double g2 = 1.0;         // exp(B2 * dI) for device 2
  analog::Polarity polarity = analog::Polarity::Positive;

  void validate() const;   // throws std::invalid_argument
};

// Transition-rate matrix, rows = source states, row sums zero. States
// differing in both bits have rate 0 (simultaneous switches do not occur).
struct Generator4 {
  std::array<std::array<double, 4>, 4> q{};
};

Generator4 build_generator(const CoupledPairModel& model);

// Normalized left null vector of the generator (stationary distribution).
// Solved as the 4x4 linear system (Q^T + 1*1^T) p = 1, which is nonsingular
// exactly when the chain is irreducible; no eigendecomposition involved.
// Throws NumericalError for reducible/degenerate generators.
std::array<double, 4> steady_state(const Generator4& gen);

// Closed-form slowest nonzero eigenvalue for the equal-g model:
//   lambda1 = (1/tau1) * (-b + sqrt(b^2 - 16 g^2 r)) / (2g),
//   b = (g^2 + 1)(r + 1).
// The discriminant is non-negative for all g, r >= 1 (AM-GM twice), so the
// result is real and negative. Throws NumericalError when g1 != g2; use
// spectrum() for the general case.
double slowest_eigenvalue(const CoupledPairModel& model);

// All four eigenvalues, sorted by descending real part. The zero eigenvalue
// is deflated analytically and the remaining cubic is solved in closed form
// with a Newton polish, so equal-g spectra are accurate to ~1e-14 relative.
// Complex pairs can occur for g1 != g2 (the chain loses reversibility).
std::array<std::complex<double>, 4> spectrum(const Generator4& gen);

// Mean dwell time per joint state: -1/q[i][i]. Throws std::invalid_argument
// on a zero diagonal.
std::array<double, 4> joint_dwell_times(const Generator4& gen);

// Pearson correlation of the two +-1-encoded marginals under a distribution
// over the four joint states. Throws UndefinedCorrelationError when a
// marginal has zero variance.
double correlation_from_distribution(const std::array<double, 4>& p);

// correlation_from_distribution at the generator's steady state. Equal-g
// positive polarity reduces to (1 - g^-2)/(1 + g^-2).
double predict_correlation(const Generator4& gen);

}  // namespace smtj::markov

#endif
