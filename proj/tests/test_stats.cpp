#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "smtj/device.hpp"
#include "smtj/errors.hpp"
#include "smtj/stats.hpp"
#include "smtj/trace.hpp"

using namespace smtj;
using namespace smtj::stats;

namespace {

sim::TelegraphTrace make_trace(std::vector<double> times,
                               std::vector<std::uint8_t> states,
                               double t_end) {
  sim::TelegraphTrace t;
  t.times_s = std::move(times);
  t.states = std::move(states);
  t.t_end_s = t_end;
  return t;
}

}  // namespace

TEST_CASE("digitize matches the comparator convention") {
  std::vector<double> v = {0.475, 1.045, 0.76, 0.7600001};
  auto bits = digitize(v, 0.76);
  CHECK(bits == std::vector<std::uint8_t>({0, 1, 0, 1}));
  CHECK_THROWS_AS(digitize(v, std::numeric_limits<double>::quiet_NaN()),
                  std::invalid_argument);
}

TEST_CASE("sensed voltage round-trips through digitization") {
  auto params = from_balanced_dwell(2e-4, 2.4e5, 0.95e-3, 500, 1100, 1.1e-3);
  auto tr = make_trace({0.0, 1e-4, 3e-4, 7e-4}, {0, 1, 0, 1}, 1e-3);

  auto volts = sample_voltage(tr, params, 1e-5);
  auto direct = sample_trace(tr, 1e-5);
  REQUIRE(volts.size() == direct.size());
  // Noiseless levels are exactly i_balance * R.
  for (std::size_t i = 0; i < volts.size(); ++i) {
    CHECK(volts[i] == (direct[i] ? 0.95e-3 * 1100.0 : 0.95e-3 * 500.0));
  }
  const double mid = 0.95e-3 * (500.0 + 1100.0) / 2.0;
  CHECK(digitize(volts, mid) == direct);

  // Small additive noise leaves the digitization intact (margin ~0.28 V).
  auto noisy = sample_voltage(tr, params, 1e-5, 0.01, 99);
  CHECK(digitize(noisy, mid) == direct);
  bool perturbed = false;
  for (std::size_t i = 0; i < volts.size(); ++i)
    perturbed = perturbed || noisy[i] != volts[i];
  CHECK(perturbed);
}

TEST_CASE("joint dwell runs over synchronized series") {
  SUBCASE("constant pair is one run covering the series") {
    std::vector<std::uint8_t> a(10, 1), b(10, 1);
    auto s = joint_dwell_stats(a, b, 0.5);
    CHECK(s.counts[3] == 1);
    CHECK(s.mean_dwell_s[3] == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(s.counts[0] == 0);
    CHECK(s.mean_dwell_s[0] == 0.0);
    CHECK(s.std_err_s[3] == 0.0);  // single run, no scatter estimate
    CHECK(s.total_time_s == doctest::Approx(5.0).epsilon(1e-15));
  }
  SUBCASE("runs split exactly at joint-state changes") {
    std::vector<std::uint8_t> a = {0, 0, 1, 1, 0, 0};
    std::vector<std::uint8_t> b = {0, 0, 0, 0, 0, 0};
    auto s = joint_dwell_stats(a, b, 0.5);
    CHECK(s.counts[0] == 2);
    CHECK(s.counts[2] == 1);
    CHECK(s.counts[1] == 0);
    CHECK(s.mean_dwell_s[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.mean_dwell_s[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.std_err_s[0] == 0.0);  // two equal runs
    CHECK(s.total_time_s == doctest::Approx(3.0).epsilon(1e-15));
  }
  SUBCASE("count * mean sums to the series duration") {
    std::mt19937_64 rng(5);
    std::vector<std::uint8_t> a(4096), b(4096);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng() & 1;
      b[i] = rng() & 1;
    }
    auto s = joint_dwell_stats(a, b, 1e-4);
    double sum = 0.0;
    for (int k = 0; k < 4; ++k)
      sum += static_cast<double>(s.counts[k]) * s.mean_dwell_s[k];
    CHECK(sum == doctest::Approx(s.total_time_s).epsilon(1e-12));
    CHECK(s.total_time_s == doctest::Approx(4096 * 1e-4).epsilon(1e-15));
  }
  SUBCASE("argument validation") {
    std::vector<std::uint8_t> a = {0, 1}, b = {0};
    CHECK_THROWS_AS(joint_dwell_stats(a, b, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(joint_dwell_stats({}, {}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(joint_dwell_stats(a, a, 0.0), std::invalid_argument);
  }
}

TEST_CASE("event-timeline dwells censor the boundary segments") {
  // a: P on [0,3), AP on [3,5), P on [5,7]; b: P throughout.
  auto a = make_trace({0.0, 3.0, 5.0}, {0, 1, 0}, 7.0);
  auto b = make_trace({0.0}, {0}, 7.0);
  auto s = joint_dwell_from_events(a, b);
  // The leading and trailing (P,P) segments never observed a full dwell.
  CHECK(s.counts[0] == 0);
  CHECK(s.mean_dwell_s[0] == 0.0);
  CHECK(s.counts[2] == 1);
  CHECK(s.mean_dwell_s[2] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.total_time_s == doctest::Approx(7.0).epsilon(1e-15));

  auto short_b = make_trace({0.0}, {0}, 5.0);
  CHECK_THROWS_AS(joint_dwell_from_events(a, short_b), std::invalid_argument);
}

TEST_CASE("time-weighted occupancy from event timelines") {
  auto a = make_trace({0.0, 3.0, 5.0}, {0, 1, 0}, 7.0);
  auto b = make_trace({0.0}, {0}, 7.0);
  auto occ = occupancy_from_events(a, b, 7);
  CHECK(occ.p[0] == doctest::Approx(5.0 / 7.0).epsilon(1e-12));
  CHECK(occ.p[2] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  CHECK(occ.p[1] == 0.0);
  CHECK(occ.p[3] == 0.0);
  CHECK(occ.p[0] + occ.p[1] + occ.p[2] + occ.p[3] ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(occ.transitions == 2);
  CHECK(occ.duration_s == 7.0);
  CHECK(occ.std_err[0] > 0.0);

  CHECK_THROWS_AS(occupancy_from_events(a, b, 1), std::invalid_argument);
}

TEST_CASE("pearson correlation on binary series") {
  std::mt19937_64 rng(17);
  std::vector<std::uint8_t> a(100000), b(100000), nb(100000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng() & 1;
    b[i] = rng() & 1;
    nb[i] = 1 - a[i];
  }

  SUBCASE("identical and inverted series") {
    CHECK(pearson(a, a).rho == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson(a, nb).rho == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("independent series decorrelate") {
    auto r = pearson(a, b);
    CHECK(std::abs(r.rho) < 0.01);
    CHECK(r.n_samples == a.size());
  }
  SUBCASE("symmetry and the error formula") {
    auto ab = pearson(a, b);
    auto ba = pearson(b, a);
    CHECK(ab.rho == ba.rho);
    CHECK(ab.std_err ==
          (1.0 - ab.rho * ab.rho) /
              std::sqrt(static_cast<double>(ab.n_samples)));
  }
  SUBCASE("hand-computed small case") {
    std::vector<std::uint8_t> x = {0, 0, 1, 1};
    std::vector<std::uint8_t> y = {0, 0, 0, 1};
    // cov*n^2 = 4*1-2 = 2, var_x*n^2 = 4, var_y*n^2 = 3.
    CHECK(pearson(x, y).rho ==
          doctest::Approx(2.0 / std::sqrt(12.0)).epsilon(1e-14));
    std::vector<std::uint8_t> z = {0, 1, 1, 0};
    CHECK(pearson(x, z).rho == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("degenerate inputs") {
    std::vector<std::uint8_t> constant(100, 1);
    std::vector<std::uint8_t> varying(100, 0);
    varying[3] = 1;
    CHECK_THROWS_AS(pearson(constant, varying), UndefinedCorrelationError);
    CHECK_THROWS_AS(pearson(varying, constant), UndefinedCorrelationError);
    std::vector<std::uint8_t> one = {1};
    CHECK_THROWS_AS(pearson(one, one), std::invalid_argument);
  }
}

TEST_CASE("equilibration check compares the two halves") {
  const std::size_t n = 32768;
  const double dt = 1e-3;
  std::mt19937_64 rng(11);
  std::vector<std::uint8_t> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng() & 1;
    b[i] = rng() & 1;
  }

  SUBCASE("stationary series pass") {
    CHECK(equilibration_check(a, b, dt, 2.048));
  }
  SUBCASE("a strong transient fails") {
    auto shifted = a;
    for (std::size_t i = 0; i < n / 2; ++i) shifted[i] = 0;
    CHECK_FALSE(equilibration_check(shifted, b, dt, 2.048));
  }
  SUBCASE("window validation") {
    CHECK_THROWS_AS(equilibration_check(a, b, dt, 40.0),
                    std::invalid_argument);  // longer than the series
    CHECK_THROWS_AS(equilibration_check(a, b, dt, 20.0),
                    std::invalid_argument);  // fewer than four windows
    CHECK_THROWS_AS(equilibration_check(a, b, 0.0, 1.0),
                    std::invalid_argument);
  }
}
