#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "smtj/config.hpp"
#include "smtj/errors.hpp"

using namespace smtj;
using namespace smtj::cfg;

namespace {

const char* kPairConfig = R"({
  "mode": "simulate",
  "seed": 42,
  "duration_s": 0.5,
  "sample_dt_s": 1e-6,
  "delay_s": 2e-6,
  "devices": ["smtj1", "smtj2"],
  "couplings": [
    {"target": 1, "source": 0, "gain": 0.03, "polarity": "positive"},
    {"target": 0, "source": 1, "gain": 0.03, "polarity": "positive"}
  ],
  "initial_states": ["P", "AP"]
})";

}  // namespace

TEST_CASE("parse fills every field of the pair config") {
  auto spec = parse_experiment(kPairConfig);
  CHECK(spec.mode == Mode::Simulate);
  CHECK(spec.seed == 42);
  CHECK(spec.duration_s == 0.5);
  REQUIRE(spec.sample_dt_s.has_value());
  CHECK(*spec.sample_dt_s == 1e-6);
  CHECK(spec.delay_s == 2e-6);
  REQUIRE(spec.devices.size() == 2);
  CHECK(spec.devices[0].preset == "smtj1");
  CHECK_FALSE(spec.devices[0].params.has_value());
  REQUIRE(spec.couplings.size() == 2);
  CHECK(spec.couplings[0].target == 1);
  CHECK(spec.couplings[0].source == 0);
  REQUIRE(spec.couplings[0].shorthand.has_value());
  CHECK(spec.couplings[0].shorthand->gain == 0.03);
  REQUIRE(spec.initial_states.has_value());
  CHECK((*spec.initial_states)[0] == MagState::P);
  CHECK((*spec.initial_states)[1] == MagState::AP);
}

TEST_CASE("mode is optional and defaults to simulate") {
  auto spec = parse_experiment(R"({"devices": ["smtj1"]})");
  CHECK(spec.mode == Mode::Simulate);
  CHECK(spec.seed == 1);
  CHECK(spec.duration_s == 1.0);
  CHECK_FALSE(spec.sample_dt_s.has_value());
}

TEST_CASE("canonical write/parse round trip is byte stable") {
  auto spec = parse_experiment(kPairConfig);
  auto text1 = write_experiment(spec);
  auto spec2 = parse_experiment(text1);
  auto text2 = write_experiment(spec2);
  CHECK(text1 == text2);

  // Also with a full pipeline coupling, sweep gains and an anneal section.
  ExperimentSpec rich = spec;
  rich.mode = Mode::Sweep;
  rich.sweep_gains = {0.0, 0.01, 0.02};
  rich.couplings[0].shorthand.reset();
  rich.couplings[0].pipeline = analog::make_pipeline(
      0.02, analog::Polarity::Negative, 0.76, 0.9e-3);
  auto t3 = write_experiment(rich);
  CHECK(write_experiment(parse_experiment(t3)) == t3);
}

TEST_CASE("device entries accept presets, reduced and explicit forms") {
  auto preset = parse_experiment(R"({"devices": ["smtj1"]})");
  auto reduced = parse_experiment(R"({"devices": [{
    "tau_balance_s": 2e-4, "slope_b_per_a": 2.4e5, "i_balance_a": 0.95e-3,
    "r_p_ohm": 500, "r_ap_ohm": 1100, "i_breakdown_a": 1.1e-3}]})");
  const auto& a = preset.devices[0].resolve();
  const auto& b = reduced.devices[0].resolve();
  CHECK(a.tau0_s == doctest::Approx(b.tau0_s).epsilon(1e-12));
  CHECK(a.barrier_kt == doctest::Approx(b.barrier_kt).epsilon(1e-12));
  CHECK(a.i_crit_a == doctest::Approx(b.i_crit_a).epsilon(1e-12));

  // Explicit form passes the raw parameters through.
  auto expl = parse_experiment(R"({"devices": [{
    "tau0_s": 1.0, "barrier_kt": 12.0, "i_crit_a": 5e-5,
    "i_balance_a": 0.95e-3, "r_p_ohm": 500, "r_ap_ohm": 1100,
    "i_breakdown_a": 1.1e-3}]})");
  CHECK(expl.devices[0].resolve().barrier_kt == 12.0);
  CHECK(expl.devices[0].resolve().tau0_s == 1.0);
}

TEST_CASE("config errors carry context") {
  // Not JSON at all.
  CHECK_THROWS_AS(parse_experiment("{nope"), ConfigError);
  // Unknown keys at several levels.
  CHECK_THROWS_AS(parse_experiment(R"({"devices": ["smtj1"], "Seed": 1})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment(R"({"devices": [{"tau_balance_s": 1e-4,
    "slope_b_per_a": 2e5, "i_balance_a": 1e-3, "r_p_ohm": 500,
    "r_ap_ohm": 1100, "i_breakdown_a": 2e-3, "bogus": 1}]})"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_experiment(R"({"devices": ["smtj1", "smtj2"], "couplings": [
        {"target": 1, "source": 0, "gain": 0.01, "polarity": "positive",
         "extra": true}]})"),
      ConfigError);
  // Unknown preset, bad polarity, bad state.
  CHECK_THROWS_AS(parse_experiment(R"({"devices": ["smtj7"]})"), ConfigError);
  CHECK_THROWS_AS(
      parse_experiment(R"({"devices": ["smtj1", "smtj2"], "couplings": [
        {"target": 1, "source": 0, "gain": 0.01, "polarity": "up"}]})"),
      ConfigError);
  CHECK_THROWS_AS(parse_experiment(
                      R"({"devices": ["smtj1"], "initial_states": ["X"]})"),
                  ConfigError);
  // Structural validation.
  CHECK_THROWS_AS(parse_experiment(R"({"devices": []})"), ConfigError);
  CHECK_THROWS_AS(
      parse_experiment(R"({"devices": ["smtj1", "smtj2"], "couplings": [
        {"target": 2, "source": 0, "gain": 0.01, "polarity": "positive"}]})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_experiment(R"({"devices": ["smtj1", "smtj2"], "couplings": [
        {"target": 0, "source": 0, "gain": 0.01, "polarity": "positive"}]})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_experiment(R"({"devices": ["smtj1", "smtj2"], "couplings": [
        {"target": 1, "source": 0, "gain": 0.2, "polarity": "positive"}]})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_experiment(R"({"devices": ["smtj1"], "duration_s": -1})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_experiment(R"({"mode": "sweep", "devices": ["smtj1", "smtj2"]})"),
      ConfigError);  // sweep without sweep_gains
  CHECK_THROWS_AS(
      parse_experiment(R"({"mode": "anneal", "devices": ["smtj1"]})"),
      ConfigError);  // anneal without section
  CHECK_THROWS_AS(parse_experiment(R"({"mode": "anneal",
    "devices": ["smtj1", "smtj2"],
    "anneal": {"j": [[0.0, -1.0]]}})"),
                  ConfigError);  // j not n x n
  CHECK_THROWS_AS(
      parse_experiment(R"({"devices": ["smtj1"],
        "initial_states": ["P", "AP"]})"),
      ConfigError);  // wrong initial_states length
}

TEST_CASE("load_experiment reports the file path") {
  try {
    load_experiment("/nonexistent/path.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/path.json") !=
          std::string::npos);
  }
}

TEST_CASE("build_network expands shorthand couplings") {
  auto spec = parse_experiment(kPairConfig);
  auto net = build_network(spec);
  REQUIRE(net.devices.size() == 2);
  CHECK(net.delay_s == 2e-6);
  REQUIRE(net.couplings[1][0].has_value());
  REQUIRE(net.couplings[0][1].has_value());
  CHECK_FALSE(net.couplings[0][0].has_value());

  const auto& cp = *net.couplings[1][0];
  CHECK(cp.gain.gain() == doctest::Approx(0.03).epsilon(1e-15));
  // Threshold reference defaults to the source's midpoint sense voltage:
  // smtj1 at 0.95 mA across (500 + 1100)/2 ohm reads 0.76 V.
  CHECK(cp.threshold.reference_v() == doctest::Approx(0.76).epsilon(1e-12));
  // Quiescent drive sits on the target's balance current (smtj2, 0.90 mA).
  CHECK(analog::dc_current(cp) ==
        doctest::Approx(net.devices[1].i_balance_a).epsilon(1e-12));
  CHECK(analog::dc_current(*net.couplings[0][1]) ==
        doctest::Approx(net.devices[0].i_balance_a).epsilon(1e-12));

  // An explicit threshold reference wins over the midpoint default.
  auto spec2 = parse_experiment(R"({
    "devices": ["smtj1", "smtj2"],
    "couplings": [{"target": 1, "source": 0, "gain": 0.01,
                   "polarity": "negative", "threshold_ref_v": 0.5}]})");
  auto net2 = build_network(spec2);
  CHECK(net2.couplings[1][0]->threshold.reference_v() ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(net2.couplings[1][0]->threshold.polarity ==
        analog::Polarity::Negative);
}

TEST_CASE("network_at_gain rescales every coupling") {
  auto spec = parse_experiment(kPairConfig);
  for (double g : {0.0, 0.02, 0.06}) {
    auto net = network_at_gain(spec, g);
    CHECK(net.couplings[1][0]->gain.gain() ==
          doctest::Approx(g).epsilon(1e-15));
    CHECK(net.couplings[0][1]->gain.gain() ==
          doctest::Approx(g).epsilon(1e-15));
  }
  CHECK_THROWS_AS(network_at_gain(spec, 0.11), ConfigError);
  CHECK_THROWS_AS(network_at_gain(spec, -0.01), ConfigError);
}

TEST_CASE("drive overrides and anneal sections parse") {
  auto spec = parse_experiment(R"({
    "mode": "anneal",
    "devices": ["smtj1", "smtj2"],
    "couplings": [
      {"target": 1, "source": 0, "gain": 0.0, "polarity": "positive"},
      {"target": 0, "source": 1, "gain": 0.0, "polarity": "positive"}
    ],
    "drive_overrides": [{"device": 0, "period_s": 1e-3, "duty": 0.25,
                         "phase_s": 1e-4}],
    "anneal": {
      "j": [[0.0, -1.0], [-1.0, 0.0]],
      "schedule": [{"duration_s": 0.1, "gain": 0.0},
                   {"duration_s": 0.2, "gain": 0.05}]
    }
  })");
  REQUIRE(spec.drive_overrides.size() == 1);
  CHECK(spec.drive_overrides[0].device == 0);
  CHECK(spec.drive_overrides[0].waveform.period_s == 1e-3);
  CHECK(spec.drive_overrides[0].waveform.duty == 0.25);
  REQUIRE(spec.anneal.has_value());
  CHECK(spec.anneal->j[0][1] == -1.0);
  REQUIRE(spec.anneal->schedule.has_value());
  CHECK(spec.anneal->schedule->size() == 2);
  CHECK((*spec.anneal->schedule)[1].gain == 0.05);

  auto net = build_network(spec);
  CHECK(net.drive_overrides.count(0) == 1);
  CHECK(net.drive_overrides.at(0).duty == 0.25);
}

TEST_CASE("mode names round trip") {
  for (Mode m : {Mode::Simulate, Mode::Sweep, Mode::Analyze, Mode::Anneal})
    CHECK(mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(mode_from_string("jog"), ConfigError);
}
