// Acceptance suite. Each criterion prints one [PASS]/[FAIL] line; the
// process exits 0 only if every criterion holds. All runs are seeded, so a
// passing build passes forever.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "smtj/anneal.hpp"
#include "smtj/config.hpp"
#include "smtj/device.hpp"
#include "smtj/experiment.hpp"
#include "smtj/markov.hpp"
#include "smtj/simnet.hpp"
#include "smtj/stats.hpp"

using namespace smtj;

namespace {

std::vector<std::string> g_notes;

bool expect(bool ok, const std::string& what) {
  if (!ok) g_notes.push_back(what);
  return ok;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

double midpoint_v(const SmtjParams& p) {
  return p.i_balance_a * (p.r_p_ohm + p.r_ap_ohm) / 2.0;
}

// ln g per unit gain for the stock pipeline into a B = 2.4e5 device.
constexpr double kLnGPerGain = 2.4e5 * 1.25e-4;

sim::NetworkSpec pair_net(const SmtjParams& d0, const SmtjParams& d1,
                          double gain, analog::Polarity pol) {
  sim::NetworkSpec net;
  net.devices = {d0, d1};
  net.couplings.assign(2,
                       std::vector<std::optional<analog::PipelineConfig>>(2));
  net.couplings[0][1] =
      analog::make_pipeline(gain, pol, midpoint_v(d0), d0.i_balance_a);
  net.couplings[1][0] =
      analog::make_pipeline(gain, pol, midpoint_v(d1), d1.i_balance_a);
  net.delay_s = 0.0;
  return net;
}

markov::CoupledPairModel equal_g_model(double tau_s, double ratio, double g) {
  markov::CoupledPairModel m;
  m.tau1_s = tau_s * ratio;  // device 1 of the model is the slower one
  m.ratio = ratio;
  m.g1 = g;
  m.g2 = g;
  return m;
}

double kendall_tau(const std::vector<double>& y) {
  const int n = static_cast<int>(y.size());
  int concordant = 0, discordant = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (y[j] > y[i]) ++concordant;
      else if (y[j] < y[i]) ++discordant;
    }
  return static_cast<double>(concordant - discordant) /
         (0.5 * n * (n - 1));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- criteria ---------------------------------------------------------

bool criterion_markov_oracle() {
  const auto dev = find_preset("smtj1").params;
  const double tau = dev.balanced_dwell_s();
  const double g_values[] = {1.5, 2.0, 3.0, 5.0};
  const double durations[] = {15.0, 18.0, 25.0, 40.0};
  bool ok = true;
  for (int k = 0; k < 4; ++k) {
    const double g = g_values[k];
    const auto net = pair_net(dev, dev, std::log(g) / kLnGPerGain,
                              analog::Polarity::Positive);
    const auto traces = sim::simulate(net, durations[k], 1000 + k);
    const auto occ = stats::occupancy_from_events(traces[0], traces[1]);
    const auto dwell = stats::joint_dwell_from_events(traces[0], traces[1]);

    ok &= expect(occ.transitions >= 100000,
                 "g=" + fmt(g) + ": only " +
                     std::to_string(occ.transitions) + " transitions");

    const double w = 1.0 / (2.0 + 2.0 / (g * g));
    const std::array<double, 4> p_model{w, w / (g * g), w / (g * g), w};
    const auto gen = markov::build_generator(equal_g_model(tau, 1.0, g));
    const auto d_model = markov::joint_dwell_times(gen);
    for (int s = 0; s < 4; ++s) {
      ok &= expect(std::abs(occ.p[s] - p_model[s]) <= 3.0 * occ.std_err[s],
                   "g=" + fmt(g) + " state " + std::to_string(s) +
                       ": occupancy " + fmt(occ.p[s]) + " vs model " +
                       fmt(p_model[s]) + " (3se=" +
                       fmt(3.0 * occ.std_err[s]) + ")");
      ok &= expect(std::abs(dwell.mean_dwell_s[s] - d_model[s]) <=
                       0.05 * d_model[s],
                   "g=" + fmt(g) + " state " + std::to_string(s) +
                       ": dwell " + fmt(dwell.mean_dwell_s[s]) +
                       " vs model " + fmt(d_model[s]));
    }
  }
  return ok;
}

bool criterion_correlation_sweep() {
  const auto dev = find_preset("smtj3").params;
  const double duration = 2.0;
  const double dt = 1e-5;
  bool ok = true;
  // g at the top of the sweep must reach at least 5.
  ok &= expect(std::exp(kLnGPerGain * 0.06) >= 5.0, "g(0.06) < 5");
  for (auto pol : {analog::Polarity::Positive, analog::Polarity::Negative}) {
    const bool pos = pol == analog::Polarity::Positive;
    for (std::uint64_t seed : {21, 22, 23}) {
      std::vector<double> rho;
      for (int k = 0; k <= 12; ++k) {
        const double gain = 0.005 * k;
        const auto net = pair_net(dev, dev, gain, pol);
        const auto traces = sim::simulate(net, duration, seed * 100 + k);
        const auto a = sim::sample_trace(traces[0], dt);
        const auto b = sim::sample_trace(traces[1], dt);
        rho.push_back(stats::pearson(a, b).rho);
      }
      const std::string tag = std::string(pos ? "positive" : "negative") +
                              " seed " + std::to_string(seed);
      ok &= expect(std::abs(rho.front()) < 0.02,
                   tag + ": |rho(0)| = " + fmt(std::abs(rho.front())));
      ok &= expect(pos ? rho.back() >= 0.9 : rho.back() <= -0.9,
                   tag + ": rho(0.06) = " + fmt(rho.back()));
      auto signed_rho = rho;
      if (!pos)
        for (auto& v : signed_rho) v = -v;
      const double tau = kendall_tau(signed_rho);
      ok &= expect(tau >= 0.95, tag + ": kendall tau = " + fmt(tau));
    }
  }
  return ok;
}

bool criterion_lambda1_closed_form() {
  bool ok = true;
  const double tau = 2e-4;
  for (int i = 0; i < 10; ++i) {
    const double g = 1.0 + i;
    for (int j = 0; j < 10; ++j) {
      const double r = 1.0 + 19.0 * j / 9.0;
      const auto model = equal_g_model(tau, r, g);
      const double closed = markov::slowest_eigenvalue(model);
      const auto spec = markov::spectrum(markov::build_generator(model));
      const double numeric = spec[1].real();
      ok &= expect(std::abs(spec[1].imag()) <= 1e-12 * std::abs(numeric),
                   "g=" + fmt(g) + " r=" + fmt(r) + ": complex lambda1");
      ok &= expect(std::abs(closed - numeric) <= 1e-10 * std::abs(closed),
                   "g=" + fmt(g) + " r=" + fmt(r) + ": closed " +
                       fmt(closed) + " vs numeric " + fmt(numeric));
    }
  }
  const auto base = equal_g_model(tau, 1.0, 1.0);
  const double lambda = markov::slowest_eigenvalue(base);
  ok &= expect(std::abs(lambda - (-2.0 / tau)) <= 1e-12 * (2.0 / tau),
               "lambda1(g=1, r=1) = " + fmt(lambda) + ", want " +
                   fmt(-2.0 / tau));
  return ok;
}

bool criterion_timescale_mismatch() {
  const auto slow = find_preset("smtj1").params;  // tau 2e-4
  const auto fast = find_preset("smtj3").params;  // tau 2e-5, ratio 10
  const double g = 3.0;
  const double gain = std::log(g) / kLnGPerGain;
  bool ok = true;

  const auto tr_r1 = sim::simulate(
      pair_net(slow, slow, gain, analog::Polarity::Positive), 30.0, 51);
  const auto tr_r10 = sim::simulate(
      pair_net(slow, fast, gain, analog::Polarity::Positive), 30.0, 52);

  const auto d1 = stats::joint_dwell_from_events(tr_r1[0], tr_r1[1]);
  const auto d10 = stats::joint_dwell_from_events(tr_r10[0], tr_r10[1]);
  const auto o1 = stats::occupancy_from_events(tr_r1[0], tr_r1[1]);
  const auto o10 = stats::occupancy_from_events(tr_r10[0], tr_r10[1]);

  for (int s = 0; s < 4; ++s) {
    ok &= expect(d10.mean_dwell_s[s] < d1.mean_dwell_s[s],
                 "state " + std::to_string(s) + ": r=10 dwell " +
                     fmt(d10.mean_dwell_s[s]) + " not below r=1 dwell " +
                     fmt(d1.mean_dwell_s[s]));
    const double gap = std::abs(o10.p[s] - o1.p[s]);
    const double band = 3.0 * std::hypot(o1.std_err[s], o10.std_err[s]);
    ok &= expect(gap <= band,
                 "state " + std::to_string(s) + ": occupancy gap " +
                     fmt(gap) + " above 3 sigma " + fmt(band));
  }
  return ok;
}

bool criterion_sampling_artifact() {
  const auto dev = find_preset("smtj3").params;
  const double g = 5.0;
  const auto net =
      pair_net(dev, dev, std::log(g) / kLnGPerGain, analog::Polarity::Positive);
  const auto traces = sim::simulate(net, 4.0, 61);

  // dt sits at the 20th percentile of the device's short-state dwell
  // distribution at the coupled operating current: the destabilized dwell
  // is exponential with mean tau/g, so the quantile is -ln(0.8) of that.
  const double i_hi =
      dev.i_balance_a + analog::delta_current(*net.couplings[0][1]);
  const double tau_short = mean_dwell_time(dev, MagState::P, i_hi);
  const double dt = -std::log(0.8) * tau_short;

  const auto truth = stats::joint_dwell_from_events(traces[0], traces[1]);
  const auto a = sim::sample_trace(traces[0], dt);
  const auto b = sim::sample_trace(traces[1], dt);
  const auto measured = stats::joint_dwell_stats(a, b, dt);

  bool ok = true;
  for (int s = 0; s < 4; ++s)
    ok &= expect(truth.counts[s] > 10000,
                 "state " + std::to_string(s) + ": too few visits");
  for (int s : {1, 2})  // mismatch states live ~tau/2g
    ok &= expect(measured.mean_dwell_s[s] >= 1.2 * truth.mean_dwell_s[s],
                 "short state " + std::to_string(s) + ": dwell " +
                     fmt(truth.mean_dwell_s[s]) + " only reads " +
                     fmt(measured.mean_dwell_s[s]) + " at dt=" + fmt(dt));
  for (int s : {0, 3})
    ok &= expect(measured.mean_dwell_s[s] > truth.mean_dwell_s[s],
                 "long state " + std::to_string(s) + ": dwell " +
                     fmt(truth.mean_dwell_s[s]) + " reads " +
                     fmt(measured.mean_dwell_s[s]) + " at dt=" + fmt(dt));
  return ok;
}

bool criterion_circuit_consistency() {
  analog::PipelineConfig cfg;
  cfg.threshold.i_fixed_a = 1e-3;
  cfg.threshold.r_var_ohm = 760.0;
  cfg.threshold.v_high_v = 2.5;
  cfg.threshold.polarity = analog::Polarity::Positive;
  cfg.gain.r_gs_ohm = 1e5;
  cfg.gain.r_gain_ohm = 0.0;
  cfg.gain.v_c_v = 1.25;
  cfg.shift = analog::LevelShiftConfig{};  // equal 10 kOhm arms
  cfg.shift.v_bias_v = 4.25;
  cfg.transcond.v_dd_v = 15.0;
  cfg.transcond.r_1_ohm = 1e4;
  analog::validate(cfg);

  bool ok = true;
  for (auto s : {MagState::P, MagState::AP}) {
    const double out = analog::pipeline_output(cfg, s);
    ok &= expect(out == 0.95e-3,
                 "zero-gain output " + fmt(out) + " A is not exactly 0.95 mA");
  }

  for (int k = 1; k <= 10; ++k) {
    const double gain = 0.01 * k;
    cfg.gain.r_gain_ohm = gain * cfg.gain.r_gs_ohm;
    const double hi = analog::pipeline_output(cfg, MagState::AP);
    const double lo = analog::pipeline_output(cfg, MagState::P);
    const double two_point = (hi - lo) / 2.0;
    const double expected = gain * 1.25 / 1e4;
    ok &= expect(std::abs(two_point - expected) <= 1e-12 * expected,
                 "gain " + fmt(gain) + ": two-point dI " + fmt(two_point) +
                     " vs " + fmt(expected));
  }
  return ok;
}

bool criterion_annealing() {
  const auto dev = find_preset("smtj3").params;
  const double tau = dev.balanced_dwell_s();
  anneal::IsingProblem problem;
  problem.n = 2;
  problem.j = {{0.0, -1.0}, {-1.0, 0.0}};

  anneal::AnnealSchedule schedule;
  for (int k = 0; k <= 6; ++k) schedule.push_back({0.5, 0.01 * k});

  bool ok = true;
  for (const auto& step : schedule) {
    const double g = std::exp(kLnGPerGain * step.gain);
    const double lambda1 =
        markov::slowest_eigenvalue(equal_g_model(tau, 1.0, g));
    ok &= expect(step.duration_s >= 100.0 / std::abs(lambda1),
                 "step gain " + fmt(step.gain) + " shorter than 100/|l1|");
  }

  const auto net = pair_net(dev, dev, 0.0, analog::Polarity::Positive);
  const auto report = anneal::anneal(problem, net, schedule, 71);

  for (std::size_t k = 0; k < report.steps.size(); ++k) {
    const auto& st = report.steps[k];
    if (!expect(!st.boltzmann.empty(),
                "step " + std::to_string(k) + ": no Boltzmann prediction")) {
      ok = false;
      continue;
    }
    double tv = 0.0;
    for (int s = 0; s < 4; ++s)
      tv += std::abs(st.occupancy[s] - st.boltzmann[s]);
    tv /= 2.0;
    ok &= expect(tv <= 0.05, "step " + std::to_string(k) + " (gain " +
                                 fmt(st.gain) + "): TV " + fmt(tv));
  }

  const auto& fin = report.steps.back();
  const double pair_mass = fin.occupancy[0] + fin.occupancy[3];
  ok &= expect(pair_mass >= 0.9,
               "final ground-pair occupancy " + fmt(pair_mass));
  for (int s : {0, 3})
    ok &= expect(fin.occupancy[s] >= 0.45 && fin.occupancy[s] <= 0.55,
                 "ground state " + std::to_string(s) + " occupancy " +
                     fmt(fin.occupancy[s]) + " outside [0.45, 0.55]");
  return ok;
}

bool criterion_determinism() {
  namespace fs = std::filesystem;
  const fs::path root =
      fs::temp_directory_path() / "smtj_acceptance_determinism";
  fs::remove_all(root);

  const std::string config = R"({
    "seed": 2024,
    "duration_s": 0.5,
    "sample_dt_s": 1e-5,
    "devices": ["smtj3", "smtj3"],
    "couplings": [
      {"target": 1, "source": 0, "gain": 0.03, "polarity": "positive"},
      {"target": 0, "source": 1, "gain": 0.03, "polarity": "positive"}
    ],
    "sweep_gains": [0.0, 0.02, 0.04],
    "anneal": {
      "j": [[0.0, -1.0], [-1.0, 0.0]],
      "schedule": [{"duration_s": 0.1, "gain": 0.0},
                   {"duration_s": 0.1, "gain": 0.03}]
    }
  })";

  bool ok = true;
  auto spec = cfg::parse_experiment(config);

  auto run_with = [&](cfg::Mode mode, const std::string& sub, int workers) {
    auto s = spec;
    s.mode = mode;
    run::RunOptions opts;
    opts.out_dir = (root / sub).string();
    opts.workers = workers;
    switch (mode) {
      case cfg::Mode::Simulate: run::run_simulate(s, opts); break;
      case cfg::Mode::Sweep: run::run_sweep(s, opts); break;
      case cfg::Mode::Anneal: run::run_anneal(s, opts); break;
      default: break;
    }
    return root / sub;
  };

  const auto s1 = run_with(cfg::Mode::Sweep, "sweep_w1", 1);
  const auto s4 = run_with(cfg::Mode::Sweep, "sweep_w4", 4);
  const auto s1b = run_with(cfg::Mode::Sweep, "sweep_w1_again", 1);
  for (const char* f : {"pearson.csv", "dwell.csv", "sweep.json"}) {
    ok &= expect(slurp(s1 / f) == slurp(s4 / f),
                 std::string(f) + " changed with the worker count");
    ok &= expect(slurp(s1 / f) == slurp(s1b / f),
                 std::string(f) + " changed between same-seed reruns");
  }

  const auto m1 = run_with(cfg::Mode::Simulate, "sim_a", 0);
  const auto m2 = run_with(cfg::Mode::Simulate, "sim_b", 0);
  for (const char* f : {"events.csv", "sampled.csv", "summary.json"})
    ok &= expect(slurp(m1 / f) == slurp(m2 / f),
                 std::string(f) + " changed between same-seed reruns");

  const auto a1 = run_with(cfg::Mode::Anneal, "anneal_a", 0);
  const auto a2 = run_with(cfg::Mode::Anneal, "anneal_b", 0);
  for (const char* f : {"anneal.json", "energy.csv"})
    ok &= expect(slurp(a1 / f) == slurp(a2 / f),
                 std::string(f) + " changed between same-seed reruns");

  fs::remove_all(root);
  return ok;
}

struct Criterion {
  const char* name;
  bool (*fn)();
  double time_limit_s;  // 0 = no stated budget
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"four-state model matches simulation (occupancy, dwell)",
       criterion_markov_oracle, 60.0},
      {"correlation vs gain: monotone, zero start, saturating",
       criterion_correlation_sweep, 300.0},
      {"slowest-eigenvalue closed form matches the spectrum",
       criterion_lambda1_closed_form, 0.0},
      {"timescale ratio shortens dwells, occupancy unchanged",
       criterion_timescale_mismatch, 0.0},
      {"coarse sampling inflates measured dwell times",
       criterion_sampling_artifact, 0.0},
      {"pipeline hits 0.95 mA exactly and dI = G*1.25V/10kOhm",
       criterion_circuit_consistency, 0.0},
      {"annealing tracks Boltzmann and finds the ground pair",
       criterion_annealing, 300.0},
      {"byte-identical reruns, worker count has no effect",
       criterion_determinism, 0.0},
  };

  int passed = 0;
  const int total = static_cast<int>(std::size(criteria));
  for (int i = 0; i < total; ++i) {
    g_notes.clear();
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = criteria[i].fn();
    } catch (const std::exception& e) {
      g_notes.push_back(std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (criteria[i].time_limit_s > 0.0 && elapsed > criteria[i].time_limit_s) {
      ok = false;
      g_notes.push_back("runtime " + fmt(elapsed) + " s over the " +
                        fmt(criteria[i].time_limit_s) + " s budget");
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << i + 1 << ": "
              << criteria[i].name << " (" << fmt(elapsed) << " s)\n";
    for (const auto& n : g_notes) std::cout << "       - " << n << "\n";
    if (ok) ++passed;
  }
  std::cout << "acceptance: " << passed << "/" << total
            << " criteria passed\n";
  return passed == total ? 0 : 1;
}
