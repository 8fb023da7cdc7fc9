#include "smtj/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smtj/errors.hpp"
#include "smtj/markov.hpp"
#include "smtj/rng.hpp"
#include "smtj/stats.hpp"

namespace smtj::run {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Shortest representation that parses back to the same double; CSV files
// stay byte-identical across reruns because nothing here depends on locale
// or printf state.
std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void atomic_write(const fs::path& path, const std::string& content,
                  std::vector<std::string>& files) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw ConfigError("short write on '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
  files.push_back(path.string());
}

fs::path prepare_out_dir(const cfg::ExperimentSpec& spec,
                         const RunOptions& opts) {
  fs::path dir = !opts.out_dir.empty() ? fs::path(opts.out_dir)
                                       : fs::path(spec.out_dir.value_or("."));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() +
                            "': " + ec.message());
  return dir;
}

cfg::ExperimentSpec effective_spec(const cfg::ExperimentSpec& spec,
                                   const RunOptions& opts) {
  cfg::ExperimentSpec s = spec;
  if (opts.seed_override.has_value()) s.seed = *opts.seed_override;
  return s;
}

void write_echo(const cfg::ExperimentSpec& spec, const fs::path& dir,
                std::vector<std::string>& files) {
  atomic_write(dir / "config_echo.json", cfg::write_experiment(spec), files);
}

std::string events_csv(const std::vector<sim::TelegraphTrace>& traces) {
  struct Row {
    double t;
    int device;
    std::uint8_t state;
  };
  std::vector<Row> rows;
  std::size_t total = 0;
  for (const auto& tr : traces) total += tr.times_s.size();
  rows.reserve(total);
  for (const auto& tr : traces)
    for (std::size_t i = 0; i < tr.times_s.size(); ++i)
      rows.push_back({tr.times_s[i], tr.device, tr.states[i]});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.t != b.t ? a.t < b.t : a.device < b.device;
  });
  std::string out = "device,time_s,state\n";
  for (const auto& r : rows) {
    out += std::to_string(r.device);
    out += ',';
    out += fmt(r.t);
    out += ',';
    out += char('0' + r.state);
    out += '\n';
  }
  return out;
}

std::string sampled_csv(const std::vector<sim::TelegraphTrace>& traces,
                        double dt) {
  std::vector<std::vector<std::uint8_t>> cols;
  cols.reserve(traces.size());
  for (const auto& tr : traces) cols.push_back(sim::sample_trace(tr, dt));
  std::string out = "time_s";
  for (std::size_t d = 0; d < cols.size(); ++d)
    out += ",d" + std::to_string(d);
  out += '\n';
  const std::size_t n = cols.empty() ? 0 : cols[0].size();
  for (std::size_t k = 0; k < n; ++k) {
    out += fmt(static_cast<double>(k) * dt);
    for (const auto& c : cols) {
      out += ',';
      out += char('0' + c[k]);
    }
    out += '\n';
  }
  return out;
}

double fraction_ap(const sim::TelegraphTrace& tr) {
  if (tr.t_end_s <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (std::size_t i = 0; i < tr.times_s.size(); ++i) {
    const double t_next =
        i + 1 < tr.times_s.size() ? tr.times_s[i + 1] : tr.t_end_s;
    if (tr.states[i]) acc += t_next - tr.times_s[i];
  }
  return acc / tr.t_end_s;
}

json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

// Pearson of the first two traces sampled at dt; null when undefined
// (constant trace or too short a run).
json pair_pearson_json(const std::vector<sim::TelegraphTrace>& traces,
                       double dt) {
  const auto a = sim::sample_trace(traces[0], dt);
  const auto b = sim::sample_trace(traces[1], dt);
  if (a.size() < 2) return nullptr;
  try {
    const auto r = stats::pearson(a, b);
    return json{{"rho", r.rho}, {"std_err", r.std_err}, {"n", r.n_samples}};
  } catch (const UndefinedCorrelationError&) {
    return nullptr;
  }
}

json occupancy_json(const stats::JointOccupancy& occ) {
  return json{{"p", occ.p},
              {"std_err", occ.std_err},
              {"duration_s", occ.duration_s},
              {"transitions", occ.transitions}};
}

json dwell_json(const stats::JointDwellSummary& dw) {
  return json{{"mean_s", dw.mean_dwell_s},
              {"std_err_s", dw.std_err_s},
              {"count", dw.counts}};
}

std::string config_label(std::uint32_t c, int n) {
  std::string s(n, '0');
  for (int i = 0; i < n; ++i)
    if ((c >> (n - 1 - i)) & 1u) s[i] = '1';
  return s;
}

json config_labels(int n) {
  json arr = json::array();
  for (std::uint32_t c = 0; c < (1u << n); ++c)
    arr.push_back(config_label(c, n));
  return arr;
}

constexpr const char* kStates4[4] = {"00", "01", "10", "11"};

json states4_json() { return json::array({"00", "01", "10", "11"}); }

}  // namespace

double effective_sample_dt(const cfg::ExperimentSpec& spec) {
  if (spec.sample_dt_s.has_value()) return *spec.sample_dt_s;
  return spec.duration_s / 1e5;
}

RunArtifacts run_simulate(const cfg::ExperimentSpec& spec_in,
                          const RunOptions& opts) {
  const auto spec = effective_spec(spec_in, opts);
  const fs::path dir = prepare_out_dir(spec, opts);
  const auto net = cfg::build_network(spec);

  RunArtifacts out;
  write_echo(spec, dir, out.files);

  std::vector<sim::TelegraphTrace> traces;
  std::string breakdown_msg;
  bool broke = false;
  try {
    traces = sim::simulate(net, spec.duration_s, spec.seed,
                           spec.initial_states.has_value()
                               ? &*spec.initial_states
                               : nullptr);
  } catch (sim::SimulationBreakdown& e) {
    traces = std::move(e.partial_traces);
    breakdown_msg = e.what();
    broke = true;
  }

  atomic_write(dir / "events.csv", events_csv(traces), out.files);
  const double dt = effective_sample_dt(spec);
  if (spec.sample_dt_s.has_value())
    atomic_write(dir / "sampled.csv", sampled_csv(traces, *spec.sample_dt_s),
                 out.files);

  json summary;
  summary["mode"] = "simulate";
  summary["seed"] = spec.seed;
  summary["duration_s"] = traces.empty() ? 0.0 : traces[0].t_end_s;
  summary["sample_dt_s"] = dt;
  summary["breakdown"] = broke;
  summary["breakdown_message"] = broke ? json(breakdown_msg) : json(nullptr);

  json devices = json::array();
  for (const auto& tr : traces)
    devices.push_back({{"device", tr.device},
                       {"transitions", tr.transitions()},
                       {"fraction_ap", number_or_null(fraction_ap(tr))},
                       {"valid", tr.valid}});
  summary["devices"] = std::move(devices);

  if (traces.size() >= 2 && traces[0].t_end_s > 0.0) {
    summary["states"] = states4_json();
    summary["pair"] = {
        {"occupancy", occupancy_json(
                          stats::occupancy_from_events(traces[0], traces[1]))},
        {"dwell",
         dwell_json(stats::joint_dwell_from_events(traces[0], traces[1]))},
        {"pearson", pair_pearson_json(traces, dt)}};
  }

  atomic_write(dir / "summary.json", summary.dump(2) + "\n", out.files);
  if (broke)
    throw sim::SimulationBreakdown(breakdown_msg, std::move(traces));
  return out;
}

RunArtifacts run_sweep(const cfg::ExperimentSpec& spec_in,
                       const RunOptions& opts) {
  const auto spec = effective_spec(spec_in, opts);
  if (spec.devices.size() < 2)
    throw ConfigError("sweep mode needs at least two devices");
  const fs::path dir = prepare_out_dir(spec, opts);

  RunArtifacts out;
  write_echo(spec, dir, out.files);

  struct Point {
    double gain = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    json pearson;
    stats::JointOccupancy occ;
    stats::JointDwellSummary dwell;
    bool equilibrated = false;
    std::uint64_t transitions = 0;
    std::string error;
    std::exception_ptr eptr;
  };

  const int n_points = static_cast<int>(spec.sweep_gains.size());
  std::vector<Point> points(n_points);
  const double dt = effective_sample_dt(spec);
  const int workers =
      opts.workers > 0 ? opts.workers : omp_get_max_threads();

  // Points are independent; every RNG stream is derived from (seed, index),
  // so the schedule and worker count cannot change any result.
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (int i = 0; i < n_points; ++i) {
    Point& pt = points[i];
    pt.gain = spec.sweep_gains[i];
    pt.seed = derive_stream_seed(spec.seed, static_cast<std::uint64_t>(i));
    try {
      const auto net = cfg::network_at_gain(spec, pt.gain);
      const auto traces =
          sim::simulate(net, spec.duration_s, pt.seed,
                        spec.initial_states.has_value() ? &*spec.initial_states
                                                        : nullptr);
      pt.pearson = pair_pearson_json(traces, dt);
      pt.occ = stats::occupancy_from_events(traces[0], traces[1]);
      pt.dwell = stats::joint_dwell_from_events(traces[0], traces[1]);
      const auto sa = sim::sample_trace(traces[0], dt);
      const auto sb = sim::sample_trace(traces[1], dt);
      pt.equilibrated =
          stats::equilibration_check(sa, sb, dt, spec.duration_s / 8.0);
      for (const auto& tr : traces) pt.transitions += tr.transitions();
      pt.ok = true;
    } catch (const std::exception& e) {
      pt.error = e.what();
      pt.eptr = std::current_exception();
    }
  }

  std::string pearson_csv = "gain,pearson,stderr,n\n";
  std::string dwell_csv = "gain,state,mean_dwell_s,stderr_s,count\n";
  json points_json = json::array();
  for (const auto& pt : points) {
    json pj{{"gain", pt.gain}, {"seed", pt.seed}};
    if (pt.ok) {
      pearson_csv += fmt(pt.gain);
      if (pt.pearson.is_object()) {
        pearson_csv += ',' + fmt(pt.pearson["rho"].get<double>());
        pearson_csv += ',' + fmt(pt.pearson["std_err"].get<double>());
        pearson_csv += ',' + std::to_string(
                                 pt.pearson["n"].get<std::uint64_t>());
      } else {
        pearson_csv += ",,,0";
      }
      pearson_csv += '\n';
      for (int s = 0; s < 4; ++s) {
        dwell_csv += fmt(pt.gain);
        dwell_csv += ',';
        dwell_csv += kStates4[s];
        dwell_csv += ',' + fmt(pt.dwell.mean_dwell_s[s]);
        dwell_csv += ',' + fmt(pt.dwell.std_err_s[s]);
        dwell_csv += ',' + std::to_string(pt.dwell.counts[s]);
        dwell_csv += '\n';
      }
      pj["pearson"] = pt.pearson;
      pj["occupancy"] = occupancy_json(pt.occ);
      pj["dwell"] = dwell_json(pt.dwell);
      pj["equilibrated"] = pt.equilibrated;
      pj["transitions"] = pt.transitions;
    } else {
      pj["error"] = pt.error;
    }
    points_json.push_back(std::move(pj));
  }

  json summary{{"mode", "sweep"},
               {"seed", spec.seed},
               {"duration_s", spec.duration_s},
               {"sample_dt_s", dt},
               {"states", states4_json()},
               {"points", std::move(points_json)}};

  atomic_write(dir / "pearson.csv", pearson_csv, out.files);
  atomic_write(dir / "dwell.csv", dwell_csv, out.files);
  atomic_write(dir / "sweep.json", summary.dump(2) + "\n", out.files);

  for (const auto& pt : points)
    if (pt.eptr) std::rethrow_exception(pt.eptr);
  return out;
}

RunArtifacts run_analyze(const cfg::ExperimentSpec& spec_in,
                         const RunOptions& opts) {
  const auto spec = effective_spec(spec_in, opts);
  if (spec.devices.size() != 2)
    throw ConfigError("analyze mode needs exactly two devices");
  const fs::path dir = prepare_out_dir(spec, opts);

  RunArtifacts out;
  write_echo(spec, dir, out.files);

  const auto net0 = cfg::build_network(spec);
  const double tau0 = net0.devices[0].balanced_dwell_s();
  const double tau1 = net0.devices[1].balanced_dwell_s();
  // The pair model wants the slower device in the high bit; remember whether
  // the configured order had to be swapped so outputs stay in device order.
  const bool swapped = tau1 > tau0;
  const int hi = swapped ? 1 : 0;
  const int lo = 1 - hi;

  std::optional<analog::Polarity> polarity;
  for (int t = 0; t < 2; ++t)
    if (const auto& cp = net0.couplings[t][1 - t]) {
      if (polarity.has_value() && *polarity != cp->threshold.polarity)
        throw ConfigError(
            "analyze: the pair model needs both couplings to share a polarity");
      polarity = cp->threshold.polarity;
    }

  auto permute4 = [&](std::array<double, 4> v) {
    if (swapped) std::swap(v[1], v[2]);
    return v;
  };

  std::string csv =
      "gain,g0,g1,p_00,p_01,p_10,p_11,lambda1_per_s,"
      "spec1_re_per_s,spec1_im_per_s,spec2_re_per_s,spec2_im_per_s,"
      "spec3_re_per_s,spec3_im_per_s,"
      "dwell_00_s,dwell_01_s,dwell_10_s,dwell_11_s,pearson\n";
  json points = json::array();

  for (double gain : spec.sweep_gains) {
    const auto net = cfg::network_at_gain(spec, gain);
    std::array<double, 2> g{1.0, 1.0};
    for (int t = 0; t < 2; ++t)
      if (const auto& cp = net.couplings[t][1 - t])
        g[t] = std::exp(net.devices[t].slope_b_per_a() *
                        analog::delta_current(*cp));

    markov::CoupledPairModel model;
    model.tau1_s = net.devices[hi].balanced_dwell_s();
    model.ratio = net.devices[hi].balanced_dwell_s() /
                  net.devices[lo].balanced_dwell_s();
    model.g1 = g[hi];
    model.g2 = g[lo];
    model.polarity = polarity.value_or(analog::Polarity::Positive);

    const auto gen = markov::build_generator(model);
    const auto pi = permute4(markov::steady_state(gen));
    const auto dwell = permute4(markov::joint_dwell_times(gen));
    const auto spectrum = markov::spectrum(gen);
    const double rho = markov::predict_correlation(gen);

    // The closed form assumes exactly equal g; collapse near-ties that only
    // differ by floating-point noise in the two pipelines.
    std::optional<double> lambda1;
    if (std::abs(model.g1 - model.g2) <=
        1e-9 * std::max(model.g1, model.g2)) {
      markov::CoupledPairModel eq = model;
      eq.g2 = eq.g1;
      lambda1 = markov::slowest_eigenvalue(eq);
    }

    csv += fmt(gain);
    csv += ',' + fmt(g[0]) + ',' + fmt(g[1]);
    for (double p : pi) csv += ',' + fmt(p);
    csv += ',';
    if (lambda1.has_value()) csv += fmt(*lambda1);
    for (int k = 1; k < 4; ++k) {
      csv += ',' + fmt(spectrum[k].real());
      csv += ',' + fmt(spectrum[k].imag());
    }
    for (double d : dwell) csv += ',' + fmt(d);
    csv += ',' + fmt(rho) + '\n';

    json spec_json = json::array();
    for (int k = 0; k < 4; ++k)
      spec_json.push_back({{"re", spectrum[k].real()},
                           {"im", spectrum[k].imag()}});
    json qj = json::array();
    for (const auto& row : gen.q) qj.push_back(row);
    points.push_back({{"gain", gain},
                      {"g", g},
                      {"generator", std::move(qj)},
                      {"generator_order",
                       swapped ? "slower device 1 is the high bit"
                               : "slower device 0 is the high bit"},
                      {"steady_state", pi},
                      {"lambda1_per_s",
                       lambda1.has_value() ? json(*lambda1) : json(nullptr)},
                      {"spectrum", std::move(spec_json)},
                      {"dwell_s", dwell},
                      {"pearson", rho}});
  }

  json summary{{"mode", "analyze"},
               {"states", states4_json()},
               {"points", std::move(points)}};
  atomic_write(dir / "analyze.csv", csv, out.files);
  atomic_write(dir / "analyze.json", summary.dump(2) + "\n", out.files);
  return out;
}

anneal::AnnealSchedule default_schedule(const cfg::ExperimentSpec& spec) {
  if (!spec.anneal.has_value())
    throw ConfigError("anneal mode needs an anneal section");
  const auto net = cfg::build_network(spec);
  const int n = static_cast<int>(net.devices.size());
  const auto& j = spec.anneal->j;

  double tau_slow = 0.0;
  for (const auto& d : net.devices)
    tau_slow = std::max(tau_slow, d.balanced_dwell_s());

  anneal::AnnealSchedule schedule;
  for (int k = 0; k <= 6; ++k) {
    const double gain = 0.01 * k;
    // ln g per device at this gain, taking each device's strongest edge.
    std::vector<double> ln_g(n, 0.0);
    for (int t = 0; t < n; ++t)
      for (int s = 0; s < n; ++s)
        if (s != t && t < static_cast<int>(j.size()) &&
            s < static_cast<int>(j[t].size()) && j[t][s] != 0.0 &&
            net.couplings[t][s].has_value()) {
          const auto cal = anneal::calibrate_gain_to_temperature(
              *net.couplings[t][s], net.devices[t]);
          ln_g[t] = std::max(ln_g[t], cal.slope_b_per_a *
                                          cal.delta_i_per_gain_a * gain *
                                          std::abs(j[t][s]));
        }

    double duration;
    if (n == 2 && ln_g[0] > 0.0 &&
        std::abs(ln_g[0] - ln_g[1]) <= 1e-9 * std::max(ln_g[0], ln_g[1])) {
      markov::CoupledPairModel model;
      const int hi = net.devices[1].balanced_dwell_s() >
                             net.devices[0].balanced_dwell_s()
                         ? 1
                         : 0;
      model.tau1_s = net.devices[hi].balanced_dwell_s();
      model.ratio = net.devices[hi].balanced_dwell_s() /
                    net.devices[1 - hi].balanced_dwell_s();
      model.g1 = model.g2 = std::exp(ln_g[0]);
      duration = 100.0 / std::abs(markov::slowest_eigenvalue(model));
    } else {
      double g_max = 1.0;
      for (double lg : ln_g) g_max = std::max(g_max, std::exp(lg));
      duration = 100.0 * tau_slow * g_max;
    }
    schedule.push_back({std::max(duration, 50.0 * tau_slow), gain});
  }
  return schedule;
}

RunArtifacts run_anneal(const cfg::ExperimentSpec& spec_in,
                        const RunOptions& opts) {
  const auto spec = effective_spec(spec_in, opts);
  if (!spec.anneal.has_value())
    throw ConfigError("anneal mode needs an anneal section");
  const fs::path dir = prepare_out_dir(spec, opts);

  RunArtifacts out;
  write_echo(spec, dir, out.files);

  anneal::IsingProblem problem;
  problem.n = static_cast<int>(spec.devices.size());
  problem.j = spec.anneal->j;
  const auto schedule =
      spec.anneal->schedule.has_value() ? *spec.anneal->schedule
                                        : default_schedule(spec);
  const auto net = cfg::build_network(spec);
  anneal::AnnealReport report;
  std::string breakdown_msg;
  bool broke = false;
  try {
    report = anneal::anneal(problem, net, schedule, spec.seed);
  } catch (anneal::AnnealBreakdown& e) {
    report = std::move(e.partial_report);
    breakdown_msg = e.what();
    broke = true;
  }

  json steps = json::array();
  for (const auto& st : report.steps) {
    json sj{{"gain", st.gain},
            {"duration_s", st.duration_s},
            {"g", st.g},
            {"t_eff", number_or_null(st.t_eff)},
            {"occupancy", st.occupancy},
            {"mean_energy", st.mean_energy},
            {"transitions", st.transitions}};
    if (!st.boltzmann.empty()) {
      sj["boltzmann"] = st.boltzmann;
      double tv = 0.0;
      for (std::size_t c = 0; c < st.boltzmann.size(); ++c)
        tv += std::abs(st.occupancy[c] - st.boltzmann[c]);
      sj["total_variation"] = tv / 2.0;
    } else {
      sj["boltzmann"] = nullptr;
      sj["total_variation"] = nullptr;
    }
    steps.push_back(std::move(sj));
  }

  json ranking = json::array();
  for (const auto& [config, occ] : report.final_ranking)
    ranking.push_back({{"config", config_label(config, problem.n)},
                       {"occupancy", occ}});

  json summary{
      {"mode", "anneal"},
      {"seed", spec.seed},
      {"sign_convention",
       "J < 0 is ferromagnetic and maps to positive-polarity pipelines"},
      {"breakdown", broke},
      {"breakdown_message", broke ? json(breakdown_msg) : json(nullptr)},
      {"configs", config_labels(problem.n)},
      {"steps", std::move(steps)},
      {"final_ranking", std::move(ranking)}};

  std::string energy_csv = "time_s,gain,energy\n";
  for (const auto& row : report.energy_trace) {
    energy_csv += fmt(row.time_s);
    energy_csv += ',' + fmt(row.gain);
    energy_csv += ',' + fmt(row.energy);
    energy_csv += '\n';
  }

  atomic_write(dir / "anneal.json", summary.dump(2) + "\n", out.files);
  atomic_write(dir / "energy.csv", energy_csv, out.files);
  if (broke) throw anneal::AnnealBreakdown(breakdown_msg, std::move(report));
  return out;
}

}  // namespace smtj::run
