#include "smtj/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "smtj/errors.hpp"

namespace smtj::cfg {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

void require(bool ok, const std::string& what) {
  if (!ok) fail(what);
}

const json& member(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ctx + ": missing key '" + key + "'");
  return *it;
}

double num(const json& obj, const char* key, const std::string& ctx) {
  const json& v = member(obj, key, ctx);
  if (!v.is_number()) fail(ctx + ": '" + key + "' must be a number");
  return v.get<double>();
}

double num_or(const json& obj, const char* key, double fallback,
              const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) fail(ctx + ": '" + key + "' must be a number");
  return it->get<double>();
}

int integer(const json& obj, const char* key, const std::string& ctx) {
  const json& v = member(obj, key, ctx);
  if (!v.is_number_integer()) fail(ctx + ": '" + key + "' must be an integer");
  return v.get<int>();
}

// Typo guard: configs carry unit-suffixed keys, so unknown keys are errors.
void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& ctx) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) fail(ctx + ": unknown key '" + it.key() + "'");
  }
}

analog::Polarity polarity_from(const json& v, const std::string& ctx) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "positive") return analog::Polarity::Positive;
    if (s == "negative") return analog::Polarity::Negative;
  }
  fail(ctx + ": polarity must be \"positive\" or \"negative\"");
}

json polarity_to(analog::Polarity p) {
  return p == analog::Polarity::Positive ? "positive" : "negative";
}

MagState state_from(const json& v, const std::string& ctx) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "P") return MagState::P;
    if (s == "AP") return MagState::AP;
  }
  fail(ctx + ": state must be \"P\" or \"AP\"");
}

SmtjParams params_from(const json& obj, const std::string& ctx) {
  if (obj.contains("tau_balance_s")) {
    reject_unknown(obj,
                   {"tau_balance_s", "slope_b_per_a", "i_balance_a",
                    "r_p_ohm", "r_ap_ohm", "i_breakdown_a"},
                   ctx);
    return from_balanced_dwell(num(obj, "tau_balance_s", ctx),
                               num(obj, "slope_b_per_a", ctx),
                               num(obj, "i_balance_a", ctx),
                               num(obj, "r_p_ohm", ctx),
                               num(obj, "r_ap_ohm", ctx),
                               num(obj, "i_breakdown_a", ctx));
  }
  reject_unknown(obj,
                 {"tau0_s", "barrier_kt", "i_crit_a", "i_balance_a",
                  "r_p_ohm", "r_ap_ohm", "i_breakdown_a"},
                 ctx);
  SmtjParams p;
  p.tau0_s = num(obj, "tau0_s", ctx);
  p.barrier_kt = num(obj, "barrier_kt", ctx);
  p.i_crit_a = num(obj, "i_crit_a", ctx);
  p.i_balance_a = num(obj, "i_balance_a", ctx);
  p.r_p_ohm = num(obj, "r_p_ohm", ctx);
  p.r_ap_ohm = num(obj, "r_ap_ohm", ctx);
  p.i_breakdown_a = num(obj, "i_breakdown_a", ctx);
  return p;
}

json params_to(const SmtjParams& p) {
  return json{{"tau0_s", p.tau0_s},
              {"barrier_kt", p.barrier_kt},
              {"i_crit_a", p.i_crit_a},
              {"i_balance_a", p.i_balance_a},
              {"r_p_ohm", p.r_p_ohm},
              {"r_ap_ohm", p.r_ap_ohm},
              {"i_breakdown_a", p.i_breakdown_a}};
}

analog::PipelineConfig pipeline_from(const json& obj, const std::string& ctx) {
  reject_unknown(obj, {"threshold", "gain", "shift", "transcond"}, ctx);
  analog::PipelineConfig cfg;
  {
    const json& t = member(obj, "threshold", ctx);
    const std::string c = ctx + ".threshold";
    reject_unknown(t, {"i_fixed_a", "r_var_ohm", "v_high_v", "polarity"}, c);
    cfg.threshold.i_fixed_a = num_or(t, "i_fixed_a", cfg.threshold.i_fixed_a, c);
    cfg.threshold.r_var_ohm = num_or(t, "r_var_ohm", cfg.threshold.r_var_ohm, c);
    cfg.threshold.v_high_v = num_or(t, "v_high_v", cfg.threshold.v_high_v, c);
    if (t.contains("polarity"))
      cfg.threshold.polarity = polarity_from(t["polarity"], c);
  }
  {
    const json& g = member(obj, "gain", ctx);
    const std::string c = ctx + ".gain";
    reject_unknown(g, {"r_gain_ohm", "r_gs_ohm", "v_c_v"}, c);
    cfg.gain.r_gain_ohm = num_or(g, "r_gain_ohm", cfg.gain.r_gain_ohm, c);
    cfg.gain.r_gs_ohm = num_or(g, "r_gs_ohm", cfg.gain.r_gs_ohm, c);
    cfg.gain.v_c_v = num_or(g, "v_c_v", cfg.gain.v_c_v, c);
  }
  {
    const json& s = member(obj, "shift", ctx);
    const std::string c = ctx + ".shift";
    reject_unknown(s, {"r_1_ohm", "r_f_ohm", "r_2_ohm", "r_g_ohm", "v_bias_v"},
                   c);
    cfg.shift.r_1_ohm = num_or(s, "r_1_ohm", cfg.shift.r_1_ohm, c);
    cfg.shift.r_f_ohm = num_or(s, "r_f_ohm", cfg.shift.r_f_ohm, c);
    cfg.shift.r_2_ohm = num_or(s, "r_2_ohm", cfg.shift.r_2_ohm, c);
    cfg.shift.r_g_ohm = num_or(s, "r_g_ohm", cfg.shift.r_g_ohm, c);
    cfg.shift.v_bias_v = num_or(s, "v_bias_v", cfg.shift.v_bias_v, c);
  }
  {
    const json& t = member(obj, "transcond", ctx);
    const std::string c = ctx + ".transcond";
    reject_unknown(t, {"v_dd_v", "r_1_ohm"}, c);
    cfg.transcond.v_dd_v = num_or(t, "v_dd_v", cfg.transcond.v_dd_v, c);
    cfg.transcond.r_1_ohm = num_or(t, "r_1_ohm", cfg.transcond.r_1_ohm, c);
  }
  return cfg;
}

json pipeline_to(const analog::PipelineConfig& cfg) {
  return json{
      {"threshold",
       {{"i_fixed_a", cfg.threshold.i_fixed_a},
        {"r_var_ohm", cfg.threshold.r_var_ohm},
        {"v_high_v", cfg.threshold.v_high_v},
        {"polarity", polarity_to(cfg.threshold.polarity)}}},
      {"gain",
       {{"r_gain_ohm", cfg.gain.r_gain_ohm},
        {"r_gs_ohm", cfg.gain.r_gs_ohm},
        {"v_c_v", cfg.gain.v_c_v}}},
      {"shift",
       {{"r_1_ohm", cfg.shift.r_1_ohm},
        {"r_f_ohm", cfg.shift.r_f_ohm},
        {"r_2_ohm", cfg.shift.r_2_ohm},
        {"r_g_ohm", cfg.shift.r_g_ohm},
        {"v_bias_v", cfg.shift.v_bias_v}}},
      {"transcond",
       {{"v_dd_v", cfg.transcond.v_dd_v},
        {"r_1_ohm", cfg.transcond.r_1_ohm}}}};
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Simulate: return "simulate";
    case Mode::Sweep: return "sweep";
    case Mode::Analyze: return "analyze";
    case Mode::Anneal: return "anneal";
  }
  return "simulate";
}

Mode mode_from_string(const std::string& s) {
  if (s == "simulate") return Mode::Simulate;
  if (s == "sweep") return Mode::Sweep;
  if (s == "analyze") return Mode::Analyze;
  if (s == "anneal") return Mode::Anneal;
  fail("unknown mode '" + s + "'");
}

const SmtjParams& DeviceRef::resolve() const {
  if (params.has_value()) return *params;
  return find_preset(preset).params;
}

double midpoint_sense_v(const SmtjParams& params) {
  return params.i_balance_a * (params.r_p_ohm + params.r_ap_ohm) / 2.0;
}

void ExperimentSpec::validate() const {
  require(!devices.empty(), "spec needs at least one device");
  const int n = static_cast<int>(devices.size());
  for (int i = 0; i < n; ++i) {
    const std::string ctx = "device " + std::to_string(i);
    if (devices[i].params.has_value()) {
      try {
        devices[i].params->validate();
      } catch (const std::invalid_argument& e) {
        fail(ctx + ": " + e.what());
      }
    } else {
      find_preset(devices[i].preset);
    }
  }
  for (std::size_t i = 0; i < couplings.size(); ++i) {
    const std::string ctx = "coupling " + std::to_string(i);
    const auto& c = couplings[i];
    require(c.target >= 0 && c.target < n, ctx + ": target out of range");
    require(c.source >= 0 && c.source < n, ctx + ": source out of range");
    require(c.target != c.source, ctx + ": device cannot drive itself");
    require(c.shorthand.has_value() != c.pipeline.has_value(),
            ctx + ": give either {gain, polarity} or a full pipeline");
    if (c.shorthand.has_value())
      require(c.shorthand->gain >= 0.0 && c.shorthand->gain <= 0.1,
              ctx + ": gain must lie within [0, 0.1]");
  }
  require(std::isfinite(duration_s) && duration_s > 0.0,
          "duration_s must be positive");
  require(std::isfinite(delay_s) && delay_s >= 0.0,
          "delay_s must be nonnegative");
  if (sample_dt_s.has_value())
    require(std::isfinite(*sample_dt_s) && *sample_dt_s > 0.0,
            "sample_dt_s must be positive");
  for (const auto& d : drive_overrides)
    require(d.device >= 0 && d.device < n, "drive override device out of range");
  if (initial_states.has_value())
    require(static_cast<int>(initial_states->size()) == n,
            "initial_states must list one state per device");
  if (mode == Mode::Sweep || mode == Mode::Analyze)
    require(!sweep_gains.empty(),
            to_string(mode) + " mode needs a nonempty sweep_gains list");
  if (mode == Mode::Anneal) {
    require(anneal.has_value(), "anneal mode needs an anneal section");
    require(static_cast<int>(anneal->j.size()) == n,
            "anneal coupling matrix must be n x n");
  }
}

ExperimentSpec parse_experiment(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("config root must be a JSON object");
  reject_unknown(doc,
                 {"mode", "seed", "duration_s", "sample_dt_s", "delay_s",
                  "devices", "couplings", "sweep_gains", "drive_overrides",
                  "initial_states", "anneal", "out_dir"},
                 "config");

  ExperimentSpec spec;
  try {
    if (doc.contains("mode")) {
      if (!doc["mode"].is_string()) fail("config: 'mode' must be a string");
      spec.mode = mode_from_string(doc["mode"].get<std::string>());
    }

    if (doc.contains("seed")) {
      if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
        fail("config: 'seed' must be an integer");
      spec.seed = doc["seed"].get<std::uint64_t>();
    }
    spec.duration_s = num_or(doc, "duration_s", spec.duration_s, "config");
    spec.delay_s = num_or(doc, "delay_s", spec.delay_s, "config");
    if (doc.contains("sample_dt_s"))
      spec.sample_dt_s = num(doc, "sample_dt_s", "config");

    const json& devices = member(doc, "devices", "config");
    if (!devices.is_array()) fail("config: 'devices' must be an array");
    for (std::size_t i = 0; i < devices.size(); ++i) {
      const std::string ctx = "device " + std::to_string(i);
      DeviceRef ref;
      if (devices[i].is_string())
        ref.preset = devices[i].get<std::string>();
      else if (devices[i].is_object())
        ref.params = params_from(devices[i], ctx);
      else
        fail(ctx + ": must be a preset name or a parameter object");
      spec.devices.push_back(std::move(ref));
    }

    if (doc.contains("couplings")) {
      const json& cj = doc["couplings"];
      if (!cj.is_array()) fail("config: 'couplings' must be an array");
      for (std::size_t i = 0; i < cj.size(); ++i) {
        const std::string ctx = "coupling " + std::to_string(i);
        if (!cj[i].is_object()) fail(ctx + ": must be an object");
        CouplingRef ref;
        ref.target = integer(cj[i], "target", ctx);
        ref.source = integer(cj[i], "source", ctx);
        if (cj[i].contains("pipeline")) {
          reject_unknown(cj[i], {"target", "source", "pipeline"}, ctx);
          ref.pipeline = pipeline_from(cj[i]["pipeline"], ctx + ".pipeline");
        } else {
          reject_unknown(cj[i],
                         {"target", "source", "gain", "polarity",
                          "threshold_ref_v"},
                         ctx);
          CouplingShorthand sh;
          sh.gain = num(cj[i], "gain", ctx);
          sh.polarity = polarity_from(member(cj[i], "polarity", ctx), ctx);
          if (cj[i].contains("threshold_ref_v"))
            sh.threshold_ref_v = num(cj[i], "threshold_ref_v", ctx);
          ref.shorthand = sh;
        }
        spec.couplings.push_back(std::move(ref));
      }
    }

    if (doc.contains("sweep_gains")) {
      const json& sg = doc["sweep_gains"];
      if (!sg.is_array()) fail("config: 'sweep_gains' must be an array");
      for (const auto& v : sg) {
        if (!v.is_number()) fail("config: sweep_gains entries must be numbers");
        spec.sweep_gains.push_back(v.get<double>());
      }
    }

    if (doc.contains("drive_overrides")) {
      const json& dj = doc["drive_overrides"];
      if (!dj.is_array()) fail("config: 'drive_overrides' must be an array");
      for (std::size_t i = 0; i < dj.size(); ++i) {
        const std::string ctx = "drive override " + std::to_string(i);
        if (!dj[i].is_object()) fail(ctx + ": must be an object");
        reject_unknown(dj[i], {"device", "period_s", "duty", "phase_s"}, ctx);
        DriveRef d;
        d.device = integer(dj[i], "device", ctx);
        d.waveform.period_s = num(dj[i], "period_s", ctx);
        d.waveform.duty = num_or(dj[i], "duty", d.waveform.duty, ctx);
        d.waveform.phase_s = num_or(dj[i], "phase_s", d.waveform.phase_s, ctx);
        spec.drive_overrides.push_back(d);
      }
    }

    if (doc.contains("initial_states")) {
      const json& sj = doc["initial_states"];
      if (!sj.is_array()) fail("config: 'initial_states' must be an array");
      std::vector<MagState> states;
      for (const auto& v : sj) states.push_back(state_from(v, "initial_states"));
      spec.initial_states = std::move(states);
    }

    if (doc.contains("anneal")) {
      const json& aj = doc["anneal"];
      if (!aj.is_object()) fail("config: 'anneal' must be an object");
      reject_unknown(aj, {"j", "schedule"}, "anneal");
      AnnealSection sec;
      const json& jm = member(aj, "j", "anneal");
      if (!jm.is_array()) fail("anneal: 'j' must be a matrix");
      for (const auto& row : jm) {
        if (!row.is_array()) fail("anneal: 'j' must be a matrix");
        std::vector<double> r;
        for (const auto& v : row) {
          if (!v.is_number()) fail("anneal: 'j' entries must be numbers");
          r.push_back(v.get<double>());
        }
        sec.j.push_back(std::move(r));
      }
      if (aj.contains("schedule")) {
        const json& sj = aj["schedule"];
        if (!sj.is_array()) fail("anneal: 'schedule' must be an array");
        anneal::AnnealSchedule sched;
        for (std::size_t i = 0; i < sj.size(); ++i) {
          const std::string ctx = "anneal schedule step " + std::to_string(i);
          if (!sj[i].is_object()) fail(ctx + ": must be an object");
          reject_unknown(sj[i], {"duration_s", "gain"}, ctx);
          sched.push_back({num(sj[i], "duration_s", ctx), num(sj[i], "gain", ctx)});
        }
        sec.schedule = std::move(sched);
      }
      spec.anneal = std::move(sec);
    }

    if (doc.contains("out_dir")) {
      if (!doc["out_dir"].is_string()) fail("config: 'out_dir' must be a string");
      spec.out_dir = doc["out_dir"].get<std::string>();
    }
  } catch (const json::exception& e) {
    fail(std::string("config: ") + e.what());
  }

  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_experiment(buf.str());
  } catch (const ConfigError& e) {
    fail(path + ": " + e.what());
  }
}

std::string write_experiment(const ExperimentSpec& spec) {
  json doc;
  doc["mode"] = to_string(spec.mode);
  doc["seed"] = spec.seed;
  doc["duration_s"] = spec.duration_s;
  if (spec.sample_dt_s.has_value()) doc["sample_dt_s"] = *spec.sample_dt_s;
  doc["delay_s"] = spec.delay_s;

  json devices = json::array();
  for (const auto& d : spec.devices) {
    if (d.params.has_value())
      devices.push_back(params_to(*d.params));
    else
      devices.push_back(d.preset);
  }
  doc["devices"] = std::move(devices);

  if (!spec.couplings.empty()) {
    json cj = json::array();
    for (const auto& c : spec.couplings) {
      json e{{"target", c.target}, {"source", c.source}};
      if (c.pipeline.has_value()) {
        e["pipeline"] = pipeline_to(*c.pipeline);
      } else {
        e["gain"] = c.shorthand->gain;
        e["polarity"] = polarity_to(c.shorthand->polarity);
        if (c.shorthand->threshold_ref_v.has_value())
          e["threshold_ref_v"] = *c.shorthand->threshold_ref_v;
      }
      cj.push_back(std::move(e));
    }
    doc["couplings"] = std::move(cj);
  }

  if (!spec.sweep_gains.empty()) doc["sweep_gains"] = spec.sweep_gains;

  if (!spec.drive_overrides.empty()) {
    json dj = json::array();
    for (const auto& d : spec.drive_overrides)
      dj.push_back({{"device", d.device},
                    {"period_s", d.waveform.period_s},
                    {"duty", d.waveform.duty},
                    {"phase_s", d.waveform.phase_s}});
    doc["drive_overrides"] = std::move(dj);
  }

  if (spec.initial_states.has_value()) {
    json sj = json::array();
    for (MagState s : *spec.initial_states)
      sj.push_back(s == MagState::AP ? "AP" : "P");
    doc["initial_states"] = std::move(sj);
  }

  if (spec.anneal.has_value()) {
    json aj;
    aj["j"] = spec.anneal->j;
    if (spec.anneal->schedule.has_value()) {
      json sj = json::array();
      for (const auto& step : *spec.anneal->schedule)
        sj.push_back({{"duration_s", step.duration_s}, {"gain", step.gain}});
      aj["schedule"] = std::move(sj);
    }
    doc["anneal"] = std::move(aj);
  }

  if (spec.out_dir.has_value()) doc["out_dir"] = *spec.out_dir;
  return doc.dump(2) + "\n";
}

sim::NetworkSpec build_network(const ExperimentSpec& spec) {
  spec.validate();
  const int n = static_cast<int>(spec.devices.size());
  sim::NetworkSpec net;
  net.delay_s = spec.delay_s;
  net.devices.reserve(n);
  for (const auto& d : spec.devices) net.devices.push_back(d.resolve());
  net.couplings.assign(n, std::vector<std::optional<analog::PipelineConfig>>(n));
  for (const auto& c : spec.couplings) {
    if (c.pipeline.has_value()) {
      net.couplings[c.target][c.source] = *c.pipeline;
    } else {
      const double ref = c.shorthand->threshold_ref_v.has_value()
                             ? *c.shorthand->threshold_ref_v
                             : midpoint_sense_v(net.devices[c.source]);
      net.couplings[c.target][c.source] =
          analog::make_pipeline(c.shorthand->gain, c.shorthand->polarity, ref,
                                net.devices[c.target].i_balance_a);
    }
  }
  for (const auto& d : spec.drive_overrides)
    net.drive_overrides[d.device] = d.waveform;
  return net;
}

sim::NetworkSpec network_at_gain(const ExperimentSpec& spec, double gain) {
  require(gain >= 0.0 && gain <= 0.1, "gain must lie within [0, 0.1]");
  sim::NetworkSpec net = build_network(spec);
  for (auto& row : net.couplings)
    for (auto& cp : row)
      if (cp.has_value()) cp->gain.r_gain_ohm = gain * cp->gain.r_gs_ohm;
  return net;
}

}  // namespace smtj::cfg
