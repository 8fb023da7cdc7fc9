#include "smtj/analog.hpp"

#include <cmath>
#include <string>

#include "smtj/errors.hpp"

namespace smtj::analog {

namespace {

void check(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

double GainConfig::gain() const {
  if (r_gs_ohm == 0.0) throw ConfigError("gain stage r_gs must be nonzero");
  return r_gain_ohm / r_gs_ohm;
}

double LevelShiftConfig::input_gain() const {
  double den = (r_2_ohm + r_g_ohm) * r_1_ohm;
  if (den == 0.0) throw ConfigError("level shift denominator is zero");
  return (r_1_ohm + r_f_ohm) * r_g_ohm / den;
}

double LevelShiftConfig::bias_gain() const {
  double den = (r_2_ohm + r_g_ohm) * r_1_ohm;
  if (den == 0.0) throw ConfigError("level shift denominator is zero");
  return (r_1_ohm + r_f_ohm) * r_2_ohm / den;
}

void validate(const ThresholdConfig& cfg) {
  check(finite(cfg.i_fixed_a) && cfg.i_fixed_a > 0.0,
        "threshold i_fixed must be positive");
  check(finite(cfg.r_var_ohm) && cfg.r_var_ohm >= 0.0,
        "threshold r_var must be non-negative");
  check(finite(cfg.v_high_v) && cfg.v_high_v > 0.0,
        "threshold v_high must be positive");
  check(cfg.reference_v() >= 0.0 && cfg.reference_v() <= 1.0,
        "threshold reference outside the [0, 1] V hardware range");
}

void validate(const GainConfig& cfg) {
  check(finite(cfg.r_gain_ohm) && cfg.r_gain_ohm >= 0.0,
        "gain r_gain must be non-negative");
  check(finite(cfg.r_gs_ohm) && cfg.r_gs_ohm > 0.0,
        "gain r_gs must be positive");
  check(finite(cfg.v_c_v), "gain v_c must be finite");
  double g = cfg.gain();
  check(g >= 0.0 && g <= 0.1, "gain outside the [0, 0.1] hardware range");
}

void validate(const LevelShiftConfig& cfg) {
  check(finite(cfg.r_1_ohm) && cfg.r_1_ohm > 0.0, "shift r_1 must be positive");
  check(finite(cfg.r_f_ohm) && cfg.r_f_ohm > 0.0, "shift r_f must be positive");
  check(finite(cfg.r_2_ohm) && cfg.r_2_ohm > 0.0, "shift r_2 must be positive");
  check(finite(cfg.r_g_ohm) && cfg.r_g_ohm > 0.0, "shift r_g must be positive");
  check(finite(cfg.v_bias_v), "shift v_bias must be finite");
}

void validate(const TransconductanceConfig& cfg) {
  check(finite(cfg.v_dd_v), "transconductance v_dd must be finite");
  check(finite(cfg.r_1_ohm) && cfg.r_1_ohm > 0.0,
        "transconductance r_1 must be positive");
}

void validate(const PipelineConfig& cfg) {
  validate(cfg.threshold);
  validate(cfg.gain);
  validate(cfg.shift);
  validate(cfg.transcond);
}

double threshold_stage(const ThresholdConfig& cfg, double v_in_v) {
  bool low = v_in_v <= cfg.reference_v();
  if (cfg.polarity == Polarity::Negative) low = !low;
  return low ? 0.0 : cfg.v_high_v;
}

double gain_stage(const GainConfig& cfg, double v_in_v) {
  return cfg.gain() * (cfg.v_c_v - v_in_v) + cfg.v_c_v;
}

double level_shift_stage(const LevelShiftConfig& cfg, double v_in_v) {
  return cfg.input_gain() * v_in_v + cfg.bias_gain() * cfg.v_bias_v;
}

double transconductance_stage(const TransconductanceConfig& cfg,
                              double v_in_v) {
  if (cfg.r_1_ohm == 0.0)
    throw ConfigError("transconductance r_1 must be nonzero");
  return (cfg.v_dd_v - v_in_v) / cfg.r_1_ohm;
}

double pipeline_output(const PipelineConfig& cfg, MagState source_state,
                       double i_breakdown_a) {
  // Idealized sensed level: AP reads above the reference, P below. The
  // polarity swap happens inside the threshold stage.
  double sensed =
      source_state == MagState::AP ? cfg.threshold.reference_v() + 1.0 : 0.0;
  double v = threshold_stage(cfg.threshold, sensed);
  v = gain_stage(cfg.gain, v);
  v = level_shift_stage(cfg.shift, v);
  double i = transconductance_stage(cfg.transcond, v);
  if (i >= i_breakdown_a) {
    throw BreakdownError("pipeline output " + std::to_string(i) +
                         " A at or above breakdown limit " +
                         std::to_string(i_breakdown_a) + " A");
  }
  return i;
}

double dc_current(const PipelineConfig& cfg) {
  double v = level_shift_stage(cfg.shift, cfg.gain.v_c_v);
  return transconductance_stage(cfg.transcond, v);
}

double delta_current(const PipelineConfig& cfg) {
  return cfg.shift.input_gain() * cfg.gain.gain() *
         (cfg.threshold.v_high_v / 2.0) / cfg.transcond.r_1_ohm;
}

double bias_for_balance(const PipelineConfig& cfg, double i_balance_a) {
  // Solve dc_current == i_balance for v_bias:
  //   (v_dd - A*v_c - C*v_bias)/r_1 = i_balance.
  double a = cfg.shift.input_gain();
  double c = cfg.shift.bias_gain();
  return (cfg.transcond.v_dd_v - i_balance_a * cfg.transcond.r_1_ohm -
          a * cfg.gain.v_c_v) /
         c;
}

PipelineConfig make_pipeline(double gain, Polarity polarity,
                             double threshold_ref_v,
                             double target_i_balance_a) {
  PipelineConfig cfg;
  cfg.threshold.i_fixed_a = 1e-3;
  cfg.threshold.r_var_ohm = threshold_ref_v / cfg.threshold.i_fixed_a;
  cfg.threshold.v_high_v = 2.5;
  cfg.threshold.polarity = polarity;
  cfg.gain.r_gs_ohm = 1e5;
  cfg.gain.r_gain_ohm = gain * cfg.gain.r_gs_ohm;
  cfg.gain.v_c_v = 1.25;
  cfg.shift = LevelShiftConfig{};  // equal 10 kOhm resistors
  cfg.transcond = TransconductanceConfig{};
  cfg.shift.v_bias_v = bias_for_balance(cfg, target_i_balance_a);
  validate(cfg);
  return cfg;
}

}  // namespace smtj::analog
