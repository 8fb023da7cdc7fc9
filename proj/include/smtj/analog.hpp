#ifndef SMTJ_ANALOG_HPP
#define SMTJ_ANALOG_HPP

#include <limits>

#include "smtj/device.hpp"

namespace smtj::analog {

// Coupling sense. Positive: a high (AP) source raises the target's drive
// current; Negative swaps the threshold branches and lowers it.
enum class Polarity : std::uint8_t { Positive = 0, Negative = 1 };

// Comparator digitizing the sensed junction voltage against i_fixed * r_var.
// Ties resolve to the low branch.
struct ThresholdConfig {
  double i_fixed_a = 1e-3;
  double r_var_ohm = 615.0;
  double v_high_v = 2.5;
  Polarity polarity = Polarity::Positive;

  double reference_v() const { return i_fixed_a * r_var_ohm; }
};

// Inverting amplifier about the midpoint v_c: v_out = G*(v_c - v_in) + v_c,
// G = r_gain/r_gs.
struct GainConfig {
  double r_gain_ohm = 0.0;
  double r_gs_ohm = 1e5;
  double v_c_v = 1.25;

  double gain() const;
};

// Summing level shifter. General transfer:
//   v_out = ((r_1+r_f)*r_g / ((r_2+r_g)*r_1)) * v_in
//         + ((r_1+r_f)*r_2 / ((r_2+r_g)*r_1)) * v_bias
// Equal resistors reduce it to v_in + v_bias.
struct LevelShiftConfig {
  double r_1_ohm = 1e4;
  double r_f_ohm = 1e4;
  double r_2_ohm = 1e4;
  double r_g_ohm = 1e4;
  double v_bias_v = 0.0;

  double input_gain() const;  // coefficient of v_in
  double bias_gain() const;   // coefficient of v_bias
};

// Voltage-to-current output stage: i_out = (v_dd - v_in)/r_1.
struct TransconductanceConfig {
  double v_dd_v = 15.0;
  double r_1_ohm = 1e4;
};

// One unidirectional coupling: sense a junction, digitize, scale, shift,
// convert to a drive current for the partner.
struct PipelineConfig {
  ThresholdConfig threshold;
  GainConfig gain;
  LevelShiftConfig shift;
  TransconductanceConfig transcond;
};

// Per-stage validation; throws ConfigError on violations. The pipeline check
// covers all four stages plus the gain range [0, 0.1] and the threshold
// reference range [0, 1] V of the default hardware.
void validate(const ThresholdConfig& cfg);
void validate(const GainConfig& cfg);
void validate(const LevelShiftConfig& cfg);
void validate(const TransconductanceConfig& cfg);
void validate(const PipelineConfig& cfg);

double threshold_stage(const ThresholdConfig& cfg, double v_in_v);
double gain_stage(const GainConfig& cfg, double v_in_v);
double level_shift_stage(const LevelShiftConfig& cfg, double v_in_v);
double transconductance_stage(const TransconductanceConfig& cfg,
                              double v_in_v);

// Chains the four stages on the idealized digital input for the given source
// state. The result takes exactly two values, I_dc +- delta_current. Throws
// BreakdownError when the result reaches i_breakdown_a.
double pipeline_output(
    const PipelineConfig& cfg, MagState source_state,
    double i_breakdown_a = std::numeric_limits<double>::infinity());

// Quiescent output: the G=0 current, (v_dd - shift(v_c))/r_1.
double dc_current(const PipelineConfig& cfg);

// Closed-form differential current. With an equal-resistor shift this is
// G * (v_high/2) / r_1; in general the shift's input gain multiplies in.
// pipeline_output() evaluated at both levels is the independent cross-check.
double delta_current(const PipelineConfig& cfg);

// v_bias that centers the quiescent output on the target's balance current:
// v_bias = v_dd - i_balance*r_1 - v_c (equal-resistor shift assumed).
double bias_for_balance(const PipelineConfig& cfg, double i_balance_a);

// Pipeline with the default hardware constants (v_high 2.5 V, v_c 1.25 V,
// v_dd 15 V, output r_1 10 kOhm, equal 10 kOhm shift) at the requested gain,
// thresholded at threshold_ref_v and biased so the DC output equals
// target_i_balance_a.
PipelineConfig make_pipeline(double gain, Polarity polarity,
                             double threshold_ref_v,
                             double target_i_balance_a);

}  // namespace smtj::analog

#endif
