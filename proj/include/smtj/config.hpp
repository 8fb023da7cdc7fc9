#ifndef SMTJ_CONFIG_HPP
#define SMTJ_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smtj/anneal.hpp"
#include "smtj/simnet.hpp"

namespace smtj::cfg {

enum class Mode { Simulate, Sweep, Analyze, Anneal };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& s);  // throws ConfigError

// A device is either a preset name or explicit parameters; the raw form is
// kept so a written config re-parses to the same document.
struct DeviceRef {
  std::string preset;                 // empty when params given inline
  std::optional<SmtjParams> params;

  const SmtjParams& resolve() const;  // throws ConfigError on unknown preset
};

// Shorthand coupling: only the gain knob and polarity; everything else takes
// the standard pipeline defaults. The threshold reference defaults to the
// source device's midpoint sense voltage.
struct CouplingShorthand {
  double gain = 0.0;
  analog::Polarity polarity = analog::Polarity::Positive;
  std::optional<double> threshold_ref_v;
};

struct CouplingRef {
  int target = 0;
  int source = 0;
  std::optional<CouplingShorthand> shorthand;
  std::optional<analog::PipelineConfig> pipeline;  // exactly one of the two
};

struct DriveRef {
  int device = 0;
  sim::DriveWaveform waveform;
};

struct AnnealSection {
  std::vector<std::vector<double>> j;       // coupling matrix
  std::optional<anneal::AnnealSchedule> schedule;  // default ramp when absent
};

struct ExperimentSpec {
  Mode mode = Mode::Simulate;
  std::uint64_t seed = 1;
  double duration_s = 1.0;
  std::optional<double> sample_dt_s;
  double delay_s = 1e-6;
  std::vector<DeviceRef> devices;
  std::vector<CouplingRef> couplings;
  std::vector<double> sweep_gains;          // sweep / analyze modes
  std::vector<DriveRef> drive_overrides;
  std::optional<std::vector<MagState>> initial_states;
  std::optional<AnnealSection> anneal;
  std::optional<std::string> out_dir;       // overridden by --out

  void validate() const;  // structural checks; throws ConfigError
};

// JSON round trip. parse_experiment throws ConfigError with a line-located
// message on malformed documents.
ExperimentSpec parse_experiment(const std::string& json_text);
ExperimentSpec load_experiment(const std::string& path);
std::string write_experiment(const ExperimentSpec& spec);  // 2-space indent

// Midpoint of the two resistive sense levels at the balance current; the
// default comparator reference for shorthand couplings.
double midpoint_sense_v(const SmtjParams& params);

// Materializes the network: resolves presets, expands shorthand couplings
// (bias solved so the quiescent drive hits the target's balance current).
sim::NetworkSpec build_network(const ExperimentSpec& spec);

// The same network with every coupling's gain replaced by `gain`
// (full-pipeline couplings get r_gain = gain * r_gs).
sim::NetworkSpec network_at_gain(const ExperimentSpec& spec, double gain);

}  // namespace smtj::cfg

#endif
