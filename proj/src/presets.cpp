#include <array>

#include "smtj/device.hpp"
#include "smtj/errors.hpp"

namespace smtj {

namespace {

// Built-in junction presets.
//
// Balance currents are measured values for the three characterised devices.
// Everything else is an approximation read off characterisation plots and is
// marked as such:
//   - tau_balance: smtj1/smtj2 sit in the hundreds-of-microseconds range and
//     are similar; smtj3 is roughly an order of magnitude faster
//     (tau1/tau3 = 10 here).
//   - slope B: one common value, chosen so the dwell asymmetry g = exp(B*dI)
//     reaches ~6 at the top of the standard gain sweep (G = 0.06,
//     dI = 7.5 uA). Equal slopes keep a coupled pair's g symmetric.
//   - resistances: TMR 120% (r_ap = 2.2 * r_p) with parallel resistances a
//     few hundred ohms, so the sensed voltages at balance straddle typical
//     sub-volt digitization thresholds; smtj3 sits between the other two.
//   - breakdown: junction barriers fail near 1 mA; 1.1 mA leaves operating
//     headroom above every balance point across the full gain range.
constexpr double kSlopeB = 2.4e5;       // 1/A, figure-read approximation
constexpr double kBreakdown = 1.1e-3;   // A, figure-read approximation

const std::array<DevicePreset, 3> kPresets = {{
    {"smtj1", 2.0e-4, kSlopeB,
     from_balanced_dwell(2.0e-4, kSlopeB, 0.95e-3, 500.0, 1100.0, kBreakdown)},
    {"smtj2", 1.8e-4, kSlopeB,
     from_balanced_dwell(1.8e-4, kSlopeB, 0.90e-3, 650.0, 1430.0, kBreakdown)},
    {"smtj3", 2.0e-5, kSlopeB,
     from_balanced_dwell(2.0e-5, kSlopeB, 1.00e-3, 575.0, 1265.0, kBreakdown)},
}};

}  // namespace

std::span<const DevicePreset> device_presets() { return kPresets; }

const DevicePreset& find_preset(const std::string& name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown device preset '" + name +
                    "' (available: smtj1, smtj2, smtj3)");
}

}  // namespace smtj
