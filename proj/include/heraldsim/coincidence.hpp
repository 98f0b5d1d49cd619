#pragma once

#include <cstdint>
#include <vector>

#include "heraldsim/types.hpp"

namespace heraldsim {

/// Analog counting chain parameters: every detection opens a logic pulse of
/// its channel's length; overlaps longer than min_overlap_ps count as
/// coincidences. The effective coincidence window is the sum of the two
/// pulse lengths.
struct CoincidenceConfig {
    TimePs pulse_len_signal_ps = 50'000;     // 0.05 us
    TimePs pulse_len_herald_ps = 1'000'000;  // 1 us
    TimePs min_overlap_ps = 3'000;           // 3 ns
    TimePs delay_offset_ps = 0;              // applied to the signal channel; positive = later

    TimePs coincidence_window_ps() const { return pulse_len_signal_ps + pulse_len_herald_ps; }

    void validate() const;
};

/// Singles and coincidence totals for one run.
struct CountsSummary {
    double singles_signal_hz = 0.0;
    double singles_herald_hz = 0.0;
    double coincidences_hz = 0.0;
    double duration_s = 0.0;
    std::int64_t singles_signal_count = 0;
    std::int64_t singles_herald_count = 0;
    std::int64_t coincidences_count = 0;
};

struct DelayScan {
    std::vector<TimePs> delays_ps;
    std::vector<double> coincidence_rates_hz;
};

/// Counts coincidences the way the analog logic does. Overlapping pulses on
/// the same channel merge into one logic-high interval (analog OR), and each
/// high interval participates in at most one counted coincidence; a
/// coincidence is registered whenever two unconsumed opposite-channel
/// intervals overlap by strictly more than min_overlap_ps. The one-shot rule
/// is what loses the second pair arriving inside the longer pulse and
/// reproduces the coincidence saturation of the correction model.
/// Singles counts are the raw event counts per stream.
CountsSummary count_coincidences(const EventStream& signal, const EventStream& herald, const CoincidenceConfig& cfg);

/// Re-counts the same streams at each additional signal-channel delay.
DelayScan delay_scan(const EventStream& signal, const EventStream& herald, const CoincidenceConfig& cfg,
                     const std::vector<TimePs>& delays_ps);

struct HeraldingRatio {
    double value = 0.0;
    double sigma = 0.0; // Poissonian standard error (independent counts)
};

/// Raw heralding efficiency: coincidences / herald singles, uncorrected.
HeraldingRatio heralding_ratio(const CountsSummary& summary);

} // namespace heraldsim
