#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace heraldsim {

/// All times are kept as signed 64-bit integer picosecond ticks so that
/// nanosecond-scale windows and microsecond dead-times compare exactly.
using TimePs = std::int64_t;

constexpr double kPsPerSecond = 1e12;

inline double ps_to_s(TimePs t) { return static_cast<double>(t) / kPsPerSecond; }
inline TimePs s_to_ps(double seconds) { return static_cast<TimePs>(std::llround(seconds * kPsPerSecond)); }

enum class Channel : int { signal = 1, herald = 2 };

inline const char* channel_name(Channel c) { return c == Channel::signal ? "signal" : "herald"; }

/// Channel-tagged detection timestamps, strictly increasing, all inside
/// [0, duration_ps). The common currency between simulation, waveform
/// discrimination and coincidence counting.
struct EventStream {
    Channel channel = Channel::signal;
    std::vector<TimePs> timestamps_ps;
    TimePs duration_ps = 0;

    std::size_t size() const { return timestamps_ps.size(); }
    double duration_s() const { return ps_to_s(duration_ps); }
    double rate_hz() const { return duration_ps > 0 ? static_cast<double>(size()) / duration_s() : 0.0; }

    /// Throws ValidationError if timestamps are not strictly increasing
    /// inside [0, duration_ps).
    void validate() const;
};

/// Ground truth for one simulated run: pair rate R0, the two total arm
/// efficiencies, per-channel dead-times and jitter, and background rates.
struct SourceModel {
    double pair_rate_hz = 0.0;
    double eta_signal = 1.0;
    double eta_herald = 1.0;
    TimePs deadtime_signal_ps = 0;
    TimePs deadtime_herald_ps = 0;
    TimePs jitter_fwhm_signal_ps = 0;
    TimePs jitter_fwhm_herald_ps = 0;
    double background_rate_signal_hz = 0.0;
    double background_rate_herald_hz = 0.0;
    TimePs duration_ps = 0;
    std::uint64_t rng_seed = 0;

    double expected_pairs() const { return pair_rate_hz * ps_to_s(duration_ps); }

    /// Throws ValidationError on non-finite or out-of-range parameters.
    void validate() const;
};

/// FWHM of a Gaussian to its standard deviation.
inline double fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

} // namespace heraldsim
