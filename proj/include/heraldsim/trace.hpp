#pragma once

#include <cstdint>
#include <vector>

#include "heraldsim/types.hpp"

namespace heraldsim {

/// Uniformly sampled analog-like detector trace.
struct Waveform {
    std::vector<double> samples;
    TimePs sample_period_ps = 1000;
    TimePs t0_ps = 0;

    TimePs span_ps() const { return static_cast<TimePs>(samples.size()) * sample_period_ps; }

    void validate() const;
};

/// Bolometric-style pulse: fast rise, slow recovery,
/// kernel (1 - exp(-t/rise)) * exp(-t/decay) normalized so its maximum
/// equals `amplitude`. An optional damped oscillation of wiggle_amplitude
/// starts wiggle_delay_ps after onset, riding on the recovering edge.
struct PulseShape {
    double amplitude = 1.0;
    TimePs rise_time_ps = 1;
    TimePs decay_time_ps = 2;
    double wiggle_amplitude = 0.0;
    TimePs wiggle_delay_ps = 0;

    void validate() const;
};

enum class Polarity : int { positive = 1, negative = -1 };

/// Leading-edge discriminator: fires at upward threshold crossings while
/// armed, then disarms for rearm_dead_ps (non-paralyzable).
struct DiscriminatorConfig {
    double threshold = 0.5;
    TimePs rearm_dead_ps = 0;
    Polarity polarity = Polarity::positive;
};

/// One pulse instance for traces mixing photon energies: the kernel is
/// scaled by amplitude_scale, and the wiggle is added only when requested.
struct PulseEvent {
    TimePs time_ps = 0;
    double amplitude_scale = 1.0;
    bool with_wiggle = false;
};

/// Linear superposition of pulse shapes at the event times plus white
/// Gaussian noise of noise_rms. Deterministic per seed.
Waveform synthesize(const std::vector<TimePs>& events_ps, const PulseShape& shape, double noise_rms,
                    TimePs duration_ps, TimePs sample_period_ps, std::uint64_t seed);

/// Same, with per-event amplitude scaling and selective wiggle.
Waveform synthesize(const std::vector<PulseEvent>& events, const PulseShape& shape, double noise_rms,
                    TimePs duration_ps, TimePs sample_period_ps, std::uint64_t seed);

/// Carries discriminator arm state across waveform chunks; chunked
/// processing must equal a single pass exactly.
struct DiscriminatorState {
    bool above = false;
    bool primed = false;      // above/last_value valid (first sample seen)
    double last_value = 0.0;
    TimePs last_time_ps = 0;
    TimePs dead_until_ps = 0;
    bool dead_active = false;
};

/// Feeds one waveform chunk through the discriminator, appending crossing
/// times (linearly interpolated between samples, rounded to 1 ps) to `out`.
void discriminate_chunk(const Waveform& chunk, const DiscriminatorConfig& cfg, DiscriminatorState& state,
                        std::vector<TimePs>& out);

/// Whole-waveform discrimination; returns the event stream on `channel`
/// spanning the waveform.
EventStream discriminate(const Waveform& w, const DiscriminatorConfig& cfg, Channel channel = Channel::signal);

struct Histogram {
    std::vector<double> bin_edges; // size counts.size()+1
    std::vector<std::int64_t> counts;
};

/// Histogram of per-pulse maxima between consecutive armed crossings (the
/// polarity-adjusted maximum from each crossing to the next). bins must be
/// >= 1; lo == hi selects the data range automatically.
Histogram pulse_height_histogram(const Waveform& w, const DiscriminatorConfig& cfg, int bins, double lo = 0.0,
                                 double hi = 0.0);

} // namespace heraldsim
