#include "heraldsim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heraldsim/errors.hpp"
#include "heraldsim/rng.hpp"

namespace heraldsim {

void Waveform::validate() const {
    if (samples.empty()) throw ValidationError("Waveform: empty");
    if (sample_period_ps <= 0) throw ValidationError("Waveform: sample_period_ps must be > 0");
}

void PulseShape::validate() const {
    if (!(amplitude > 0.0)) throw ValidationError("PulseShape: amplitude must be > 0");
    if (rise_time_ps <= 0 || decay_time_ps <= 0) throw ValidationError("PulseShape: time constants must be > 0");
    if (rise_time_ps >= decay_time_ps) throw ValidationError("PulseShape: rise must be shorter than decay");
    if (wiggle_amplitude < 0.0 || wiggle_delay_ps < 0) throw ValidationError("PulseShape: negative wiggle parameters");
}

namespace {

/// Peak value of (1 - exp(-t/r)) * exp(-t/d): attained at t* = r*ln((r+d)/r).
double kernel_peak(double rise, double decay) {
    const double t_star = rise * std::log((rise + decay) / rise);
    return (1.0 - std::exp(-t_star / rise)) * std::exp(-t_star / decay);
}

struct Kernel {
    double rise;
    double decay;
    double norm;              // scales the kernel maximum to 1
    double wiggle_amplitude;  // relative to a unit pulse
    double wiggle_delay;
    double wiggle_period;     // damped sine period; damping constant = period/2
    double cutoff;            // support length beyond which the pulse is negligible

    explicit Kernel(const PulseShape& s)
        : rise(static_cast<double>(s.rise_time_ps)),
          decay(static_cast<double>(s.decay_time_ps)),
          norm(1.0 / kernel_peak(rise, decay)),
          wiggle_amplitude(s.wiggle_amplitude / s.amplitude),
          wiggle_delay(static_cast<double>(s.wiggle_delay_ps)),
          wiggle_period(8.0 * rise) {
        cutoff = decay * 40.0;
        if (s.wiggle_amplitude > 0.0) cutoff = std::max(cutoff, wiggle_delay + 10.0 * wiggle_period);
    }

    double base(double t) const {
        if (t <= 0.0) return 0.0;
        return norm * (1.0 - std::exp(-t / rise)) * std::exp(-t / decay);
    }

    double wiggle(double t) const {
        const double u = t - wiggle_delay;
        if (u <= 0.0) return 0.0;
        return wiggle_amplitude * std::sin(2.0 * M_PI * u / wiggle_period) * std::exp(-2.0 * u / wiggle_period);
    }

    double value(double t, bool with_wiggle) const {
        return base(t) + (with_wiggle ? wiggle(t) : 0.0);
    }
};

} // namespace

Waveform synthesize(const std::vector<PulseEvent>& events, const PulseShape& shape, double noise_rms,
                    TimePs duration_ps, TimePs sample_period_ps, std::uint64_t seed) {
    shape.validate();
    if (duration_ps <= 0 || sample_period_ps <= 0)
        throw ValidationError("synthesize: duration and sample period must be > 0");
    if (noise_rms < 0.0) throw ValidationError("synthesize: negative noise_rms");

    const std::size_t n = static_cast<std::size_t>((duration_ps + sample_period_ps - 1) / sample_period_ps);
    Waveform w;
    w.sample_period_ps = sample_period_ps;
    w.t0_ps = 0;
    w.samples.assign(n, 0.0);

    const Kernel kernel(shape);
    const double dt = static_cast<double>(sample_period_ps);
    for (const PulseEvent& ev : events) {
        if (ev.time_ps < 0 || ev.time_ps >= duration_ps) throw ValidationError("synthesize: event outside duration");
        const std::size_t first = static_cast<std::size_t>(ev.time_ps / sample_period_ps);
        const std::size_t last = std::min(
            n, first + static_cast<std::size_t>(kernel.cutoff / dt) + 2);
        const double scale = shape.amplitude * ev.amplitude_scale;
        for (std::size_t k = first; k < last; ++k) {
            const double t = static_cast<double>(k) * dt - static_cast<double>(ev.time_ps);
            w.samples[k] += scale * kernel.value(t, ev.with_wiggle);
        }
    }

    if (noise_rms > 0.0) {
        RngStream rng(seed);
        for (double& s : w.samples) s += rng.normal(0.0, noise_rms);
    }
    return w;
}

Waveform synthesize(const std::vector<TimePs>& events_ps, const PulseShape& shape, double noise_rms,
                    TimePs duration_ps, TimePs sample_period_ps, std::uint64_t seed) {
    std::vector<PulseEvent> events;
    events.reserve(events_ps.size());
    const bool wiggle = shape.wiggle_amplitude > 0.0;
    for (TimePs t : events_ps) events.push_back({t, 1.0, wiggle});
    return synthesize(events, shape, noise_rms, duration_ps, sample_period_ps, seed);
}

void discriminate_chunk(const Waveform& chunk, const DiscriminatorConfig& cfg, DiscriminatorState& state,
                        std::vector<TimePs>& out) {
    chunk.validate();
    if (cfg.rearm_dead_ps < 0) throw ValidationError("discriminate: negative rearm_dead_ps");
    const double sign = cfg.polarity == Polarity::positive ? 1.0 : -1.0;
    const double thr = sign * cfg.threshold;
    const double dt = static_cast<double>(chunk.sample_period_ps);

    for (std::size_t k = 0; k < chunk.samples.size(); ++k) {
        const double y = sign * chunk.samples[k];
        const TimePs t = chunk.t0_ps + static_cast<TimePs>(k) * chunk.sample_period_ps;
        if (!state.primed) {
            state.primed = true;
            state.above = y >= thr;
        } else if (!state.above && y >= thr) {
            // upward crossing; interpolate the crossing time between samples
            const double frac = (thr - state.last_value) / (y - state.last_value);
            const TimePs tc = state.last_time_ps +
                              static_cast<TimePs>(std::llround(frac * static_cast<double>(t - state.last_time_ps)));
            state.above = true;
            if (!state.dead_active || tc >= state.dead_until_ps) {
                out.push_back(tc);
                state.dead_until_ps = tc + cfg.rearm_dead_ps;
                state.dead_active = true;
            }
        } else if (state.above && y < thr) {
            state.above = false;
        }
        state.last_value = y;
        state.last_time_ps = t;
        (void)dt;
    }
}

EventStream discriminate(const Waveform& w, const DiscriminatorConfig& cfg, Channel channel) {
    DiscriminatorState state;
    EventStream out;
    out.channel = channel;
    out.duration_ps = w.t0_ps + w.span_ps();
    discriminate_chunk(w, cfg, state, out.timestamps_ps);
    return out;
}

Histogram pulse_height_histogram(const Waveform& w, const DiscriminatorConfig& cfg, int bins, double lo, double hi) {
    w.validate();
    if (bins < 1) throw ValidationError("pulse_height_histogram: bins must be >= 1");
    const EventStream events = discriminate(w, cfg);
    const double sign = cfg.polarity == Polarity::positive ? 1.0 : -1.0;

    // per-pulse maxima between consecutive armed crossings
    std::vector<double> maxima;
    maxima.reserve(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
        const TimePs start_t = events.timestamps_ps[e];
        const TimePs stop_t = e + 1 < events.size() ? events.timestamps_ps[e + 1] : w.t0_ps + w.span_ps();
        std::size_t k0 = static_cast<std::size_t>(std::max<TimePs>(0, (start_t - w.t0_ps) / w.sample_period_ps));
        std::size_t k1 = std::min(w.samples.size(),
                                  static_cast<std::size_t>(std::max<TimePs>(0, (stop_t - w.t0_ps) / w.sample_period_ps)) + 1);
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t k = k0; k < k1; ++k) peak = std::max(peak, sign * w.samples[k]);
        if (std::isfinite(peak)) maxima.push_back(peak);
    }

    if (lo == hi) {
        if (maxima.empty()) {
            lo = 0.0;
            hi = 1.0;
        } else {
            lo = *std::min_element(maxima.begin(), maxima.end());
            hi = *std::max_element(maxima.begin(), maxima.end());
            if (lo == hi) hi = lo + 1.0;
            const double pad = 1e-9 * (hi - lo);
            hi += pad;
        }
    }
    if (!(hi > lo)) throw ValidationError("pulse_height_histogram: hi must be > lo");

    Histogram h;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
        h.bin_edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * static_cast<double>(b) / bins;
    for (double v : maxima) {
        if (v < lo || v > hi) continue;
        auto idx = static_cast<std::int64_t>((v - lo) / (hi - lo) * bins);
        idx = std::clamp<std::int64_t>(idx, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(idx)];
    }
    return h;
}

} // namespace heraldsim
