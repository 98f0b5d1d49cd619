#include "heraldsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "heraldsim/errors.hpp"
#include "heraldsim/rng.hpp"

namespace heraldsim {

namespace {

RngStream role_stream(const SourceModel& model, RngRole role) {
    return RngStream::substream(model.rng_seed, static_cast<std::uint64_t>(role));
}

/// Sorts in place and enforces strict ordering by shifting the later of any
/// tied pair +1 ps (stable). Events pushed past the duration are dropped.
void sort_and_strictify(std::vector<TimePs>& ts, TimePs duration_ps) {
    std::stable_sort(ts.begin(), ts.end());
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (ts[i] <= ts[i - 1]) ts[i] = ts[i - 1] + 1;
    }
    while (!ts.empty() && ts.back() >= duration_ps) ts.pop_back();
}

std::vector<TimePs> poisson_times(double rate_hz, TimePs duration_ps, RngStream& rng) {
    std::vector<TimePs> times;
    if (rate_hz <= 0.0) return times;
    const double mean = rate_hz * ps_to_s(duration_ps);
    const std::int64_t n = rng.poisson(mean);
    times.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) times.push_back(rng.uniform_int(0, duration_ps));
    std::sort(times.begin(), times.end());
    return times;
}

} // namespace

std::vector<TimePs> generate_pairs(const SourceModel& model) {
    model.validate();
    const double expected = model.expected_pairs();
    if (expected > kEventBudget)
        throw ValidationError("generate_pairs: expected pair count " + std::to_string(expected) +
                              " exceeds the event budget");
    RngStream rng = role_stream(model, RngRole::pairs);
    return poisson_times(model.pair_rate_hz, model.duration_ps, rng);
}

EventStream thin_and_jitter(const std::vector<TimePs>& pairs, Channel arm, const SourceModel& model) {
    model.validate();
    const bool is_signal = arm == Channel::signal;
    const double eta = is_signal ? model.eta_signal : model.eta_herald;
    const TimePs fwhm = is_signal ? model.jitter_fwhm_signal_ps : model.jitter_fwhm_herald_ps;
    const double sigma = fwhm_to_sigma(static_cast<double>(fwhm));

    RngStream rng = role_stream(model, is_signal ? RngRole::arm_signal : RngRole::arm_herald);

    EventStream out;
    out.channel = arm;
    out.duration_ps = model.duration_ps;
    out.timestamps_ps.reserve(static_cast<std::size_t>(static_cast<double>(pairs.size()) * eta) + 16);
    for (TimePs t : pairs) {
        if (!rng.bernoulli(eta)) continue;
        TimePs jittered = t;
        if (sigma > 0.0) jittered = t + static_cast<TimePs>(std::llround(rng.normal(0.0, sigma)));
        if (jittered < 0 || jittered >= model.duration_ps) continue;
        out.timestamps_ps.push_back(jittered);
    }
    sort_and_strictify(out.timestamps_ps, out.duration_ps);
    return out;
}

EventStream merge_background(const EventStream& stream, double rate_hz, const SourceModel& model) {
    if (!std::isfinite(rate_hz) || rate_hz < 0.0)
        throw ValidationError("merge_background: rate must be finite and >= 0");
    if (rate_hz == 0.0) return stream;

    const double mean = rate_hz * stream.duration_s();
    if (mean > kEventBudget) throw ValidationError("merge_background: expected background count exceeds the event budget");

    const bool is_signal = stream.channel == Channel::signal;
    RngStream rng = role_stream(model, is_signal ? RngRole::background_signal : RngRole::background_herald);
    std::vector<TimePs> bg = poisson_times(rate_hz, stream.duration_ps, rng);

    EventStream out;
    out.channel = stream.channel;
    out.duration_ps = stream.duration_ps;
    out.timestamps_ps.resize(stream.timestamps_ps.size() + bg.size());
    // stable merge keeps stream events ahead of tied background events, so
    // the later-inserted one takes the +1 ps shift
    std::merge(stream.timestamps_ps.begin(), stream.timestamps_ps.end(), bg.begin(), bg.end(),
               out.timestamps_ps.begin());
    for (std::size_t i = 1; i < out.timestamps_ps.size(); ++i) {
        if (out.timestamps_ps[i] <= out.timestamps_ps[i - 1]) out.timestamps_ps[i] = out.timestamps_ps[i - 1] + 1;
    }
    while (!out.timestamps_ps.empty() && out.timestamps_ps.back() >= out.duration_ps) out.timestamps_ps.pop_back();
    return out;
}

EventStream apply_dead_time(const EventStream& stream, TimePs deadtime_ps) {
    if (deadtime_ps < 0) throw ValidationError("apply_dead_time: negative dead-time");
    if (deadtime_ps == 0) return stream;

    EventStream out;
    out.channel = stream.channel;
    out.duration_ps = stream.duration_ps;
    out.timestamps_ps.reserve(stream.timestamps_ps.size());
    TimePs last_kept = std::numeric_limits<TimePs>::min() / 2;
    for (TimePs t : stream.timestamps_ps) {
        if (t - last_kept >= deadtime_ps) {
            out.timestamps_ps.push_back(t);
            last_kept = t;
        }
    }
    return out;
}

ArmStreams simulate_streams(const SourceModel& model) {
    const std::vector<TimePs> pairs = generate_pairs(model);

    ArmStreams arms;
    arms.signal = thin_and_jitter(pairs, Channel::signal, model);
    arms.signal = merge_background(arms.signal, model.background_rate_signal_hz, model);
    arms.signal = apply_dead_time(arms.signal, model.deadtime_signal_ps);

    arms.herald = thin_and_jitter(pairs, Channel::herald, model);
    arms.herald = merge_background(arms.herald, model.background_rate_herald_hz, model);
    arms.herald = apply_dead_time(arms.herald, model.deadtime_herald_ps);
    return arms;
}

} // namespace heraldsim
