#include "heraldsim/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "heraldsim/errors.hpp"

namespace heraldsim {

void CoincidenceConfig::validate() const {
    if (pulse_len_signal_ps <= 0 || pulse_len_herald_ps <= 0)
        throw ValidationError("CoincidenceConfig: pulse lengths must be > 0");
    if (min_overlap_ps < 0) throw ValidationError("CoincidenceConfig: min_overlap_ps must be >= 0");
    if (min_overlap_ps >= std::min(pulse_len_signal_ps, pulse_len_herald_ps))
        throw ValidationError("CoincidenceConfig: min_overlap_ps must be smaller than both pulse lengths");
}

namespace {

struct Interval {
    TimePs start;
    TimePs end;
};

/// Logic-high intervals of one channel: a pulse of length `len` per event,
/// overlapping or touching pulses merged into one interval (analog OR).
std::vector<Interval> logic_intervals(const std::vector<TimePs>& events, TimePs len, TimePs shift) {
    std::vector<Interval> out;
    out.reserve(events.size());
    for (TimePs t : events) {
        const TimePs s = t + shift;
        if (!out.empty() && s <= out.back().end) {
            out.back().end = std::max(out.back().end, s + len);
        } else {
            out.push_back({s, s + len});
        }
    }
    return out;
}

/// Chronological sweep over the two interval lists. Each AND-high segment
/// longer than min_overlap between two not-yet-consumed intervals counts one
/// coincidence and consumes both intervals.
std::int64_t match_overlaps(const std::vector<Interval>& sig, const std::vector<Interval>& her, TimePs min_overlap) {
    std::int64_t matches = 0;
    std::size_t i = 0, j = 0;
    std::vector<bool> sig_used(sig.size(), false), her_used(her.size(), false);
    while (i < sig.size() && j < her.size()) {
        const Interval& a = sig[i];
        const Interval& b = her[j];
        const TimePs overlap = std::min(a.end, b.end) - std::max(a.start, b.start);
        if (overlap > min_overlap && !sig_used[i] && !her_used[j]) {
            ++matches;
            sig_used[i] = true;
            her_used[j] = true;
        }
        if (a.end <= b.end)
            ++i;
        else
            ++j;
    }
    return matches;
}

} // namespace

CountsSummary count_coincidences(const EventStream& signal, const EventStream& herald, const CoincidenceConfig& cfg) {
    cfg.validate();
    if (signal.duration_ps != herald.duration_ps)
        throw ValidationError("count_coincidences: stream durations differ");
    if (signal.duration_ps <= 0) throw ValidationError("count_coincidences: duration must be > 0");

    const std::vector<Interval> sig = logic_intervals(signal.timestamps_ps, cfg.pulse_len_signal_ps, cfg.delay_offset_ps);
    const std::vector<Interval> her = logic_intervals(herald.timestamps_ps, cfg.pulse_len_herald_ps, 0);

    CountsSummary s;
    s.duration_s = signal.duration_s();
    s.singles_signal_count = static_cast<std::int64_t>(signal.size());
    s.singles_herald_count = static_cast<std::int64_t>(herald.size());
    s.coincidences_count = match_overlaps(sig, her, cfg.min_overlap_ps);
    s.singles_signal_hz = static_cast<double>(s.singles_signal_count) / s.duration_s;
    s.singles_herald_hz = static_cast<double>(s.singles_herald_count) / s.duration_s;
    s.coincidences_hz = static_cast<double>(s.coincidences_count) / s.duration_s;
    return s;
}

DelayScan delay_scan(const EventStream& signal, const EventStream& herald, const CoincidenceConfig& cfg,
                     const std::vector<TimePs>& delays_ps) {
    DelayScan scan;
    scan.delays_ps = delays_ps;
    scan.coincidence_rates_hz.reserve(delays_ps.size());
    for (TimePs d : delays_ps) {
        CoincidenceConfig c = cfg;
        c.delay_offset_ps = cfg.delay_offset_ps + d;
        scan.coincidence_rates_hz.push_back(count_coincidences(signal, herald, c).coincidences_hz);
    }
    return scan;
}

HeraldingRatio heralding_ratio(const CountsSummary& summary) {
    if (summary.singles_herald_count <= 0) throw ValidationError("heralding_ratio: zero herald singles");
    HeraldingRatio r;
    r.value = summary.coincidences_hz / summary.singles_herald_hz;
    if (summary.coincidences_count > 0) {
        const double nc = static_cast<double>(summary.coincidences_count);
        const double nh = static_cast<double>(summary.singles_herald_count);
        r.sigma = r.value * std::sqrt(1.0 / nc + 1.0 / nh);
    }
    return r;
}

} // namespace heraldsim
