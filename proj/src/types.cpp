#include "heraldsim/types.hpp"

#include <cmath>
#include <string>

#include "heraldsim/errors.hpp"

namespace heraldsim {

void EventStream::validate() const {
    if (duration_ps <= 0) throw ValidationError("EventStream: duration_ps must be > 0");
    TimePs prev = -1;
    for (TimePs t : timestamps_ps) {
        if (t <= prev) throw ValidationError("EventStream: timestamps must be strictly increasing");
        if (t < 0 || t >= duration_ps)
            throw ValidationError("EventStream: timestamp " + std::to_string(t) + " outside [0, duration)");
        prev = t;
    }
}

namespace {

void require_finite_nonneg(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0)
        throw ValidationError(std::string("SourceModel: ") + name + " must be finite and >= 0");
}

} // namespace

void SourceModel::validate() const {
    require_finite_nonneg(pair_rate_hz, "pair_rate_hz");
    require_finite_nonneg(background_rate_signal_hz, "background_rate_signal_hz");
    require_finite_nonneg(background_rate_herald_hz, "background_rate_herald_hz");
    if (!(eta_signal >= 0.0 && eta_signal <= 1.0)) throw ValidationError("SourceModel: eta_signal outside [0,1]");
    if (!(eta_herald >= 0.0 && eta_herald <= 1.0)) throw ValidationError("SourceModel: eta_herald outside [0,1]");
    if (deadtime_signal_ps < 0 || deadtime_herald_ps < 0) throw ValidationError("SourceModel: negative dead-time");
    if (jitter_fwhm_signal_ps < 0 || jitter_fwhm_herald_ps < 0) throw ValidationError("SourceModel: negative jitter");
    if (duration_ps <= 0) throw ValidationError("SourceModel: duration_ps must be > 0");
}

} // namespace heraldsim
