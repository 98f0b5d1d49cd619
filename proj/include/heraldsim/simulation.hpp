#pragma once

#include <cstdint>
#include <vector>

#include "heraldsim/types.hpp"

namespace heraldsim {

/// Hard cap on the expected number of generated events per call; a
/// SourceModel whose R0*T exceeds this is treated as misconfigured.
constexpr double kEventBudget = 2.5e8;

/// Substream counters for the per-run RNG so the pipeline stages draw from
/// independent streams regardless of call order.
enum class RngRole : std::uint64_t {
    pairs = 0,
    arm_signal = 1,
    arm_herald = 2,
    background_signal = 3,
    background_herald = 4,
};

/// Homogeneous Poisson pair-creation times of rate pair_rate_hz over
/// [0, duration_ps), sorted. Deterministic for a fixed model (incl. seed).
std::vector<TimePs> generate_pairs(const SourceModel& model);

/// Bernoulli-thins the pair list with the arm's efficiency and applies
/// per-detection Gaussian jitter of the arm's FWHM. Perturbed times that
/// leave [0, duration) are dropped; output is strictly increasing.
EventStream thin_and_jitter(const std::vector<TimePs>& pairs, Channel arm, const SourceModel& model);

/// Merges an independent Poisson background of the given rate into the
/// stream. Ties are resolved by shifting the later-inserted event +1 ps.
EventStream merge_background(const EventStream& stream, double rate_hz, const SourceModel& model);

/// Non-paralyzable dead-time: an event is kept iff it falls at least
/// deadtime_ps after the previous *kept* event; dropped events do not
/// extend the blind interval.
EventStream apply_dead_time(const EventStream& stream, TimePs deadtime_ps);

struct ArmStreams {
    EventStream signal;
    EventStream herald;
};

/// Full detection pipeline in the fixed order
/// thin -> jitter -> merge background -> dead-time for both arms.
ArmStreams simulate_streams(const SourceModel& model);

} // namespace heraldsim
