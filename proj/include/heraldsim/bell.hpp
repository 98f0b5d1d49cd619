#pragma once

#include <array>
#include <cstdint>

#include "heraldsim/types.hpp"

namespace heraldsim {

/// Visibility-damped maximally entangled state with four analyzer settings
/// (a, a', b, b'). Losses (heralding efficiency, analyzer transmission)
/// scale counts but not correlations.
struct EntangledModel {
    double visibility = 1.0;
    double angle_a = 0.0;
    double angle_a_prime = 0.0;
    double angle_b = 0.0;
    double angle_b_prime = 0.0;
    double heralding_eta = 1.0;
    double analyzer_transmission = 1.0;

    /// Canonical CHSH settings (0, pi/4, pi/8, 3pi/8).
    static EntangledModel canonical(double visibility);

    void validate() const;
};

/// Polarization correlation E(a, b) = V * cos 2(a - b).
double correlation(double angle_a, double angle_b, const EntangledModel& m);

/// S = E(a,b) - E(a,b') + E(a',b) + E(a',b'); equals 2*sqrt(2)*V at the
/// canonical settings.
double chsh_S(const EntangledModel& m);

/// Counts and correlation estimate for one analyzer setting pair.
struct SettingResult {
    double angle_1 = 0.0;
    double angle_2 = 0.0;
    std::array<std::int64_t, 4> counts{}; // (++, +-, -+, --)
    double e_value = 0.0;
    double sigma_e = 0.0;
};

struct ChshResult {
    double S = 0.0;
    double sigma_S = 0.0;
    std::array<SettingResult, 4> settings{};
};

/// Simulates finite-count CHSH: for each of the four setting pairs, draws
/// the four outcome-combination counts as Poisson variables with means
/// pair_rate * heralding_eta * transmission^2 * T * p(i,j), then computes
/// S and its propagated Poisson error. Throws ValidationError when a
/// setting collects zero total counts (error undefined).
ChshResult simulate_chsh(const EntangledModel& m, double pair_rate_hz, double integration_s_per_setting,
                         std::uint64_t seed);

} // namespace heraldsim
