#include "heraldsim/bell.hpp"

#include <cmath>

#include "heraldsim/errors.hpp"
#include "heraldsim/rng.hpp"

namespace heraldsim {

EntangledModel EntangledModel::canonical(double visibility) {
    EntangledModel m;
    m.visibility = visibility;
    m.angle_a = 0.0;
    m.angle_a_prime = M_PI / 4.0;
    m.angle_b = M_PI / 8.0;
    m.angle_b_prime = 3.0 * M_PI / 8.0;
    return m;
}

void EntangledModel::validate() const {
    if (!(visibility >= 0.0 && visibility <= 1.0)) throw ValidationError("EntangledModel: visibility outside [0,1]");
    if (!(heralding_eta >= 0.0 && heralding_eta <= 1.0))
        throw ValidationError("EntangledModel: heralding_eta outside [0,1]");
    if (!(analyzer_transmission >= 0.0 && analyzer_transmission <= 1.0))
        throw ValidationError("EntangledModel: analyzer_transmission outside [0,1]");
    for (double a : {angle_a, angle_a_prime, angle_b, angle_b_prime})
        if (!std::isfinite(a)) throw ValidationError("EntangledModel: non-finite angle");
}

double correlation(double angle_a, double angle_b, const EntangledModel& m) {
    m.validate();
    return m.visibility * std::cos(2.0 * (angle_a - angle_b));
}

double chsh_S(const EntangledModel& m) {
    return correlation(m.angle_a, m.angle_b, m) - correlation(m.angle_a, m.angle_b_prime, m) +
           correlation(m.angle_a_prime, m.angle_b, m) + correlation(m.angle_a_prime, m.angle_b_prime, m);
}

ChshResult simulate_chsh(const EntangledModel& m, double pair_rate_hz, double integration_s_per_setting,
                         std::uint64_t seed) {
    m.validate();
    if (!(pair_rate_hz > 0.0) || !(integration_s_per_setting > 0.0))
        throw ValidationError("simulate_chsh: pair rate and integration time must be > 0");

    const double mean_total = pair_rate_hz * m.heralding_eta * m.analyzer_transmission * m.analyzer_transmission *
                              integration_s_per_setting;
    const double pairs[4][2] = {{m.angle_a, m.angle_b},
                                {m.angle_a, m.angle_b_prime},
                                {m.angle_a_prime, m.angle_b},
                                {m.angle_a_prime, m.angle_b_prime}};
    const double chsh_sign[4] = {+1.0, -1.0, +1.0, +1.0};
    const double outcome_sign[4] = {+1.0, -1.0, -1.0, +1.0}; // (++, +-, -+, --)

    RngStream rng(seed);
    ChshResult result;
    double var_S = 0.0;
    for (int s = 0; s < 4; ++s) {
        SettingResult& r = result.settings[static_cast<std::size_t>(s)];
        r.angle_1 = pairs[s][0];
        r.angle_2 = pairs[s][1];
        const double e_true = correlation(r.angle_1, r.angle_2, m);
        std::int64_t total = 0;
        double sum = 0.0;
        for (int o = 0; o < 4; ++o) {
            const double p = 0.25 * (1.0 + outcome_sign[o] * e_true);
            const std::int64_t n = rng.poisson(mean_total * p);
            r.counts[static_cast<std::size_t>(o)] = n;
            total += n;
            sum += outcome_sign[o] * static_cast<double>(n);
        }
        if (total == 0)
            throw ValidationError("simulate_chsh: zero counts in a setting; S error undefined");
        r.e_value = sum / static_cast<double>(total);
        r.sigma_e = std::sqrt(std::max(0.0, 1.0 - r.e_value * r.e_value) / static_cast<double>(total));
        result.S += chsh_sign[s] * r.e_value;
        var_S += r.sigma_e * r.sigma_e;
    }
    result.sigma_S = std::sqrt(var_S);
    return result;
}

} // namespace heraldsim
