#include "heraldsim/correction.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "heraldsim/errors.hpp"
#include "heraldsim/rng.hpp"

namespace heraldsim {

void WindowParams::validate() const {
    if (tau_w_ps <= 0 || tau_max_ps <= 0) throw ValidationError("WindowParams: windows must be > 0");
    if (tau_max_ps > tau_w_ps) throw ValidationError("WindowParams: tau_max_ps must be <= tau_w_ps");
    if (tau_d_signal_ps < 0 || tau_d_herald_ps < 0) throw ValidationError("WindowParams: negative dead-time");
}

namespace {

double saturated_singles(double product_rate, double tau_d_s) {
    return product_rate / (1.0 + product_rate * tau_d_s);
}

struct CcModel {
    double tau_w_s;
    double tau_eff_s;

    double cc0(double r0, double e1, double e2) const { return r0 * e1 * e2; }

    double accidental_sum(double r0, double e1, double e2) const {
        return tau_w_s * r0 * r0 * e1 * e2 * (1.0 - e1) * (1.0 - e2);
    }

    double saturation(double r0, double e1, double e2) const {
        return -tau_eff_s * r0 * r0 * e1 * e1 * e2 * e2;
    }

    double cc(double r0, double e1, double e2) const {
        return cc0(r0, e1, e2) + accidental_sum(r0, e1, e2) + saturation(r0, e1, e2);
    }

    double d_r0(double r0, double e1, double e2) const {
        return e1 * e2 + 2.0 * tau_w_s * r0 * e1 * e2 * (1.0 - e1) * (1.0 - e2) -
               2.0 * tau_eff_s * r0 * e1 * e1 * e2 * e2;
    }

    double d_e1(double r0, double e1, double e2) const {
        return r0 * e2 + tau_w_s * r0 * r0 * e2 * (1.0 - e2) * (1.0 - 2.0 * e1) -
               2.0 * tau_eff_s * r0 * r0 * e1 * e2 * e2;
    }

    double d_e2(double r0, double e1, double e2) const {
        return r0 * e1 + tau_w_s * r0 * r0 * e1 * (1.0 - e1) * (1.0 - 2.0 * e2) -
               2.0 * tau_eff_s * r0 * r0 * e1 * e1 * e2;
    }
};

void check_efficiency(double eta, const char* name) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError(std::string("correction: ") + name + " outside [0,1]");
}

} // namespace

double forward_singles(double pair_rate_hz, double eta, TimePs tau_d_ps) {
    if (!(pair_rate_hz >= 0.0) || !std::isfinite(pair_rate_hz))
        throw ValidationError("forward_singles: pair rate must be finite and >= 0");
    check_efficiency(eta, "eta");
    if (tau_d_ps < 0) throw ValidationError("forward_singles: negative dead-time");
    const double product = pair_rate_hz * eta;
    const double load = product * ps_to_s(tau_d_ps);
    if (load >= kSaturationCap)
        throw ValidationError("forward_singles: R0*eta*tau_d = " + std::to_string(load) +
                              " outside model validity (cap 0.5)");
    return saturated_singles(product, ps_to_s(tau_d_ps));
}

AccidentalTerms accidental_rate(double pair_rate_hz, double eta1, double eta2, const WindowParams& w) {
    w.validate();
    check_efficiency(eta1, "eta1");
    check_efficiency(eta2, "eta2");
    CcModel m{ps_to_s(w.tau_w_ps), ps_to_s(w.effective_saturation_ps())};
    AccidentalTerms t;
    t.r10_hz = 0.5 * m.accidental_sum(pair_rate_hz, eta1, eta2);
    t.r01_hz = t.r10_hz;
    t.r11_hz = m.saturation(pair_rate_hz, eta1, eta2);
    return t;
}

double forward_cc(double pair_rate_hz, double eta1, double eta2, const WindowParams& w) {
    w.validate();
    check_efficiency(eta1, "eta1");
    check_efficiency(eta2, "eta2");
    if (!(pair_rate_hz >= 0.0) || !std::isfinite(pair_rate_hz))
        throw ValidationError("forward_cc: pair rate must be finite and >= 0");
    const double load = pair_rate_hz * ps_to_s(w.tau_w_ps);
    if (load >= kSaturationCap)
        throw ValidationError("forward_cc: R0*tau_w = " + std::to_string(load) + " outside model validity (cap 0.5)");
    CcModel m{ps_to_s(w.tau_w_ps), ps_to_s(w.effective_saturation_ps())};
    return m.cc(pair_rate_hz, eta1, eta2);
}

namespace {

struct InverseProblem {
    double s1, s2, cc;       // measured rates
    double td1_s, td2_s;     // singles dead-times
    CcModel model;
    double tau_w_s;

    bool in_domain(const Eigen::Vector3d& x) const {
        const double r0 = x[0], e1 = x[1], e2 = x[2];
        if (!(r0 > 0.0) || !(e1 > 0.0) || !(e2 > 0.0)) return false;
        if (e1 > 1.5 || e2 > 1.5) return false; // generous during iteration; final check is strict
        if (r0 * tau_w_s >= kSaturationCap) return false;
        if (r0 * e1 * td1_s >= kSaturationCap || r0 * e2 * td2_s >= kSaturationCap) return false;
        return true;
    }

    /// Residuals scaled by the measured rates (relative residuals).
    Eigen::Vector3d residual(const Eigen::Vector3d& x) const {
        const double r0 = x[0], e1 = x[1], e2 = x[2];
        Eigen::Vector3d f;
        f[0] = (saturated_singles(r0 * e1, td1_s) - s1) / s1;
        f[1] = (saturated_singles(r0 * e2, td2_s) - s2) / s2;
        f[2] = (model.cc(r0, e1, e2) - cc) / cc;
        return f;
    }

    Eigen::Matrix3d jacobian(const Eigen::Vector3d& x) const {
        const double r0 = x[0], e1 = x[1], e2 = x[2];
        const double g1 = 1.0 / std::pow(1.0 + r0 * e1 * td1_s, 2); // d saturated / d product
        const double g2 = 1.0 / std::pow(1.0 + r0 * e2 * td2_s, 2);
        Eigen::Matrix3d j;
        j(0, 0) = e1 * g1 / s1;
        j(0, 1) = r0 * g1 / s1;
        j(0, 2) = 0.0;
        j(1, 0) = e2 * g2 / s2;
        j(1, 1) = 0.0;
        j(1, 2) = r0 * g2 / s2;
        j(2, 0) = model.d_r0(r0, e1, e2) / cc;
        j(2, 1) = model.d_e1(r0, e1, e2) / cc;
        j(2, 2) = model.d_e2(r0, e1, e2) / cc;
        return j;
    }
};

Eigen::Vector3d newton_solve(const InverseProblem& p, const Eigen::Vector3d& seed, const SolveOptions& opts) {
    Eigen::Vector3d x = seed;
    if (!p.in_domain(x)) throw ValidationError("solve_inverse: zeroth-order seed outside model validity");
    Eigen::Vector3d f = p.residual(x);
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        if (f.cwiseAbs().maxCoeff() < opts.tolerance) return x;
        const Eigen::Vector3d step = p.jacobian(x).partialPivLu().solve(-f);
        double lambda = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 40; ++halvings) {
            const Eigen::Vector3d trial = x + lambda * step;
            if (p.in_domain(trial)) {
                const Eigen::Vector3d ft = p.residual(trial);
                if (ft.norm() < f.norm() || ft.cwiseAbs().maxCoeff() < opts.tolerance) {
                    x = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!accepted) throw ConvergenceError("solve_inverse: damped Newton step rejected (inconsistent inputs?)");
    }
    if (f.cwiseAbs().maxCoeff() < opts.tolerance) return x;
    throw ConvergenceError("solve_inverse: no convergence after " + std::to_string(opts.max_iterations) +
                           " iterations (residual " + std::to_string(f.cwiseAbs().maxCoeff()) + ")");
}

InverseProblem make_problem(const CountsSummary& measured, const WindowParams& w) {
    w.validate();
    if (!(measured.singles_signal_hz > 0.0) || !(measured.singles_herald_hz > 0.0) ||
        !(measured.coincidences_hz > 0.0))
        throw ValidationError("solve_inverse: all measured rates must be > 0");
    if (measured.coincidences_hz > std::min(measured.singles_signal_hz, measured.singles_herald_hz))
        throw ValidationError("solve_inverse: coincidence rate exceeds a singles rate");
    InverseProblem p{measured.singles_signal_hz,
                     measured.singles_herald_hz,
                     measured.coincidences_hz,
                     ps_to_s(w.tau_d_signal_ps),
                     ps_to_s(w.tau_d_herald_ps),
                     CcModel{ps_to_s(w.tau_w_ps), ps_to_s(w.effective_saturation_ps())},
                     ps_to_s(w.tau_w_ps)};
    return p;
}

Eigen::Vector3d solve_values(const CountsSummary& measured, const WindowParams& w, const SolveOptions& opts) {
    const InverseProblem p = make_problem(measured, w);
    const Eigen::Vector3d seed(p.s1 * p.s2 / p.cc, p.cc / p.s2, p.cc / p.s1);
    const Eigen::Vector3d x = newton_solve(p, seed, opts);
    if (!(x[1] > 0.0 && x[1] <= 1.0) || !(x[2] > 0.0 && x[2] <= 1.0))
        throw ValidationError("solve_inverse: solved efficiency outside (0,1] (model violation, e.g. "
                              "background-dominated data)");
    return x;
}

} // namespace

CorrectedEstimate solve_inverse(const CountsSummary& measured, const WindowParams& w, const SolveOptions& opts) {
    const Eigen::Vector3d x = solve_values(measured, w, opts);
    CorrectedEstimate est;
    est.pair_rate_hz = x[0];
    est.eta_signal = x[1];
    est.eta_herald = x[2];
    return est;
}

namespace {

CountsSummary with_rates(const CountsSummary& base, double s1, double s2, double cc) {
    CountsSummary m = base;
    m.singles_signal_hz = s1;
    m.singles_herald_hz = s2;
    m.coincidences_hz = cc;
    return m;
}

} // namespace

Eigen::Matrix3d solver_jacobian(const CountsSummary& measured, const WindowParams& w) {
    if (!(measured.duration_s > 0.0)) throw ValidationError("solver_jacobian: duration_s must be > 0");
    const double rates[3] = {measured.singles_signal_hz, measured.singles_herald_hz, measured.coincidences_hz};
    Eigen::Matrix3d j;
    for (int k = 0; k < 3; ++k) {
        const double sigma = std::sqrt(rates[k] / measured.duration_s); // sqrt(N)/T
        const double h = sigma / 100.0;
        double up[3] = {rates[0], rates[1], rates[2]};
        double dn[3] = {rates[0], rates[1], rates[2]};
        up[k] += h;
        dn[k] -= h;
        const Eigen::Vector3d xp = solve_values(with_rates(measured, up[0], up[1], up[2]), w, {});
        const Eigen::Vector3d xm = solve_values(with_rates(measured, dn[0], dn[1], dn[2]), w, {});
        j.col(k) = (xp - xm) / (2.0 * h);
    }
    return j;
}

CorrectedEstimate propagate_errors(const CountsSummary& measured, const WindowParams& w, const ErrorOptions& opts) {
    CorrectedEstimate est = solve_inverse(measured, w);
    if (!(measured.duration_s > 0.0)) throw ValidationError("propagate_errors: duration_s must be > 0");
    const double T = measured.duration_s;

    if (opts.mode == ErrorMode::jacobian) {
        const Eigen::Matrix3d j = solver_jacobian(measured, w);
        Eigen::Vector3d var_rates(measured.singles_signal_hz / T, measured.singles_herald_hz / T,
                                  measured.coincidences_hz / T); // sigma^2 = N/T^2
        const Eigen::Matrix3d cov = j * var_rates.asDiagonal() * j.transpose();
        est.sigma_pair_rate = std::sqrt(cov(0, 0));
        est.sigma_eta_signal = std::sqrt(cov(1, 1));
        est.sigma_eta_herald = std::sqrt(cov(2, 2));
        return est;
    }

    // Monte Carlo resampling of the counts
    if (opts.mc_draws < 100) throw ValidationError("propagate_errors: mc_draws must be >= 100");
    RngStream rng(opts.mc_seed);
    std::vector<Eigen::Vector3d> draws;
    draws.reserve(static_cast<std::size_t>(opts.mc_draws));
    int failures = 0;
    for (int d = 0; d < opts.mc_draws; ++d) {
        const double s1 = static_cast<double>(rng.poisson(measured.singles_signal_hz * T)) / T;
        const double s2 = static_cast<double>(rng.poisson(measured.singles_herald_hz * T)) / T;
        const double cc = static_cast<double>(rng.poisson(measured.coincidences_hz * T)) / T;
        try {
            draws.push_back(solve_values(with_rates(measured, s1, s2, cc), w, {}));
        } catch (const std::runtime_error&) {
            ++failures;
        }
    }
    if (draws.size() < static_cast<std::size_t>(opts.mc_draws) * 9 / 10)
        throw ConvergenceError("propagate_errors: more than 10% of Monte Carlo draws failed to solve");
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& x : draws) mean += x;
    mean /= static_cast<double>(draws.size());
    Eigen::Vector3d ss = Eigen::Vector3d::Zero();
    for (const auto& x : draws) ss += (x - mean).cwiseAbs2();
    const Eigen::Vector3d sd = (ss / static_cast<double>(draws.size() - 1)).cwiseSqrt();
    est.sigma_pair_rate = sd[0];
    est.sigma_eta_signal = sd[1];
    est.sigma_eta_herald = sd[2];
    return est;
}

Eigen::Vector3d recovery_sampling_sigmas(const CountsSummary& measured, const WindowParams& w) {
    if (!(measured.duration_s > 0.0)) throw ValidationError("recovery_sampling_sigmas: duration_s must be > 0");
    const double T = measured.duration_s;
    const Eigen::Matrix3d j = solver_jacobian(measured, w);
    const double n1 = measured.singles_signal_hz * T;
    const double n2 = measured.singles_herald_hz * T;
    const double nc = measured.coincidences_hz * T;
    Eigen::Matrix3d cov_counts;
    cov_counts << n1, nc, nc, //
        nc, n2, nc,           //
        nc, nc, nc;
    const Eigen::Matrix3d cov = j * (cov_counts / (T * T)) * j.transpose();
    return cov.diagonal().cwiseSqrt();
}

} // namespace heraldsim
