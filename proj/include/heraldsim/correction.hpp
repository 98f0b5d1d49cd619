#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>

#include "heraldsim/coincidence.hpp"
#include "heraldsim/types.hpp"

namespace heraldsim {

/// Windows and dead-times entering the accidental/saturation model.
/// tau_w is the full coincidence window (sum of pulse lengths), tau_max the
/// longer of the two pulse lengths. If an intrinsic dead-time exceeds
/// tau_max, it becomes the effective saturation time instead.
struct WindowParams {
    TimePs tau_w_ps = 1'050'000;
    TimePs tau_max_ps = 1'000'000;
    TimePs tau_d_signal_ps = 50'000;
    TimePs tau_d_herald_ps = 1'000'000;

    TimePs effective_saturation_ps() const {
        return std::max({tau_max_ps, tau_d_signal_ps, tau_d_herald_ps});
    }

    void validate() const;
};

/// Recovered (R0, eta1, eta2) with one-standard-deviation uncertainties.
struct CorrectedEstimate {
    double pair_rate_hz = 0.0;
    double eta_signal = 0.0;
    double eta_herald = 0.0;
    double sigma_pair_rate = 0.0;
    double sigma_eta_signal = 0.0;
    double sigma_eta_herald = 0.0;
};

/// The three accidental/saturation rate terms. r10 and r01 are the
/// pair-accidental gains (identical by symmetry), r11 the saturation loss.
struct AccidentalTerms {
    double r10_hz = 0.0;
    double r01_hz = 0.0;
    double r11_hz = 0.0;
};

/// Model validity cap: inputs with R0*eta*tau_d or R0*tau_w at or beyond
/// this are rejected, the expansion being first order in pair rate.
constexpr double kSaturationCap = 0.5;

/// Detected singles rate under non-paralyzable dead-time saturation:
/// the fixed point S = R0*eta*(1 - S*tau_d), i.e. S = R0*eta/(1 + R0*eta*tau_d).
double forward_singles(double pair_rate_hz, double eta, TimePs tau_d_ps);

/// Accidental gain and saturation loss terms:
///   r10 = r01 = tau_w/2 * R0^2 * eta1*eta2*(1-eta1)*(1-eta2)
///   r11 = -tau_eff * R0^2 * eta1^2 * eta2^2
/// with tau_eff the effective saturation time of w.
AccidentalTerms accidental_rate(double pair_rate_hz, double eta1, double eta2, const WindowParams& w);

/// Observed coincidence rate CC = CC0 + r10 + r01 + r11 with CC0 = R0*eta1*eta2.
/// Algebraically identical to CC0*(1 + tau_w*R0*(1-eta1)*(1-eta2) - tau_eff*R0*eta1*eta2).
double forward_cc(double pair_rate_hz, double eta1, double eta2, const WindowParams& w);

struct SolveOptions {
    int max_iterations = 100;
    double tolerance = 1e-12; // max relative residual
};

/// Inverts the three-equation model for (R0, eta1, eta2) from measured
/// singles and coincidence rates by damped Newton iteration seeded with the
/// zeroth-order ratios R0 = S1*S2/CC, eta1 = CC/S2, eta2 = CC/S1.
/// Uncertainty fields of the result are zero; see propagate_errors.
CorrectedEstimate solve_inverse(const CountsSummary& measured, const WindowParams& w, const SolveOptions& opts = {});

/// d(R0, eta1, eta2)/d(S1, S2, CC) by central finite differences with step
/// sigma/100, sigma being the Poisson error of each measured rate over the
/// summary's duration.
Eigen::Matrix3d solver_jacobian(const CountsSummary& measured, const WindowParams& w);

enum class ErrorMode { jacobian, monte_carlo };

struct ErrorOptions {
    ErrorMode mode = ErrorMode::jacobian;
    int mc_draws = 10'000;
    std::uint64_t mc_seed = 1;
};

/// Solves at the central values and attaches one-standard-deviation
/// uncertainties for independent Poisson errors sigma_N = sqrt(N) on the
/// three measured counts, either through the solver Jacobian or by Monte
/// Carlo resampling of the counts.
CorrectedEstimate propagate_errors(const CountsSummary& measured, const WindowParams& w, const ErrorOptions& opts = {});

/// Per-run sampling standard deviations of (R0, eta1, eta2) for a single
/// simulated or measured run, where the coincidence count is a shared subset
/// of both singles counts: Cov(S1,S2) = Cov(S1,CC) = Cov(S2,CC) = Var(CC).
/// This is the right scale for recovery z-scores; it is smaller than the
/// independent-count uncertainty of propagate_errors.
Eigen::Vector3d recovery_sampling_sigmas(const CountsSummary& measured, const WindowParams& w);

} // namespace heraldsim
