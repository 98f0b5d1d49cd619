#include "heraldsim/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "heraldsim/errors.hpp"

namespace heraldsim {

GaussianFit fit_gaussian(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 5) throw ValidationError("fit_gaussian: need >= 5 matching points");
    const auto n = static_cast<Eigen::Index>(x.size());

    // seeds: offset from the minimum, center from the maximum, width from moments
    const double c0 = *std::min_element(y.begin(), y.end());
    Eigen::Index imax = 0;
    for (Eigen::Index i = 1; i < n; ++i)
        if (y[static_cast<std::size_t>(i)] > y[static_cast<std::size_t>(imax)]) imax = i;
    const double a0 = y[static_cast<std::size_t>(imax)] - c0;
    const double mu0 = x[static_cast<std::size_t>(imax)];
    double wsum = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wgt = std::max(0.0, y[i] - c0);
        wsum += wgt;
        m2 += wgt * (x[i] - mu0) * (x[i] - mu0);
    }
    double sigma0 = wsum > 0.0 ? std::sqrt(m2 / wsum) : (x.back() - x.front()) / 4.0;
    if (!(sigma0 > 0.0)) sigma0 = (x.back() - x.front()) / 4.0;

    Eigen::Vector4d p(a0, mu0, sigma0, c0);
    double lambda = 1e-3;

    auto chi2_of = [&](const Eigen::Vector4d& q) {
        double chi2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double z = (x[i] - q[1]) / q[2];
            const double r = q[0] * std::exp(-0.5 * z * z) + q[3] - y[i];
            chi2 += r * r;
        }
        return chi2;
    };

    double chi2 = chi2_of(p);
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
        Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double z = (x[i] - p[1]) / p[2];
            const double e = std::exp(-0.5 * z * z);
            const double r = p[0] * e + p[3] - y[i];
            Eigen::Vector4d g;
            g[0] = e;
            g[1] = p[0] * e * z / p[2];
            g[2] = p[0] * e * z * z / p[2];
            g[3] = 1.0;
            jtj += g * g.transpose();
            jtr += g * r;
        }
        const Eigen::Vector4d step =
            (jtj + lambda * Eigen::Matrix4d(jtj.diagonal().asDiagonal())).ldlt().solve(-jtr);
        Eigen::Vector4d trial = p + step;
        trial[2] = std::abs(trial[2]);
        if (!(trial[2] > 0.0)) trial[2] = sigma0;
        const double chi2_trial = chi2_of(trial);
        if (chi2_trial < chi2) {
            const double rel = step.cwiseAbs().maxCoeff() / (p.cwiseAbs().maxCoeff() + 1e-300);
            p = trial;
            chi2 = chi2_trial;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < 1e-10) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }

    GaussianFit fit;
    fit.amplitude = p[0];
    fit.center = p[1];
    fit.sigma = p[2];
    fit.offset = p[3];
    fit.converged = converged || chi2 <= chi2_of(Eigen::Vector4d(a0, mu0, sigma0, c0));
    return fit;
}

} // namespace heraldsim
