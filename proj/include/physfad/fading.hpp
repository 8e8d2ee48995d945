#pragma once

// Adjustable Rician fading: stirrer-ensemble channel statistics, K-factor
// estimation, Gaussian/Rician distribution fits with Kolmogorov-Smirnov
// checks, the environment-transparency sweep and the effective rank.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "physfad/bessel.hpp"
#include "physfad/builders.hpp"
#include "physfad/channel.hpp"
#include "physfad/common.hpp"
#include "physfad/types.hpp"

namespace physfad {

// Scene template whose environment contains rotatable stirrers; realization k
// rotates every stirrer by an independent seeded angle.
struct StirredSceneSpec {
    std::vector<Dipole> tx;
    std::vector<Dipole> rx;
    std::vector<Dipole> static_env;
    std::vector<builders::StirrerSpec> stirrers;
    std::vector<Dipole> ris_dipoles;
    std::vector<double> frequency_grid;
    std::uint64_t seed = 0;
};

inline Scene stirred_realization(const StirredSceneSpec& spec,
                                 const std::vector<double>& angles) {
    if (angles.size() != spec.stirrers.size())
        throw std::invalid_argument("stirred_realization: angle count");
    std::vector<Dipole> env = spec.static_env;
    for (std::size_t s = 0; s < spec.stirrers.size(); ++s) {
        const auto dipoles = builders::build_stirrer(spec.stirrers[s], angles[s]);
        env.insert(env.end(), dipoles.begin(), dipoles.end());
    }
    return Scene(spec.tx, spec.rx, std::move(env), spec.ris_dipoles,
                 spec.frequency_grid);
}

// One channel tensor per stirrer realization; deterministic under the seed.
inline std::vector<ChannelTensor> ensemble_channels(
    const StirredSceneSpec& spec, const RisConfiguration& ris,
    std::size_t n_realizations, unsigned threads = 1) {
    if (n_realizations < 1)
        throw std::invalid_argument("ensemble_channels: empty ensemble");
    const auto angles = builders::stirrer_ensemble_angles(
        spec.stirrers.size(), n_realizations, spec.seed);
    std::vector<ChannelTensor> out(n_realizations);
    parallel_for_index(n_realizations, threads, [&](std::size_t k) {
        try {
            out[k] = channel_tensor(stirred_realization(spec, angles[k]), ris);
        } catch (const SolverError& e) {
            throw SolverError("ensemble_channels: realization " +
                                  std::to_string(k) + ": " + e.what(),
                              e.condition_estimate);
        }
        out[k].realization = k;
    });
    return out;
}

// Interpretation of sigma in K = |mu|^2 / (2 sigma^2). PerQuadrature
// (sigma^2 = E|H-mu|^2 / 2) matches the standard Rician K = nu^2/(2 sigma^2)
// and is the default; Total takes sigma as the full complex std deviation.
enum class SigmaConvention { PerQuadrature, Total };

struct KFactorEstimate {
    Complex mu{0.0, 0.0};
    double sigma = 0.0;
    double k = 0.0;
    double k_db = 0.0;
    bool undefined = false;  // sigma == 0: free-space limit, K -> infinity
};

inline KFactorEstimate estimate_k_factor(
    const std::vector<Complex>& samples,
    SigmaConvention convention = SigmaConvention::PerQuadrature) {
    if (samples.size() < 2)
        throw std::invalid_argument("estimate_k_factor: need >= 2 samples");
    Complex mu(0.0);
    for (const Complex& s : samples) mu += s;
    mu /= static_cast<double>(samples.size());
    double var = 0.0;
    for (const Complex& s : samples) var += std::norm(s - mu);
    var /= static_cast<double>(samples.size());
    if (convention == SigmaConvention::PerQuadrature) var *= 0.5;
    KFactorEstimate est;
    est.mu = mu;
    est.sigma = std::sqrt(var);
    if (var == 0.0) {
        est.undefined = true;
        est.k = std::numeric_limits<double>::infinity();
        est.k_db = std::numeric_limits<double>::infinity();
        return est;
    }
    est.k = std::norm(mu) / (2.0 * var);
    est.k_db = 10.0 * std::log10(est.k);
    return est;
}

// --- distribution fits -----------------------------------------------------

inline double normal_cdf(double x, double mean, double stddev) {
    return 0.5 * std::erfc(-(x - mean) / (stddev * std::sqrt(2.0)));
}

// Kolmogorov-Smirnov statistic against a CDF, plus the asymptotic p-value.
struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

inline double ks_p_value(std::size_t n, double d) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        p += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

inline KsResult ks_test(std::vector<double> samples,
                        const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double c = cdf(samples[i]);
        d = std::max(d, std::abs(c - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
    }
    return {d, ks_p_value(samples.size(), d)};
}

struct GaussianFit {
    double mean = 0.0;
    double variance = 0.0;
    KsResult ks;
};

struct RicianFit {
    double nu = 0.0;       // line-of-sight amplitude
    double sigma_g = 0.0;  // per-quadrature scale
    KsResult ks;
};

// CDF of the Rician magnitude distribution by cumulative integration of the
// density u/sigma^2 exp(-(u-nu)^2/(2 sigma^2)) i0e(u nu / sigma^2).
inline double rician_cdf(double x, double nu, double sigma_g,
                         std::size_t steps = 2000) {
    if (x <= 0.0) return 0.0;
    if (!(sigma_g > 0.0)) return x >= nu ? 1.0 : 0.0;
    const double s2 = sigma_g * sigma_g;
    auto pdf = [&](double u) {
        return u / s2 * std::exp(-(u - nu) * (u - nu) / (2.0 * s2)) *
               bessel::i0e(u * nu / s2);
    };
    const double h = x / static_cast<double>(steps);
    double acc = 0.5 * (pdf(0.0) + pdf(x));
    for (std::size_t i = 1; i < steps; ++i)
        acc += pdf(static_cast<double>(i) * h);
    return std::min(1.0, acc * h);
}

struct DistributionFitReport {
    GaussianFit real_part;
    GaussianFit imag_part;
    RicianFit magnitude;
    bool degenerate = false;  // zero variance, fits are meaningless
};

inline DistributionFitReport fit_distributions(
    const std::vector<Complex>& samples) {
    if (samples.size() < 100)
        throw std::invalid_argument("fit_distributions: need >= 100 samples");
    DistributionFitReport report;
    const double n = static_cast<double>(samples.size());

    auto gaussian_fit = [&](auto extract) {
        GaussianFit fit;
        std::vector<double> xs;
        xs.reserve(samples.size());
        for (const Complex& s : samples) xs.push_back(extract(s));
        for (double x : xs) fit.mean += x;
        fit.mean /= n;
        for (double x : xs) fit.variance += (x - fit.mean) * (x - fit.mean);
        fit.variance /= n;
        if (fit.variance > 0.0) {
            const double sd = std::sqrt(fit.variance);
            const double mean = fit.mean;
            fit.ks = ks_test(xs, [mean, sd](double x) {
                return normal_cdf(x, mean, sd);
            });
        }
        return fit;
    };
    report.real_part = gaussian_fit([](Complex s) { return s.real(); });
    report.imag_part = gaussian_fit([](Complex s) { return s.imag(); });
    if (report.real_part.variance == 0.0 && report.imag_part.variance == 0.0) {
        report.degenerate = true;
        return report;
    }

    // Rician moment matching from the 2nd and 4th magnitude moments:
    // m2 = nu^2 + 2 sigma^2, m4 = nu^4 + 8 sigma^2 nu^2 + 8 sigma^4
    // => nu^4 = 2 m2^2 - m4.
    double m2 = 0.0, m4 = 0.0;
    std::vector<double> mags;
    mags.reserve(samples.size());
    for (const Complex& s : samples) {
        const double a2 = std::norm(s);
        m2 += a2;
        m4 += a2 * a2;
        mags.push_back(std::sqrt(a2));
    }
    m2 /= n;
    m4 /= n;
    RicianFit& ric = report.magnitude;
    ric.nu = std::pow(std::max(0.0, 2.0 * m2 * m2 - m4), 0.25);
    ric.sigma_g = std::sqrt(std::max(0.0, m2 - ric.nu * ric.nu) / 2.0);
    if (ric.sigma_g > 0.0) {
        const double nu = ric.nu, sg = ric.sigma_g;
        ric.ks = ks_test(mags, [nu, sg](double x) {
            return rician_cdf(x, nu, sg);
        });
    } else {
        report.degenerate = true;
    }
    return report;
}

// exp(Shannon entropy of the normalized singular-value distribution);
// 1 <= R_eff <= min(rows, cols) for any nonzero matrix.
inline double effective_rank(const Eigen::MatrixXcd& h) {
    if (h.size() == 0 || h.norm() == 0.0)
        throw std::invalid_argument("effective_rank: zero matrix");
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h);
    const Eigen::VectorXd s = svd.singularValues();
    const double total = s.sum();
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double q = s(i) / total;
        if (q > 0.0) entropy -= q * std::log(q);
    }
    return std::exp(entropy);
}

// --- transparency sweep ----------------------------------------------------

struct EnsembleStatistics {
    double f_res_env = 0.0;
    double frequency = 0.0;
    // per (rx, tx) channel coefficient, row-major
    std::vector<KFactorEstimate> per_channel;
    double mean_k_db = 0.0;        // over channels with defined K
    double mean_effective_rank = 0.0;
    // raw realizations of channel (0, 0), kept for distribution fits
    std::vector<Complex> samples_channel00;
};

// Sweeps the scattering environment's resonance frequency and gathers
// per-channel ensemble statistics at one evaluation frequency.
inline std::vector<EnsembleStatistics> transparency_sweep(
    const StirredSceneSpec& base, const std::vector<double>& f_res_values,
    std::size_t n_realizations, double eval_frequency, unsigned threads = 1,
    SigmaConvention convention = SigmaConvention::PerQuadrature) {
    for (std::size_t i = 0; i + 1 < f_res_values.size(); ++i)
        if (!(f_res_values[i] < f_res_values[i + 1]))
            throw std::invalid_argument(
                "transparency_sweep: f_res values must be strictly increasing");
    const std::size_t n_rx = base.rx.size(), n_tx = base.tx.size();
    const std::size_t n_sweep = f_res_values.size();
    const auto angles = builders::stirrer_ensemble_angles(
        base.stirrers.size(), n_realizations, base.seed);
    StirredSceneSpec spec = base;
    spec.frequency_grid = {eval_frequency};

    // The sweep only retunes environment resonances, which live on the
    // diagonal of W; assemble the Green's couplings once per realization and
    // patch the environment diagonal for each sweep point before re-solving.
    std::vector<std::vector<Eigen::MatrixXcd>> hs(
        n_sweep, std::vector<Eigen::MatrixXcd>(n_realizations));
    parallel_for_index(n_realizations, threads, [&](std::size_t k) {
        const Scene scene = stirred_realization(spec, angles[k]);
        InteractionMatrix w =
            assemble_w(scene, RisConfiguration{}, eval_frequency);
        for (std::size_t si = 0; si < n_sweep; ++si) {
            for (std::size_t e = 0; e < scene.num_env(); ++e) {
                const std::size_t i = scene.env_index(e);
                w.entries(i, i) =
                    1.0 / polarizability_at(scene.dipoles()[i].params,
                                            eval_frequency, f_res_values[si]);
            }
            hs[si][k] = channel_matrix_from_w(scene, w);
        }
    });

    std::vector<EnsembleStatistics> out;
    out.reserve(n_sweep);
    for (std::size_t si = 0; si < n_sweep; ++si) {
        const double f_res = f_res_values[si];
        EnsembleStatistics stats;
        stats.f_res_env = f_res;
        stats.frequency = eval_frequency;
        stats.per_channel.reserve(n_rx * n_tx);
        double k_db_sum = 0.0;
        std::size_t k_db_count = 0;
        std::vector<Complex> samples(n_realizations);
        for (std::size_t r = 0; r < n_rx; ++r)
            for (std::size_t t = 0; t < n_tx; ++t) {
                for (std::size_t k = 0; k < n_realizations; ++k)
                    samples[k] = hs[si][k](r, t);
                auto est = estimate_k_factor(samples, convention);
                if (!est.undefined) {
                    k_db_sum += est.k_db;
                    ++k_db_count;
                }
                if (r == 0 && t == 0) stats.samples_channel00 = samples;
                stats.per_channel.push_back(std::move(est));
            }
        stats.mean_k_db = k_db_count > 0
                              ? k_db_sum / static_cast<double>(k_db_count)
                              : std::numeric_limits<double>::infinity();
        double r_eff = 0.0;
        for (const auto& h : hs[si]) r_eff += effective_rank(h);
        stats.mean_effective_rank = r_eff / static_cast<double>(n_realizations);
        out.push_back(std::move(stats));
    }
    return out;
}

}  // namespace physfad
