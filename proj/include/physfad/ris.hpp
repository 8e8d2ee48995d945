#pragma once

// RIS characterization: normal-incidence reflection-coefficient extraction
// from standing-wave fits, and in-situ standard-deviation spectroscopy over
// random configurations.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "physfad/builders.hpp"
#include "physfad/cdf.hpp"
#include "physfad/channel.hpp"
#include "physfad/common.hpp"
#include "physfad/rng.hpp"
#include "physfad/types.hpp"

namespace physfad {

struct ReflectionFit {
    Complex r{0.0, 0.0};
    double residual = 0.0;  // ||model - data|| / ||data||
};

// Least-squares fit of E(x) = A exp(-jkx) + B exp(+jkx) on samples along the
// propagation axis; R = (B/A) referenced to the RIS plane via
// exp(+2jk x_ris). Rejects sample spans below a quarter wavelength.
inline ReflectionFit fit_reflection_coefficient(const std::vector<double>& xs,
                                                const std::vector<Complex>& es,
                                                double f, double x_ris_plane) {
    if (xs.size() != es.size() || xs.size() < 8)
        throw std::invalid_argument(
            "fit_reflection_coefficient: need >= 8 samples");
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    const double wavelength = 1.0 / f;
    if (*hi - *lo < 0.25 * wavelength)
        throw std::invalid_argument(
            "fit_reflection_coefficient: sample span below lambda/4");
    const double k = wavenumber(f);
    Eigen::MatrixXcd basis(xs.size(), 2);
    Eigen::VectorXcd rhs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        basis(i, 0) = std::exp(Complex(0.0, -k * xs[i]));
        basis(i, 1) = std::exp(Complex(0.0, +k * xs[i]));
        rhs(i) = es[i];
    }
    const Eigen::Vector2cd ab =
        basis.colPivHouseholderQr().solve(rhs);
    ReflectionFit fit;
    const double data_norm = rhs.norm();
    fit.residual = data_norm > 0.0
                       ? (basis * ab - rhs).norm() / data_norm
                       : 0.0;
    if (ab(0) == Complex(0.0))
        return fit;  // no incident wave resolved; R defaults to 0
    fit.r = ab(1) / ab(0) * std::exp(Complex(0.0, 2.0 * k * x_ris_plane));
    return fit;
}

struct ReflectionSpectrum {
    std::vector<double> frequencies;
    std::vector<Complex> r_on;
    std::vector<Complex> r_off;
    std::vector<double> delta_phi;  // arg(R_on / R_off), wrapped to (-pi, pi]
    std::vector<double> residual_on;
    std::vector<double> residual_off;
};

// Plane-wave characterization scene: ground plane plus RIS array, no
// transceivers. The wave travels along +x; the RIS plane sits at
// ris_plane_x; fields are sampled on a 64-point line over two wavelengths,
// one wavelength in front of the RIS, at the lateral center.
struct NormalIncidenceSetup {
    Scene scene;
    RisAlphabet alphabet;
    double ris_plane_x = 0.0;
    double lateral_center = 0.0;
    std::size_t n_samples = 64;
};

inline Complex measure_reflection(const NormalIncidenceSetup& setup,
                                  const RisConfiguration& ris, double f,
                                  double* residual = nullptr) {
    const Scene& scene = setup.scene;
    const Eigen::VectorXcd e_ext =
        builders::plane_wave_external_field(scene, {1.0, 0.0}, f);
    const InteractionMatrix w = assemble_w(scene, ris, f);
    const Eigen::VectorXcd p = solve_dipole_moments(w, e_ext);
    const double wavelength = 1.0 / f;
    std::vector<double> xs(setup.n_samples);
    std::vector<Vec2> pts(setup.n_samples);
    const double x_hi = setup.ris_plane_x - wavelength;
    const double x_lo = x_hi - 2.0 * wavelength;
    for (std::size_t i = 0; i < setup.n_samples; ++i) {
        xs[i] = x_lo + (x_hi - x_lo) * static_cast<double>(i) /
                           static_cast<double>(setup.n_samples - 1);
        pts[i] = {xs[i], setup.lateral_center};
    }
    const double k = wavenumber(f);
    const FieldMap map = evaluate_field_map(
        scene, f, p, pts, [k](Vec2 r) {
            return std::exp(Complex(0.0, -k * r.x));
        });
    const ReflectionFit fit =
        fit_reflection_coefficient(xs, map.values, f, setup.ris_plane_x);
    if (residual) *residual = fit.residual;
    return fit.r;
}

// R(f) for the all-ON and all-OFF global states plus their phase difference.
inline ReflectionSpectrum characterize_normal_incidence(
    const NormalIncidenceSetup& setup, const std::vector<double>& frequencies,
    unsigned threads = 1) {
    ReflectionSpectrum out;
    out.frequencies = frequencies;
    const std::size_t n = frequencies.size();
    out.r_on.resize(n);
    out.r_off.resize(n);
    out.delta_phi.resize(n);
    out.residual_on.resize(n);
    out.residual_off.resize(n);
    const std::size_t n_ris = setup.scene.num_ris();
    const RisConfiguration on = RisConfiguration::all(setup.alphabet.on, n_ris);
    const RisConfiguration off =
        RisConfiguration::all(setup.alphabet.off, n_ris);
    parallel_for_index(n, threads, [&](std::size_t i) {
        const double f = frequencies[i];
        out.r_on[i] = measure_reflection(setup, on, f, &out.residual_on[i]);
        out.r_off[i] = measure_reflection(setup, off, f, &out.residual_off[i]);
        out.delta_phi[i] = std::arg(out.r_on[i] / out.r_off[i]);
    });
    return out;
}

// Convenience constructor for the planar characterization geometry: a ground
// fence along x = 0 spanning [-half_width, half_width] and a parallel RIS
// array at x = -standoff.
inline NormalIncidenceSetup make_normal_incidence_setup(
    double half_width, double ground_spacing,
    const PolarizabilityParams& ground_params, std::size_t n_ris,
    double ris_spacing, double standoff,
    const PolarizabilityParams& ris_params, const RisAlphabet& alphabet,
    std::vector<double> frequency_grid) {
    builders::FenceSpec ground;
    ground.polyline = {{0.0, -half_width}, {0.0, half_width}};
    ground.spacing = ground_spacing;
    ground.params = ground_params;
    std::vector<Dipole> env = builders::build_fence(ground);

    builders::RisArraySpec ris_spec;
    // Anchor runs upward so the left normal points toward -x (the source).
    ris_spec.anchors = {{{0.0, -half_width}, {0.0, half_width}}};
    ris_spec.counts = {n_ris};
    ris_spec.spacing = ris_spacing;
    ris_spec.standoff = standoff;
    ris_spec.params = ris_params;
    std::vector<Dipole> ris = builders::build_ris_array(ris_spec, env);

    NormalIncidenceSetup setup{
        Scene({}, {}, std::move(env), std::move(ris), std::move(frequency_grid)),
        alphabet, -standoff, 0.0, 64};
    return setup;
}

struct InSituSigmaSpectrum {
    std::vector<double> frequencies;
    // sigma[placement][frequency]
    std::vector<std::vector<double>> sigma_per_placement;
    std::vector<double> sigma_averaged;
    double peak_frequency = 0.0;  // operational-bandwidth center
};

struct InSituSpec {
    std::vector<Dipole> environment;  // enclosure etc., no transceivers
    std::vector<Dipole> ris;
    std::vector<double> frequency_grid;
    RisAlphabet alphabet;
    PolarizabilityParams transceiver_params{0.25, 1.0, 0.0, 0.5};
    Vec2 region_min{0.0, 0.0};
    Vec2 region_max{1.0, 1.0};
    double min_clearance = 0.3;
    std::size_t n_random_configs = 100;
    std::size_t n_placements = 1;
    std::uint64_t seed = 0;
    std::size_t max_placement_retries = 1000;
};

// Standard deviation of the complex transmission between two transceivers
// across random RIS configurations, per frequency, then averaged over random
// transceiver placements.
inline InSituSigmaSpectrum characterize_in_situ(const InSituSpec& spec,
                                                unsigned threads = 1) {
    if (spec.n_random_configs < 2)
        throw std::invalid_argument("characterize_in_situ: need >= 2 configs");
    rng::Stream root(spec.seed);
    const std::size_t nf = spec.frequency_grid.size();
    InSituSigmaSpectrum out;
    out.frequencies = spec.frequency_grid;
    out.sigma_per_placement.assign(spec.n_placements,
                                   std::vector<double>(nf, 0.0));
    out.sigma_averaged.assign(nf, 0.0);

    auto far_enough = [&](Vec2 p, const std::vector<Dipole>& others) {
        for (const Dipole& d : others)
            if (distance(p, d.position) < spec.min_clearance) return false;
        return true;
    };

    for (std::size_t pl = 0; pl < spec.n_placements; ++pl) {
        rng::Stream placement_rng = root.substream(pl);
        std::vector<Dipole> all_static = spec.environment;
        all_static.insert(all_static.end(), spec.ris.begin(), spec.ris.end());
        Vec2 pos[2];
        for (int t = 0; t < 2; ++t) {
            std::size_t tries = 0;
            for (;;) {
                pos[t] = {placement_rng.uniform(spec.region_min.x,
                                                spec.region_max.x),
                          placement_rng.uniform(spec.region_min.y,
                                                spec.region_max.y)};
                const bool clear =
                    far_enough(pos[t], all_static) &&
                    (t == 0 ||
                     distance(pos[0], pos[1]) >= spec.min_clearance);
                if (clear) break;
                if (++tries >= spec.max_placement_retries)
                    throw std::runtime_error(
                        "characterize_in_situ: could not place transceivers");
            }
        }
        Dipole tx{pos[0], spec.transceiver_params, Role::Transmitter};
        Dipole rx{pos[1], spec.transceiver_params, Role::Receiver};
        Scene scene({tx}, {rx}, spec.environment, spec.ris,
                    spec.frequency_grid);

        // accumulate per-frequency mean and second moment over configs
        std::vector<Complex> sum(nf, Complex(0.0));
        std::vector<double> sum2(nf, 0.0);
        rng::Stream config_rng = root.substream(0x10000 + pl);
        std::vector<RisConfiguration> configs(spec.n_random_configs);
        for (auto& c : configs) {
            std::vector<bool> bits(spec.ris.size());
            for (std::size_t i = 0; i < bits.size(); ++i)
                bits[i] = config_rng.bit();
            c = RisConfiguration::from_bits(bits, spec.alphabet);
        }
        for (const auto& c : configs) {
            const ChannelTensor tensor = channel_tensor(scene, c, threads);
            for (std::size_t fi = 0; fi < nf; ++fi) {
                const Complex h = tensor.at(fi, 0, 0);
                sum[fi] += h;
                sum2[fi] += std::norm(h);
            }
        }
        const double n = static_cast<double>(spec.n_random_configs);
        for (std::size_t fi = 0; fi < nf; ++fi) {
            const Complex mu = sum[fi] / n;
            const double var = std::max(0.0, sum2[fi] / n - std::norm(mu));
            out.sigma_per_placement[pl][fi] = std::sqrt(var);
        }
    }
    for (std::size_t fi = 0; fi < nf; ++fi) {
        double acc = 0.0;
        for (std::size_t pl = 0; pl < spec.n_placements; ++pl)
            acc += out.sigma_per_placement[pl][fi];
        out.sigma_averaged[fi] = acc / static_cast<double>(spec.n_placements);
    }
    const auto peak = std::max_element(out.sigma_averaged.begin(),
                                       out.sigma_averaged.end());
    if (peak != out.sigma_averaged.end())
        out.peak_frequency =
            out.frequencies[static_cast<std::size_t>(
                peak - out.sigma_averaged.begin())];
    return out;
}

}  // namespace physfad
