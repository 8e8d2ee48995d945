#pragma once

// End-to-end channel extraction: H[r][t] = alpha_r^{-1} [W^{-1}]_{(NT+r),t},
// computed by solving W X = E for the canonical transmitter excitations.
// H is the field-to-field map; voltage-referenced channels compose with
// field_to_current_voltage.

#include <Eigen/Dense>
#include <cstddef>
#include <cstring>
#include <stdexcept>
#include <string>

#include "physfad/cdf.hpp"
#include "physfad/common.hpp"
#include "physfad/types.hpp"

namespace physfad {

struct TransceiverLoad {
    Complex impedance{1.0, 0.0};
};

inline std::uint64_t ris_config_hash(const RisConfiguration& ris) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double s : ris.states) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(s));
        std::memcpy(&bits, &s, sizeof(bits));
        h = (h ^ bits) * 0x100000001b3ULL;
    }
    return h;
}

// Canonical excitation: unit external field at one transmitter, zero
// elsewhere; one column per transmitter.
inline Eigen::MatrixXcd canonical_excitations(const Scene& scene) {
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(scene.size(), scene.num_tx());
    for (std::size_t t = 0; t < scene.num_tx(); ++t)
        e(scene.tx_index(t), t) = Complex(1.0, 0.0);
    return e;
}

// Extracts H from an already assembled interaction matrix.
inline Eigen::MatrixXcd channel_matrix_from_w(const Scene& scene,
                                              const InteractionMatrix& w) {
    const Eigen::MatrixXcd p =
        solve_dipole_moments(w, canonical_excitations(scene));
    Eigen::MatrixXcd h(scene.num_rx(), scene.num_tx());
    for (std::size_t r = 0; r < scene.num_rx(); ++r) {
        const std::size_t i = scene.rx_index(r);
        const Complex inv_alpha = w.entries(i, i);
        for (std::size_t t = 0; t < scene.num_tx(); ++t)
            h(r, t) = inv_alpha * p(i, t);
    }
    return h;
}

inline Eigen::MatrixXcd channel_matrix(const Scene& scene,
                                       const RisConfiguration& ris, double f) {
    return channel_matrix_from_w(scene, assemble_w(scene, ris, f));
}

// Maps channel_matrix over the full frequency grid. Per-frequency solves are
// independent; results land in grid order regardless of scheduling, so the
// tensor is identical for any thread count.
inline ChannelTensor channel_tensor(const Scene& scene,
                                    const RisConfiguration& ris,
                                    unsigned threads = 1) {
    const auto& grid = scene.frequency_grid();
    ChannelTensor tensor;
    tensor.num_rx = scene.num_rx();
    tensor.num_tx = scene.num_tx();
    tensor.frequency_grid = grid;
    tensor.values.resize(grid.size() * tensor.num_rx * tensor.num_tx);
    tensor.config_hash = ris_config_hash(ris);
    parallel_for_index(grid.size(), threads, [&](std::size_t fi) {
        Eigen::MatrixXcd h;
        try {
            h = channel_matrix(scene, ris, grid[fi]);
        } catch (const SolverError& e) {
            throw SolverError("channel_tensor: f = " +
                                  std::to_string(grid[fi]) + ": " + e.what(),
                              e.condition_estimate);
        }
        for (std::size_t r = 0; r < tensor.num_rx; ++r)
            for (std::size_t t = 0; t < tensor.num_tx; ++t)
                tensor.at(fi, r, t) = h(r, t);
    });
    return tensor;
}

// Eq.-of-motion conversion at a transceiver: I = j w alpha / delta * E_loc,
// V = Z I.
inline std::pair<Complex, Complex> field_to_current_voltage(
    Complex e_loc, const PolarizabilityParams& params, double f,
    const TransceiverLoad& load) {
    if (!(params.dipole_size > 0.0))
        throw std::invalid_argument("field_to_current_voltage: delta > 0");
    const double omega = 2.0 * kPi * f;
    const Complex current = Complex(0.0, omega) * polarizability(params, f) /
                            params.dipole_size * e_loc;
    return {current, load.impedance * current};
}

// External field of a non-invasive point source at r_t:
// E_ext(r_i) = (E0/alpha0) G(r_i, r_t).
inline Eigen::VectorXcd external_field_noninvasive_source(const Scene& scene,
                                                          Vec2 r_t,
                                                          Complex strength,
                                                          double f) {
    Eigen::VectorXcd e(scene.size());
    const auto& d = scene.dipoles();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i].position == r_t)
            throw SingularityError(
                "external_field_noninvasive_source: source on dipole " +
                std::to_string(i));
        e(i) = strength *
               greens_function(d[i].position, r_t, f, d[i].params.dipole_size);
    }
    return e;
}

// Remark-1 single-bounce approximation for a SISO free-space scene:
// E_r ~ (sum_i G_ir alpha_i G_it + G_tr) alpha_t E_ext. Valid only in the
// weak-scattering regime; used as an oracle against the full solve.
inline Complex free_space_approx_channel(const Scene& scene,
                                         const RisConfiguration& ris,
                                         double f) {
    if (scene.num_tx() != 1 || scene.num_rx() != 1 || scene.num_env() != 0)
        throw std::invalid_argument(
            "free_space_approx_channel: requires SISO scene with N_E = 0");
    const auto& d = scene.dipoles();
    const Dipole& tx = d[scene.tx_index(0)];
    const Dipole& rx = d[scene.rx_index(0)];
    const Complex alpha_t = polarizability(tx.params, f);
    Complex sum = greens_function(tx.position, rx.position, f,
                                  coupling_size(tx, rx));
    for (std::size_t s = 0; s < scene.num_ris(); ++s) {
        const Dipole& el = d[scene.ris_index(s)];
        const Complex alpha_i =
            polarizability_at(el.params, f, ris.states[s]);
        sum += greens_function(el.position, rx.position, f,
                               coupling_size(el, rx)) *
               alpha_i *
               greens_function(el.position, tx.position, f,
                               coupling_size(el, tx));
    }
    return sum * alpha_t;
}

}  // namespace physfad
