#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "physfad/common.hpp"

namespace physfad {

// Lorentzian polarizability parameters. Radiation damping is not stored:
// it is derived as gammaR = chi^2 k^2 / (4 eps delta), which saturates the
// passivity bound Im(1/alpha) >= k^2/(4 eps delta) when gamma_abs = 0.
struct PolarizabilityParams {
    double chi_squared = 0.25;            // chi^2, amplitude of alpha
    double f_res = 1.0;                   // resonance frequency
    double gamma_abs = 0.0;               // absorptive damping GammaL
    double dipole_size = kDefaultDipoleSize;  // delta

    friend bool operator==(const PolarizabilityParams&,
                           const PolarizabilityParams&) = default;
};

enum class Role { Transmitter, Receiver, Environment, RisElement };

struct Dipole {
    Vec2 position;
    PolarizabilityParams params;
    Role role = Role::Environment;
};

// 1-bit default state alphabet: resonant in band vs. parked far above it.
struct RisAlphabet {
    double on = 1.0;
    double off = 5.0;

    friend bool operator==(const RisAlphabet&, const RisAlphabet&) = default;
};

// Resonance-frequency override per RIS element.
struct RisConfiguration {
    std::vector<double> states;

    static RisConfiguration all(double f_res, std::size_t n) {
        return {std::vector<double>(n, f_res)};
    }
    static RisConfiguration from_bits(const std::vector<bool>& bits,
                                      const RisAlphabet& alphabet) {
        RisConfiguration c;
        c.states.reserve(bits.size());
        for (bool b : bits) c.states.push_back(b ? alphabet.on : alphabet.off);
        return c;
    }
};

// Ordered dipole collection in the canonical block order
// [TX, RX, ENV, RIS] plus the uniform frequency grid. Immutable once built;
// safe to share read-only across threads.
class Scene {
  public:
    Scene() = default;
    Scene(std::vector<Dipole> tx, std::vector<Dipole> rx,
          std::vector<Dipole> env, std::vector<Dipole> ris,
          std::vector<double> frequency_grid)
        : num_tx_(tx.size()),
          num_rx_(rx.size()),
          num_env_(env.size()),
          num_ris_(ris.size()),
          frequency_grid_(std::move(frequency_grid)) {
        dipoles_.reserve(num_tx_ + num_rx_ + num_env_ + num_ris_);
        auto stamp = [this](std::vector<Dipole>& block, Role role) {
            for (auto& d : block) {
                d.role = role;
                dipoles_.push_back(d);
            }
        };
        stamp(tx, Role::Transmitter);
        stamp(rx, Role::Receiver);
        stamp(env, Role::Environment);
        stamp(ris, Role::RisElement);
    }

    const std::vector<Dipole>& dipoles() const { return dipoles_; }
    std::size_t size() const { return dipoles_.size(); }
    std::size_t num_tx() const { return num_tx_; }
    std::size_t num_rx() const { return num_rx_; }
    std::size_t num_env() const { return num_env_; }
    std::size_t num_ris() const { return num_ris_; }

    std::size_t tx_index(std::size_t t) const { return t; }
    std::size_t rx_index(std::size_t r) const { return num_tx_ + r; }
    std::size_t env_index(std::size_t e) const { return num_tx_ + num_rx_ + e; }
    std::size_t ris_index(std::size_t s) const {
        return num_tx_ + num_rx_ + num_env_ + s;
    }

    const std::vector<double>& frequency_grid() const { return frequency_grid_; }

  private:
    std::vector<Dipole> dipoles_;
    std::size_t num_tx_ = 0, num_rx_ = 0, num_env_ = 0, num_ris_ = 0;
    std::vector<double> frequency_grid_;
};

// N_R x N_T channel matrices over the frequency grid (row-major per
// frequency), tagged with the RIS configuration hash and realization index.
struct ChannelTensor {
    std::size_t num_rx = 0;
    std::size_t num_tx = 0;
    std::vector<double> frequency_grid;
    std::vector<Complex> values;  // [freq][rx][tx]
    std::uint64_t config_hash = 0;
    std::uint64_t realization = 0;

    Complex& at(std::size_t fi, std::size_t r, std::size_t t) {
        return values[(fi * num_rx + r) * num_tx + t];
    }
    Complex at(std::size_t fi, std::size_t r, std::size_t t) const {
        return values[(fi * num_rx + r) * num_tx + t];
    }
};

// Real channel impulse response on a uniform time grid starting at t = 0.
struct Cir {
    std::vector<double> samples;
    double time_step = 0.0;           // 1 / (two-sided extended bandwidth)
    double unambiguous_range = 0.0;   // 1 / frequency spacing
    std::string window_kind;

    double time(std::size_t i) const { return static_cast<double>(i) * time_step; }
};

struct SceneViolation {
    std::string message;
    std::vector<std::size_t> dipole_indices;  // empty for grid-level issues
};

// Total function: returns one record per violated invariant.
inline std::vector<SceneViolation> validate_scene(const Scene& scene) {
    std::vector<SceneViolation> out;
    const auto& d = scene.dipoles();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& p = d[i].params;
        if (!(p.chi_squared > 0.0))
            out.push_back({"chi_squared must be > 0", {i}});
        if (!(p.f_res > 0.0))
            out.push_back({"f_res must be > 0", {i}});
        if (p.gamma_abs < 0.0)
            out.push_back({"gamma_abs must be >= 0", {i}});
        if (!(p.dipole_size > 0.0))
            out.push_back({"dipole_size must be > 0", {i}});
        // Half-wavelength bound at the f = 1 reference wavelength (positions
        // are measured in reference wavelengths); the default 0.5 sits at the
        // bound and is allowed.
        else if (p.dipole_size > 0.5)
            out.push_back(
                {"dipole_size must not exceed half the reference wavelength",
                 {i}});
    }
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j)
            if (d[i].position == d[j].position)
                out.push_back({"coincident dipole positions", {i, j}});

    const auto& grid = scene.frequency_grid();
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1])) {
            out.push_back({"frequency grid not strictly increasing", {}});
            break;
        }
    if (grid.size() >= 3) {
        const double df = grid[1] - grid[0];
        for (std::size_t i = 1; i + 1 < grid.size(); ++i)
            if (std::abs((grid[i + 1] - grid[i]) - df) > 1e-9 * std::abs(df)) {
                out.push_back({"frequency grid not uniform", {}});
                break;
            }
    }
    if (!grid.empty() && !(grid.front() > 0.0))
        out.push_back({"frequencies must be positive", {}});
    return out;
}

}  // namespace physfad
