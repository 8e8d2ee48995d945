#pragma once

// Coupled-dipole engine: Lorentzian polarizabilities, 2D free-space Green's
// functions, interaction-matrix assembly and the dense linear solve for the
// dipole moments, plus field evaluation anywhere in the plane.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "physfad/bessel.hpp"
#include "physfad/common.hpp"
#include "physfad/types.hpp"

namespace physfad {

// Radiation damping chosen so the passivity bound holds with equality for a
// lossless dipole: gammaR = chi^2 k^2 / (4 eps delta).
inline double radiation_damping(const PolarizabilityParams& p, double f) {
    const double k = wavenumber(f);
    return p.chi_squared * k * k / (4.0 * kPermittivity * p.dipole_size);
}

// Lorentzian polarizability with the resonance frequency overridden (RIS
// state switching).
inline Complex polarizability_at(const PolarizabilityParams& p, double f,
                                 double f_res) {
    const double w_res2 = 4.0 * kPi * kPi * f_res * f_res;
    const double w2 = 4.0 * kPi * kPi * f * f;
    const double damping = radiation_damping(p, f) + 2.0 * kPi * f * p.gamma_abs;
    return p.chi_squared / Complex(w_res2 - w2, damping);
}

inline Complex polarizability(const PolarizabilityParams& p, double f) {
    return polarizability_at(p, f, p.f_res);
}

// 2D free-space Green's function G = -j k^2/(4 eps delta) H0(2)(k |ri - rj|).
inline Complex greens_function(Vec2 ri, Vec2 rj, double f,
                               double delta = kDefaultDipoleSize) {
    const double d = distance(ri, rj);
    if (d == 0.0)
        throw SingularityError("greens_function: coincident points");
    const double k = wavenumber(f);
    const Complex h = bessel::hankel2_0(k * d);
    return Complex(0.0, -1.0) * (k * k / (4.0 * kPermittivity * delta)) * h;
}

// N x N system matrix: inverse polarizabilities on the diagonal, -G_ij off
// the diagonal. Symmetric by construction (couplings use the geometric mean
// of the two dipole sizes, which reduces to delta for uniform scenes).
struct InteractionMatrix {
    Eigen::MatrixXcd entries;
    double frequency = 0.0;
};

inline double coupling_size(const Dipole& a, const Dipole& b) {
    return std::sqrt(a.params.dipole_size * b.params.dipole_size);
}

// Resonance frequency of dipole i under the given RIS configuration.
inline double effective_f_res(const Scene& scene, const RisConfiguration& ris,
                              std::size_t i) {
    const std::size_t ris_start = scene.ris_index(0);
    if (i >= ris_start) return ris.states[i - ris_start];
    return scene.dipoles()[i].params.f_res;
}

inline InteractionMatrix assemble_w(const Scene& scene,
                                    const RisConfiguration& ris, double f) {
    if (ris.states.size() != scene.num_ris())
        throw std::invalid_argument(
            "assemble_w: RIS configuration length mismatch");
    const auto& d = scene.dipoles();
    const std::size_t n = d.size();
    InteractionMatrix w;
    w.frequency = f;
    w.entries.resize(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        w.entries(i, i) =
            1.0 / polarizability_at(d[i].params, f, effective_f_res(scene, ris, i));
        for (std::size_t j = i + 1; j < n; ++j) {
            const Complex g = greens_function(d[i].position, d[j].position, f,
                                              coupling_size(d[i], d[j]));
            w.entries(i, j) = -g;
            w.entries(j, i) = -g;
        }
    }
    return w;
}

// Dense partial-pivot LU solve for the dipole moments, multi-RHS. Never forms
// the explicit inverse. Throws SolverError on singular / rank-deficient W;
// reports (does not fail) when the condition estimate exceeds 1e12.
struct SolveReport {
    double condition_estimate = 0.0;
    bool ill_conditioned = false;
};

inline Eigen::MatrixXcd solve_dipole_moments(const InteractionMatrix& w,
                                             const Eigen::MatrixXcd& e_ext,
                                             SolveReport* report = nullptr) {
    if (e_ext.rows() != w.entries.rows())
        throw std::invalid_argument("solve_dipole_moments: size mismatch");
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(w.entries);
    const double rcond = lu.rcond();
    if (!(rcond > 0.0) || !std::isfinite(rcond))
        throw SolverError("solve_dipole_moments: singular interaction matrix",
                          rcond > 0.0 ? 1.0 / rcond
                                      : std::numeric_limits<double>::infinity());
    const double cond = 1.0 / rcond;
    Eigen::MatrixXcd p = lu.solve(e_ext);
    if (!p.allFinite())
        throw SolverError("solve_dipole_moments: non-finite solution", cond);
    if (report) {
        report->condition_estimate = cond;
        report->ill_conditioned = cond > 1e12;
    }
    return p;
}

inline Eigen::VectorXcd solve_dipole_moments(const InteractionMatrix& w,
                                             const Eigen::VectorXcd& e_ext,
                                             SolveReport* report = nullptr) {
    const Eigen::MatrixXcd rhs = e_ext;
    return solve_dipole_moments(w, rhs, report).col(0);
}

// Total field on a grid: E(r) = E_ext(r) + sum_j G(r, r_j) p_j over all
// dipoles. Grid points may not coincide with dipole positions.
struct FieldMap {
    std::vector<Vec2> points;
    std::vector<Complex> values;
    double frequency = 0.0;
};

inline FieldMap evaluate_field_map(
    const Scene& scene, double f, const Eigen::VectorXcd& moments,
    const std::vector<Vec2>& grid,
    const std::function<Complex(Vec2)>& external_field = nullptr) {
    if (static_cast<std::size_t>(moments.size()) != scene.size())
        throw std::invalid_argument("evaluate_field_map: moment vector size");
    FieldMap map;
    map.frequency = f;
    map.points = grid;
    map.values.reserve(grid.size());
    const auto& d = scene.dipoles();
    for (const Vec2& r : grid) {
        Complex e = external_field ? external_field(r) : Complex(0.0);
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (r == d[j].position)
                throw SingularityError(
                    "evaluate_field_map: grid point (" + std::to_string(r.x) +
                    ", " + std::to_string(r.y) + ") lies on dipole " +
                    std::to_string(j));
            e += greens_function(r, d[j].position, f, d[j].params.dipole_size) *
                 moments(j);
        }
        map.values.push_back(e);
    }
    return map;
}

}  // namespace physfad
