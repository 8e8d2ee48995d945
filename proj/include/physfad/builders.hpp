#pragma once

// Programmatic construction of canonical geometries: dipole fences,
// enclosures, irregular mode stirrers, RIS arrays and plane-wave excitations.
// All builders are pure and deterministic given (spec, seed).

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "physfad/common.hpp"
#include "physfad/rng.hpp"
#include "physfad/types.hpp"

namespace physfad::builders {

using Polyline = std::vector<Vec2>;

struct FenceSpec {
    Polyline polyline;
    bool closed = false;
    double spacing = 0.25;  // d_w
    PolarizabilityParams params;
};

namespace detail {

inline double polyline_length(const Polyline& pts, bool closed) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        len += distance(pts[i], pts[i + 1]);
    if (closed && pts.size() > 2) len += distance(pts.back(), pts.front());
    return len;
}

// Point at arc length s along the polyline.
inline Vec2 point_at(const Polyline& pts, bool closed, double s) {
    const std::size_t nseg = closed ? pts.size() : pts.size() - 1;
    for (std::size_t i = 0; i < nseg; ++i) {
        const Vec2 a = pts[i];
        const Vec2 b = pts[(i + 1) % pts.size()];
        const double seg = distance(a, b);
        if (s <= seg || i + 1 == nseg) {
            const double u = seg > 0.0 ? s / seg : 0.0;
            return a + u * (b - a);
        }
        s -= seg;
    }
    return pts.back();
}

}  // namespace detail

// Dipoles at uniform arc-length spacing <= d_w along the polyline; endpoints
// included for open polylines, closure point deduplicated for closed ones.
inline std::vector<Dipole> build_fence(const FenceSpec& spec) {
    if (spec.polyline.size() < 2)
        throw std::invalid_argument("build_fence: polyline needs >= 2 vertices");
    if (!(spec.spacing > 0.0))
        throw std::invalid_argument("build_fence: spacing must be > 0");
    const double len = detail::polyline_length(spec.polyline, spec.closed);
    if (!(len > 0.0))
        throw std::invalid_argument("build_fence: degenerate polyline");
    const auto nseg =
        static_cast<std::size_t>(std::ceil(len / spec.spacing - 1e-12));
    const double step = len / static_cast<double>(nseg);
    const std::size_t count = spec.closed ? nseg : nseg + 1;
    std::vector<Dipole> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Dipole d;
        d.position = detail::point_at(spec.polyline, spec.closed,
                                      static_cast<double>(i) * step);
        d.params = spec.params;
        d.role = Role::Environment;
        out.push_back(d);
    }
    return out;
}

// Fence along a closed outline; the interior stays empty for transceivers
// and RIS elements.
inline std::vector<Dipole> build_enclosure(const Polyline& outline, double d_w,
                                           const PolarizabilityParams& params) {
    if (outline.size() < 3)
        throw std::invalid_argument("build_enclosure: outline not closed");
    FenceSpec spec{outline, true, d_w, params};
    return build_fence(spec);
}

// Irregular rotatable scatterer: a closed polyline fence rotated rigidly
// about its centroid.
struct StirrerSpec {
    Vec2 centroid;
    Polyline shape;  // vertices relative to the centroid
    double spacing = 0.25;
    PolarizabilityParams params;
};

// Seeded random star polygon (radius jitter around a nominal radius).
inline StirrerSpec make_star_stirrer(Vec2 centroid, double radius,
                                     std::size_t n_vertices, double jitter,
                                     std::uint64_t shape_seed,
                                     double spacing,
                                     const PolarizabilityParams& params) {
    if (n_vertices < 3)
        throw std::invalid_argument("make_star_stirrer: need >= 3 vertices");
    rng::Stream stream(shape_seed);
    StirrerSpec spec;
    spec.centroid = centroid;
    spec.spacing = spacing;
    spec.params = params;
    spec.shape.reserve(n_vertices);
    for (std::size_t m = 0; m < n_vertices; ++m) {
        const double phi =
            2.0 * kPi * static_cast<double>(m) / static_cast<double>(n_vertices);
        const double r = radius * (1.0 + jitter * stream.uniform(-1.0, 1.0));
        spec.shape.push_back({r * std::cos(phi), r * std::sin(phi)});
    }
    return spec;
}

inline std::vector<Dipole> build_stirrer(const StirrerSpec& spec,
                                         double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Polyline rotated;
    rotated.reserve(spec.shape.size());
    for (const Vec2& v : spec.shape)
        rotated.push_back(
            {spec.centroid.x + c * v.x - s * v.y,
             spec.centroid.y + s * v.x + c * v.y});
    FenceSpec fence{rotated, true, spec.spacing, spec.params};
    return build_fence(fence);
}

// Independent uniform rotation angle in [0, 2pi) per (realization, stirrer).
// Counter-based substreams make realization k reproducible in isolation.
inline std::vector<std::vector<double>> stirrer_ensemble_angles(
    std::size_t n_stirrers, std::size_t n_realizations, std::uint64_t seed) {
    if (n_realizations < 1)
        throw std::invalid_argument("stirrer_ensemble_angles: n >= 1");
    rng::Stream root(seed);
    std::vector<std::vector<double>> angles(n_realizations);
    for (std::size_t k = 0; k < n_realizations; ++k) {
        rng::Stream realization = root.substream(k);
        angles[k].reserve(n_stirrers);
        for (std::size_t s = 0; s < n_stirrers; ++s)
            angles[k].push_back(realization.substream(s).uniform(0.0, 2.0 * kPi));
    }
    return angles;
}

// RIS elements at uniform spacing along anchor polylines offset by `standoff`
// along the left normal (supports distributed / conformal placement).
// counts[i] elements are centered on anchor i.
struct RisArraySpec {
    std::vector<Polyline> anchors;
    std::vector<std::size_t> counts;
    double spacing = 0.25;
    double standoff = 0.25;
    PolarizabilityParams params;
};

inline std::vector<Dipole> build_ris_array(
    const RisArraySpec& spec, const std::vector<Dipole>& existing = {}) {
    if (spec.anchors.size() != spec.counts.size())
        throw std::invalid_argument("build_ris_array: anchors/counts mismatch");
    std::vector<Dipole> out;
    for (std::size_t a = 0; a < spec.anchors.size(); ++a) {
        const Polyline& line = spec.anchors[a];
        const std::size_t n = spec.counts[a];
        if (n < 1)
            throw std::invalid_argument("build_ris_array: count must be >= 1");
        if (line.size() < 2)
            throw std::invalid_argument("build_ris_array: anchor needs 2 points");
        const double len = detail::polyline_length(line, false);
        const double span = static_cast<double>(n - 1) * spec.spacing;
        if (span > len + 1e-12)
            throw std::invalid_argument(
                "build_ris_array: elements do not fit on anchor");
        const double s0 = 0.5 * (len - span);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = s0 + static_cast<double>(i) * spec.spacing;
            const Vec2 p = detail::point_at(line, false, s);
            // left normal of the local segment
            const Vec2 q = detail::point_at(
                line, false, std::min(s + 1e-6 * std::max(len, 1.0), len));
            Vec2 tangent = q - p;
            const double tn = norm(tangent);
            if (tn == 0.0) tangent = line.back() - line.front();
            const double inv = 1.0 / norm(tangent);
            const Vec2 normal{-tangent.y * inv, tangent.x * inv};
            Dipole d;
            d.position = p + spec.standoff * normal;
            d.params = spec.params;
            d.role = Role::RisElement;
            out.push_back(d);
        }
    }
    for (const Dipole& d : out)
        for (const Dipole& e : existing)
            if (d.position == e.position)
                throw std::invalid_argument(
                    "build_ris_array: element overlaps an existing dipole");
    return out;
}

// E_ext(r_i) = exp(-j k d.r_i) at every dipole (plane wave along unit d).
inline Eigen::VectorXcd plane_wave_external_field(const Scene& scene,
                                                  Vec2 direction, double f) {
    const double n = norm(direction);
    if (std::abs(n - 1.0) > 1e-9)
        throw std::invalid_argument(
            "plane_wave_external_field: direction must be a unit vector");
    const double k = wavenumber(f);
    Eigen::VectorXcd e(scene.size());
    const auto& d = scene.dipoles();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double phase = -k * dot(direction, d[i].position);
        e(i) = Complex(std::cos(phase), std::sin(phase));
    }
    return e;
}

}  // namespace physfad::builders
