#pragma once

// Cylinder Bessel functions J0, Y0 (and the modified function I0) to the
// absolute accuracy required by the interaction-matrix assembly (1e-12 over
// (0, 1e4]). Small and moderate arguments use the ascending power series,
// large arguments the Hankel asymptotic expansion; both are evaluated in
// extended precision so the crossover region keeps full double accuracy.

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "physfad/common.hpp"

namespace physfad::bessel {

namespace detail {

inline constexpr long double kPiL = 3.14159265358979323846264338327950288L;
inline constexpr long double kEulerGammaL = 0.57721566490153286060651209008240243L;
inline constexpr double kSeriesAsymptoticCrossover = 14.0;

struct J0Y0 {
    long double j0;
    long double y0;
};

// Ascending series, x <= crossover. The alternating sums are mildly
// cancellative (max term ~1e4 at x = 14), which long double absorbs.
inline J0Y0 j0_y0_series(long double x) {
    const long double q = 0.25L * x * x;
    long double term = 1.0L;      // (-q)^k / (k!)^2, k = 0
    long double j0 = 1.0L;
    long double h = 0.0L;         // harmonic number H_k
    long double ysum = 0.0L;      // sum (-1)^(k+1) H_k q^k / (k!)^2
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<long double>(k) * k);
        j0 += term;
        h += 1.0L / k;
        ysum -= term * h;  // sign of -term alternates as (-1)^(k+1)
        if (std::abs(term) < 1e-22L * (std::abs(j0) + 1.0L)) break;
    }
    const long double y0 =
        (2.0L / kPiL) * ((std::log(0.5L * x) + kEulerGammaL) * j0 + ysum);
    return {j0, y0};
}

// Hankel asymptotic expansion, x > crossover: H0(2)(x) ~ sqrt(2/(pi x))
// exp(-i(x - pi/4)) * sum (-i)^k a_k / x^k with a_k = -a_{k-1} (2k-1)^2/(8k).
inline J0Y0 j0_y0_asymptotic(long double x) {
    long double a = 1.0L;
    long double re = 1.0L, im = 0.0L;   // sum of (-i)^k a_k / x^k
    long double prev = std::numeric_limits<long double>::max();
    for (int k = 1; k < 60; ++k) {
        a *= -(2.0L * k - 1.0L) * (2.0L * k - 1.0L) / (8.0L * k);
        const long double t = a / std::pow(x, static_cast<long double>(k));
        const long double mag = std::abs(t);
        if (mag >= prev) break;  // divergent tail reached
        prev = mag;
        switch (k & 3) {         // (-i)^k cycle: -i, -1, +i, +1
            case 1: im -= t; break;
            case 2: re -= t; break;
            case 3: im += t; break;
            case 0: re += t; break;
        }
        if (mag < 1e-22L) break;
    }
    const long double phase = x - 0.25L * kPiL;
    const long double c = std::cos(phase), s = std::sin(phase);
    const long double amp = std::sqrt(2.0L / (kPiL * x));
    // H0(2) = (re + i im) * (c - i s) * amp = J0 - i Y0
    return {amp * (re * c + im * s), amp * (re * s - im * c)};
}

inline J0Y0 j0_y0_impl(double x) {
    if (!(x > 0.0))
        throw std::domain_error("bessel: J0/Y0 require x > 0");
    const long double xl = x;
    return x <= kSeriesAsymptoticCrossover ? j0_y0_series(xl)
                                           : j0_y0_asymptotic(xl);
}

}  // namespace detail

// Returns (J0(x), Y0(x)); throws std::domain_error for x <= 0.
inline std::pair<double, double> j0_y0(double x) {
    const auto v = detail::j0_y0_impl(x);
    return {static_cast<double>(v.j0), static_cast<double>(v.y0)};
}

inline double j0(double x) { return j0_y0(x).first; }
inline double y0(double x) { return j0_y0(x).second; }

// Hankel function of the second kind, H0(2)(x) = J0(x) - i Y0(x).
inline Complex hankel2_0(double x) {
    const auto v = detail::j0_y0_impl(x);
    return {static_cast<double>(v.j0), -static_cast<double>(v.y0)};
}

// Exponentially scaled modified Bessel function exp(-x) I0(x), x >= 0.
// Used by the Rician distribution fit.
inline double i0e(double x) {
    if (x < 0.0) throw std::domain_error("bessel: i0e requires x >= 0");
    if (x <= 15.0) {
        const long double q = 0.25L * static_cast<long double>(x) * x;
        long double term = 1.0L, sum = 1.0L;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<long double>(k) * k);
            sum += term;
            if (term < 1e-20L * sum) break;
        }
        return static_cast<double>(sum * std::exp(-static_cast<long double>(x)));
    }
    // Asymptotic: I0(x) ~ exp(x)/sqrt(2 pi x) * sum a_k / x^k with
    // a_k = a_{k-1} (2k-1)^2 / (8k).
    long double a = 1.0L, sum = 1.0L;
    long double prev = std::numeric_limits<long double>::max();
    for (int k = 1; k < 40; ++k) {
        a *= (2.0L * k - 1.0L) * (2.0L * k - 1.0L) / (8.0L * k);
        const long double t = a / std::pow(static_cast<long double>(x),
                                           static_cast<long double>(k));
        if (t >= prev) break;
        prev = t;
        sum += t;
        if (t < 1e-20L * sum) break;
    }
    return static_cast<double>(sum / std::sqrt(2.0L * detail::kPiL * x));
}

}  // namespace physfad::bessel
