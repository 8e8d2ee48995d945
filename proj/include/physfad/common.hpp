#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

namespace physfad {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
// Arbitrary units: central frequency, permittivity, permeability and wave
// speed are all 1. Positions are in wavelengths at f = 1, so k = 2*pi*f.
inline constexpr double kPermittivity = 1.0;
inline constexpr double kDefaultDipoleSize = 0.5;

inline double wavenumber(double f) { return 2.0 * kPi * f; }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

class SingularityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_estimate(condition_estimate) {}
    double condition_estimate;
};

// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items are
// claimed from a shared counter; callers must write results into
// index-addressed slots so the outcome is independent of scheduling.
template <typename Fn>
void parallel_for_index(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned n = std::min<std::size_t>(threads, count);
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace physfad
