#pragma once

// Over-the-air equalization: CIR tap cost (intensity ratio inside a target
// tap window) and the greedy bit-flip optimizer over 1-bit RIS
// configurations, with a cached per-frequency interaction-matrix pipeline.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "physfad/cdf.hpp"
#include "physfad/channel.hpp"
#include "physfad/common.hpp"
#include "physfad/rng.hpp"
#include "physfad/timedomain.hpp"
#include "physfad/types.hpp"

namespace physfad {

struct TapWindow {
    double t0 = 0.0;       // target tap center
    double delta_t = 1.0;  // tap width

    bool contains(double t) const {
        return t >= t0 - delta_t / 2.0 && t <= t0 + delta_t / 2.0;
    }
};

// C = sum_{t in window} h^2(t) / sum_t h^2(t) (the uniform grid weight
// cancels); samples whose centers fall inside the window count.
inline double cost(const Cir& cir, const TapWindow& window) {
    if (!(window.delta_t > 0.0))
        throw std::invalid_argument("cost: tap width must be > 0");
    if (window.t0 - window.delta_t / 2.0 < 0.0 ||
        window.t0 + window.delta_t / 2.0 > cir.unambiguous_range)
        throw std::invalid_argument("cost: tap window outside the CIR range");
    double inside = 0.0, total = 0.0;
    for (std::size_t i = 0; i < cir.samples.size(); ++i) {
        const double e = cir.samples[i] * cir.samples[i];
        total += e;
        if (window.contains(cir.time(i))) inside += e;
    }
    if (total == 0.0)
        throw std::invalid_argument("cost: all-zero CIR, cost undefined");
    return inside / total;
}

// SISO channel -> CIR pipeline with per-frequency caching of everything that
// does not depend on the RIS configuration. Only the RIS diagonal entries of
// W change between candidate configurations, and the cached path writes the
// exact same values a fresh assemble_w would, so results are bit-identical
// to the naive path.
class CirPipeline {
  public:
    CirPipeline(Scene scene, WindowSpec window, unsigned threads = 1,
                bool cache_base_w = true)
        : scene_(std::move(scene)),
          window_(window),
          threads_(threads),
          cache_(cache_base_w) {
        if (scene_.num_tx() != 1 || scene_.num_rx() != 1)
            throw std::invalid_argument("CirPipeline: SISO scene required");
        if (cache_) {
            const auto& grid = scene_.frequency_grid();
            base_w_.resize(grid.size());
            const RisConfiguration neutral =
                RisConfiguration::all(1.0, scene_.num_ris());
            parallel_for_index(grid.size(), threads_, [&](std::size_t fi) {
                base_w_[fi] = assemble_w(scene_, neutral, grid[fi]).entries;
            });
        }
    }

    const Scene& scene() const { return scene_; }
    const WindowSpec& window() const { return window_; }

    std::vector<Complex> spectrum(const RisConfiguration& ris) const {
        const auto& grid = scene_.frequency_grid();
        std::vector<Complex> h(grid.size());
        parallel_for_index(grid.size(), threads_, [&](std::size_t fi) {
            InteractionMatrix w;
            w.frequency = grid[fi];
            if (cache_) {
                w.entries = base_w_[fi];
                for (std::size_t s = 0; s < scene_.num_ris(); ++s) {
                    const std::size_t i = scene_.ris_index(s);
                    w.entries(i, i) =
                        1.0 / polarizability_at(scene_.dipoles()[i].params,
                                                grid[fi], ris.states[s]);
                }
            } else {
                w = assemble_w(scene_, ris, grid[fi]);
            }
            h[fi] = channel_matrix_from_w(scene_, w)(0, 0);
        });
        return h;
    }

    Cir cir(const RisConfiguration& ris) const {
        return cir_from_spectrum(spectrum(ris), scene_.frequency_grid(),
                                 window_);
    }

    double evaluate(const RisConfiguration& ris, const TapWindow& tap) const {
        return cost(cir(ris), tap);
    }

  private:
    Scene scene_;
    WindowSpec window_;
    unsigned threads_;
    bool cache_;
    std::vector<Eigen::MatrixXcd> base_w_;
};

struct OptimizationStep {
    std::size_t flip_index = 0;
    double cost_before = 0.0;
    double cost_after = 0.0;
    bool accepted = false;
};

struct OptimizationTrace {
    std::vector<double> initial_costs;  // the random-configuration stage
    std::size_t best_initial = 0;
    std::vector<OptimizationStep> steps;
    double final_cost = 0.0;
};

struct OptimizationResult {
    std::vector<bool> configuration;  // true = ON state
    OptimizationTrace trace;
};

// Greedy binary search: pick the best of n_random random configurations, then
// cycle element-by-element for n_passes rounds, keeping a flip only when the
// cost strictly increases.
inline OptimizationResult optimize_ris(const CirPipeline& pipeline,
                                       const TapWindow& tap,
                                       const RisAlphabet& alphabet,
                                       std::size_t n_random = 50,
                                       std::size_t n_passes = 5,
                                       std::uint64_t seed = 0) {
    const std::size_t n_ris = pipeline.scene().num_ris();
    if (n_random < 1)
        throw std::invalid_argument("optimize_ris: n_random must be >= 1");
    rng::Stream stream(seed);
    OptimizationResult result;
    OptimizationTrace& trace = result.trace;

    std::vector<std::vector<bool>> candidates(n_random);
    for (auto& bits : candidates) {
        bits.resize(n_ris);
        for (std::size_t i = 0; i < n_ris; ++i) bits[i] = stream.bit();
    }
    trace.initial_costs.resize(n_random);
    double best_cost = -1.0;
    for (std::size_t c = 0; c < n_random; ++c) {
        trace.initial_costs[c] = pipeline.evaluate(
            RisConfiguration::from_bits(candidates[c], alphabet), tap);
        if (trace.initial_costs[c] > best_cost) {
            best_cost = trace.initial_costs[c];
            trace.best_initial = c;
        }
    }
    std::vector<bool> current = candidates[trace.best_initial];
    double current_cost = best_cost;

    const std::size_t n_iter = n_passes * n_ris;
    for (std::size_t i = 1; i <= n_iter; ++i) {
        const std::size_t flip = (i - 1) % n_ris;  // 1-based ((i-1) mod N)+1
        std::vector<bool> candidate = current;
        candidate[flip] = !candidate[flip];
        const double candidate_cost = pipeline.evaluate(
            RisConfiguration::from_bits(candidate, alphabet), tap);
        OptimizationStep step{flip, current_cost, candidate_cost, false};
        if (candidate_cost > current_cost) {  // strict: ties rejected
            step.accepted = true;
            current = std::move(candidate);
            current_cost = candidate_cost;
        }
        trace.steps.push_back(step);
    }
    trace.final_cost = current_cost;
    result.configuration = std::move(current);
    return result;
}

enum class TapStrategy { DominantNlos, Los };

struct TapSelection {
    TapWindow window;
    bool degenerate_fallback = false;  // zero ensemble variance everywhere
};

// dominant_nlos: center on the time of maximum per-tap standard deviation of
// h(t) over the random ensemble (the most RIS-controllable tap);
// los: center on t0 = D/c. Tap width defaults to 1/bandwidth.
inline TapSelection select_target_tap(const std::vector<Cir>& ensemble,
                                      TapStrategy strategy, double separation,
                                      double bandwidth) {
    if (ensemble.empty())
        throw std::invalid_argument("select_target_tap: empty ensemble");
    TapSelection sel;
    sel.window.delta_t = 1.0 / bandwidth;
    if (strategy == TapStrategy::Los) {
        sel.window.t0 = separation;  // c = 1
        return sel;
    }
    const std::size_t m = ensemble.front().samples.size();
    const double n = static_cast<double>(ensemble.size());
    double best_std = 0.0;
    std::size_t best_idx = 0;
    const std::size_t limit = m / 2;  // stay within the causal half
    for (std::size_t i = 0; i < limit; ++i) {
        double mean = 0.0, mean2 = 0.0;
        for (const Cir& cir : ensemble) {
            mean += cir.samples[i];
            mean2 += cir.samples[i] * cir.samples[i];
        }
        mean /= n;
        const double var = std::max(0.0, mean2 / n - mean * mean);
        if (var > best_std) {
            best_std = var;
            best_idx = i;
        }
    }
    if (best_std == 0.0) {
        // identical CIRs: fall back to the global magnitude maximum
        sel.degenerate_fallback = true;
        double best = -1.0;
        for (std::size_t i = 0; i < limit; ++i) {
            const double a = std::abs(ensemble.front().samples[i]);
            if (a > best) {
                best = a;
                best_idx = i;
            }
        }
    }
    sel.window.t0 = ensemble.front().time(best_idx);
    return sel;
}

}  // namespace physfad
