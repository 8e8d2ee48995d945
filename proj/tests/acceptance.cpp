// Acceptance test driver: `acceptance <criterion 1..8>` runs one criterion,
// prints one PASS/FAIL line per sub-check, and exits nonzero when any
// sub-check fails. Tolerances are pinned inline next to each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "physfad/builders.hpp"
#include "physfad/channel.hpp"
#include "physfad/equalization.hpp"
#include "physfad/fading.hpp"
#include "physfad/io.hpp"
#include "physfad/ris.hpp"
#include "physfad/rng.hpp"
#include "physfad/timedomain.hpp"

using namespace physfad;

namespace {

struct Checker {
    int failures = 0;
    void check(bool ok, const std::string& name, const std::string& detail) {
        std::printf("%s  %s  (%s)\n", ok ? "PASS" : "FAIL", name.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string scene_file(const std::string& name) {
    return std::string(PHYSFAD_SOURCE_DIR) + "/scenes/" + name;
}

// --- criterion 1: closed-form two-dipole oracle ------------------------------

int criterion1() {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    PolarizabilityParams p;
    p.chi_squared = 0.25;
    p.f_res = 10.0;
    std::vector<double> grid(101);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = 0.5 + static_cast<double>(i) / 100.0;
    Scene scene({{{0.0, 0.0}, p, Role::Transmitter}},
                {{{4.0, 0.0}, p, Role::Receiver}}, {}, {}, grid);
    double worst = 0.0;
    for (double f : grid) {
        const Complex h = channel_matrix(scene, RisConfiguration{}, f)(0, 0);
        // analytic inverse of the 2x2 interaction matrix
        const Complex ia = 1.0 / polarizability(p, f);
        const Complex g =
            greens_function({0.0, 0.0}, {4.0, 0.0}, f, p.dipole_size);
        const Complex h_ref = ia * g / (ia * ia - g * g);
        worst = std::max(worst, std::abs(h - h_ref) / std::abs(h_ref));
    }
    const double elapsed = seconds_since(t0);
    c.check(worst <= 1e-10, "criterion1/closed-form-oracle",
            "max relative error " + num(worst) + " <= 1e-10 over 101 points");
    c.check(elapsed < 1.0, "criterion1/runtime",
            num(elapsed) + " s < 1 s");
    return c.failures;
}

// --- criterion 2: passivity over random parameter draws ----------------------

int criterion2() {
    Checker c;
    rng::Stream stream(20240229);
    double worst = 0.0;  // most negative margin observed
    for (int i = 0; i < 1000; ++i) {
        PolarizabilityParams p;
        const double chi = stream.uniform(0.01, 100.0);
        p.chi_squared = chi * chi;
        p.f_res = stream.uniform(0.5, 20.0);
        p.gamma_abs = stream.uniform(0.0, 1.0);
        p.dipole_size = 0.5;
        const double f = stream.uniform(0.5, 1.5);
        const double k = wavenumber(f);
        const Complex inv_alpha = 1.0 / polarizability(p, f);
        const double bound = k * k / (4.0 * kPermittivity * p.dipole_size);
        worst = std::min(worst, inv_alpha.imag() - bound);
    }
    c.check(worst >= -1e-12, "criterion2/passivity",
            "min margin Im(1/alpha) - k^2/(4 eps delta) = " + num(worst) +
                " >= -1e-12 over 1000 draws");
    return c.failures;
}

// --- criterion 3: reciprocity on seeded random scenes -------------------------

int criterion3() {
    Checker c;
    const std::vector<double> freqs = {0.6, 1.0, 1.4};
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        rng::Stream stream(1000 + s);
        const std::size_t n_tx = 2 + s % 3;
        const std::size_t n_rx = 2 + (s / 3) % 3;
        const std::size_t n_env = 40 + 12 * static_cast<std::size_t>(s);
        PolarizabilityParams tp;  // identical transceiver parameters
        tp.chi_squared = 0.25;
        tp.f_res = 1.0;
        PolarizabilityParams ep;
        ep.chi_squared = 25.0;
        ep.f_res = 2.0;
        std::vector<Vec2> points;
        while (points.size() < n_tx + n_rx + n_env) {
            const Vec2 cand{stream.uniform(0.0, 12.0),
                            stream.uniform(0.0, 12.0)};
            bool ok = true;
            for (const Vec2& q : points)
                if (distance(cand, q) < 0.25) ok = false;
            if (ok) points.push_back(cand);
        }
        std::vector<Dipole> tx, rx, env;
        std::size_t idx = 0;
        for (std::size_t i = 0; i < n_tx; ++i)
            tx.push_back({points[idx++], tp, Role::Transmitter});
        for (std::size_t i = 0; i < n_rx; ++i)
            rx.push_back({points[idx++], tp, Role::Receiver});
        for (std::size_t i = 0; i < n_env; ++i)
            env.push_back({points[idx++], ep, Role::Environment});
        Scene fwd(tx, rx, env, {}, freqs);
        // same physical layout with the transceiver roles exchanged
        std::vector<Dipole> tx_swapped, rx_swapped;
        for (const Dipole& d : rx)
            tx_swapped.push_back({d.position, d.params, Role::Transmitter});
        for (const Dipole& d : tx)
            rx_swapped.push_back({d.position, d.params, Role::Receiver});
        Scene bwd(tx_swapped, rx_swapped, env, {}, freqs);
        for (double f : freqs) {
            const Eigen::MatrixXcd h = channel_matrix(fwd, RisConfiguration{}, f);
            const Eigen::MatrixXcd hs =
                channel_matrix(bwd, RisConfiguration{}, f);
            const double rel =
                (h - hs.transpose()).norm() / h.norm();
            worst = std::max(worst, rel);
        }
    }
    c.check(worst <= 1e-10, "criterion3/reciprocity",
            "max ||H - H_swapped^T|| / ||H|| = " + num(worst) +
                " <= 1e-10 over 20 scenes x 3 frequencies");
    return c.failures;
}

// --- criterion 4: RIS characterization numbers --------------------------------

int criterion4() {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    const PolarizabilityParams wall{2500.0, 10.0, 0.0, 0.5};   // chi = 50
    const PolarizabilityParams risp{0.04, 1.0, 0.0, 0.5};      // chi = 0.2
    const RisAlphabet alphabet{1.0, 5.0};  // f_res ON = 1, OFF = 5
    auto setup = make_normal_incidence_setup(
        /*half_width=*/2.0, /*ground_spacing=*/0.25, wall,
        /*n_ris=*/14, /*ris_spacing=*/0.25, /*standoff=*/0.25, risp, alphabet,
        {1.0});
    const ReflectionSpectrum spec =
        characterize_normal_incidence(setup, {1.0});
    const double abs_off = std::abs(spec.r_off[0]);
    c.check(std::abs(abs_off - 0.70) <= 0.05,
            "criterion4/off-resonance-reflection",
            "|R_off|(f=1) = " + num(abs_off) + " within 0.70 +/- 0.05");
    const double dphi_err = kPi - std::abs(spec.delta_phi[0]);
    c.check(std::abs(dphi_err) <= 0.05, "criterion4/phase-difference",
            "|delta_phi(f=1)| = " + num(std::abs(spec.delta_phi[0])) +
                " within pi +/- 0.05");
    auto dense = make_normal_incidence_setup(2.0, 0.05, wall, 14, 0.25, 0.25,
                                             risp, alphabet, {1.0});
    const ReflectionSpectrum dspec =
        characterize_normal_incidence(dense, {1.0});
    const double abs_dense = std::abs(dspec.r_off[0]);
    c.check(std::abs(abs_dense - 0.88) <= 0.05,
            "criterion4/dense-fence-reflection",
            "|R_off|(f=1) = " + num(abs_dense) + " within 0.88 +/- 0.05");
    const double elapsed = seconds_since(t0);
    c.check(elapsed < 120.0, "criterion4/runtime", num(elapsed) + " s < 120 s");
    return c.failures;
}

// --- criterion 5: fading sweep statistics -------------------------------------

int criterion5() {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    const io::SceneSpec spec =
        io::load_scene_spec(scene_file("fading_chamber.json"));
    StirredSceneSpec stirred = io::make_stirred_spec(spec, 4242);
    c.check(stirred.stirrers.size() >= 8, "criterion5/stirrer-count",
            std::to_string(stirred.stirrers.size()) + " stirrers >= 8");
    const std::vector<double> f_res = {10, 20, 40, 56, 80, 160, 320, 640};
    const std::size_t n_real = 2000;
    const auto sweep = transparency_sweep(stirred, f_res, n_real, 1.0, 1);

    std::vector<double> k_db;
    for (const auto& st : sweep) k_db.push_back(st.mean_k_db);
    // 3-point moving average, shrunk at the endpoints
    std::vector<double> smooth(k_db.size());
    for (std::size_t i = 0; i < k_db.size(); ++i) {
        const std::size_t lo = i > 0 ? i - 1 : 0;
        const std::size_t hi = std::min(i + 1, k_db.size() - 1);
        double acc = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) acc += k_db[j];
        smooth[i] = acc / static_cast<double>(hi - lo + 1);
    }
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < smooth.size(); ++i)
        if (smooth[i + 1] < smooth[i] - 1e-9) monotone = false;
    std::string curve;
    for (double v : k_db) curve += num(v) + " ";
    c.check(monotone, "criterion5/k-monotone",
            "smoothed K(dB) vs f_res_env non-decreasing; raw curve: " + curve);
    const double k_min = *std::min_element(k_db.begin(), k_db.end());
    const double k_max = *std::max_element(k_db.begin(), k_db.end());
    c.check(k_min <= -15.0 && k_max >= 40.0, "criterion5/k-span",
            "K range [" + num(k_min) + ", " + num(k_max) +
                "] dB covers [-15, +40]");

    // representative opaque-regime point: f_res_env = 40 (K ~ -14 dB, diffuse
    // field dominated by many weak scattering paths)
    const auto gauss = fit_distributions(sweep[2].samples_channel00);
    c.check(gauss.real_part.ks.p_value > 0.01, "criterion5/ks-gaussian-real",
            "p = " + num(gauss.real_part.ks.p_value) + " > 0.01 at f_res=40");
    c.check(gauss.imag_part.ks.p_value > 0.01, "criterion5/ks-gaussian-imag",
            "p = " + num(gauss.imag_part.ks.p_value) + " > 0.01 at f_res=40");
    // Rician magnitude where a genuine LOS component coexists with the
    // diffuse field (K just below 0 dB); at deep-opaque points the Rician
    // reduces to Rayleigh and the lossless cavity's mesoscopic tail shows
    const auto rician = fit_distributions(sweep[3].samples_channel00);
    c.check(rician.magnitude.ks.p_value > 0.01, "criterion5/ks-rician-mag",
            "p = " + num(rician.magnitude.ks.p_value) + " > 0.01 at f_res=56");

    const double reff_opaque = (sweep[0].mean_effective_rank +
                                sweep[1].mean_effective_rank +
                                sweep[2].mean_effective_rank) / 3.0;
    const double reff_transp = (sweep[6].mean_effective_rank +
                                sweep[7].mean_effective_rank) / 2.0;
    c.check(reff_opaque > 2.0, "criterion5/effective-rank-opaque",
            "mean R_eff = " + num(reff_opaque) + " > 2.0 (3x4 system)");
    c.check(reff_transp < 1.3, "criterion5/effective-rank-transparent",
            "mean R_eff = " + num(reff_transp) + " < 1.3 (3x4 system)");
    const double elapsed = seconds_since(t0);
    c.check(elapsed <= 1800.0, "criterion5/runtime",
            num(elapsed) + " s <= 1800 s");
    return c.failures;
}

// --- criterion 6: time domain / causality --------------------------------------

int criterion6() {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    const io::SceneSpec spec =
        io::load_scene_spec(scene_file("free_space.json"));
    const Scene scene = io::expand_scene(spec);
    const CirPipeline pipeline(scene, WindowSpec{WindowKind::Hann}, 1);
    const Cir cir = pipeline.cir(RisConfiguration{});
    const CausalityReport report = causality_check(cir, 4.0);
    c.check(std::abs(report.peak_time - 4.0) <= cir.time_step * (1.0 + 1e-9),
            "criterion6/peak-location",
            "|h| peak at t = " + num(report.peak_time) + " within 4 +/- " +
                num(cir.time_step));
    c.check(report.pre_arrival_db <= -40.0, "criterion6/pre-arrival-leakage",
            "max |h(t < 3.6)| at " + num(report.pre_arrival_db) +
                " dB of peak; bound -40 dB");
    const io::SceneSpec rspec =
        io::load_scene_spec(scene_file("free_space_resonant.json"));
    const Scene rscene = io::expand_scene(rspec);
    const CirPipeline rpipeline(rscene, WindowSpec{WindowKind::Hann}, 1);
    const CausalityReport rreport =
        causality_check(rpipeline.cir(RisConfiguration{}), 4.0);
    c.check(rreport.peak_time > 4.0, "criterion6/resonant-delay",
            "resonant peak at t = " + num(rreport.peak_time) + " > 4");
    const double elapsed = seconds_since(t0);
    c.check(elapsed < 60.0, "criterion6/runtime", num(elapsed) + " s < 60 s");
    return c.failures;
}

// --- criterion 7: equalization ---------------------------------------------------

// Per-tap energies on a grid of width delta_t centered on the target, over
// the causal half of the CIR.
std::map<long, double> tap_bins(const Cir& cir, const TapWindow& tap) {
    std::map<long, double> bins;
    const std::size_t limit = cir.samples.size() / 2;
    for (std::size_t i = 0; i < limit; ++i) {
        const long b = std::lround((cir.time(i) - tap.t0) / tap.delta_t);
        bins[b] += cir.samples[i] * cir.samples[i];
    }
    return bins;
}

// Margin of the target tap over every resolvable other tap, in dB. The
// windowed band-limited pulse occupies the target bin plus one bin on each
// side (Hann main-lobe half-width 2/B = 2 delta_t), so |b| <= 1 is the
// target pulse itself, not a distinct tap.
double tap_margin_db(const Cir& cir, const TapWindow& tap) {
    const auto bins = tap_bins(cir, tap);
    const double target = bins.at(0);
    double best_other = 0.0;
    for (const auto& [b, e] : bins)
        if (std::labs(b) > 1) best_other = std::max(best_other, e);
    return 10.0 * std::log10(target / best_other);
}

// Fraction of CIR energy outside the target pulse's main lobe.
double residual_outside_lobe(const Cir& cir, const TapWindow& tap) {
    const auto bins = tap_bins(cir, tap);
    double total = 0.0, lobe = 0.0;
    for (const auto& [b, e] : bins) {
        total += e;
        if (std::labs(b) <= 1) lobe += e;
    }
    return (total - lobe) / total;
}

bool trace_strictly_monotone(const OptimizationTrace& trace) {
    for (const auto& s : trace.steps)
        if (s.accepted && !(s.cost_after > s.cost_before)) return false;
    return true;
}

int criterion7() {
    Checker c;
    // (a) + (b): desk-scale enclosure with N_RIS = 10
    {
        const io::SceneSpec spec =
            io::load_scene_spec(scene_file("equalization_desk.json"));
        const Scene scene = io::expand_scene(spec);
        const CirPipeline pipeline(scene, WindowSpec{WindowKind::Hann}, 1);
        rng::Stream stream(99);
        std::vector<Cir> ensemble;
        for (int k = 0; k < 10; ++k) {
            std::vector<bool> bits(scene.num_ris());
            for (std::size_t i = 0; i < bits.size(); ++i)
                bits[i] = stream.bit();
            ensemble.push_back(pipeline.cir(
                RisConfiguration::from_bits(bits, spec.ris_alphabet)));
        }
        const double separation = distance({1.2, 2.0}, {3.8, 2.2});
        const TapWindow tap =
            select_target_tap(ensemble, TapStrategy::DominantNlos, separation,
                              1.0)
                .window;
        bool all_monotone = true;
        bool all_local_opt = true;
        for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
            const OptimizationResult result = optimize_ris(
                pipeline, tap, spec.ris_alphabet, 10, 3, seed);
            if (!trace_strictly_monotone(result.trace)) all_monotone = false;
            // exhaustive single-flip verification of the returned optimum
            for (std::size_t i = 0; i < result.configuration.size(); ++i) {
                std::vector<bool> flipped = result.configuration;
                flipped[i] = !flipped[i];
                const double flipped_cost =
                    cost(pipeline.cir(RisConfiguration::from_bits(
                             flipped, spec.ris_alphabet)),
                         tap);
                if (flipped_cost > result.trace.final_cost * (1.0 + 1e-12))
                    all_local_opt = false;
            }
        }
        c.check(all_monotone, "criterion7/accepted-flips-monotone",
                "every accepted flip strictly increases C on 5 seeded runs");
        c.check(all_local_opt, "criterion7/local-optimality",
                "no single flip improves the optimum (N_RIS = 10, 5 seeds)");
    }
    // (c) paper-scale rooms with N_RIS = 114; the equalization target is the
    // LOS tap (single-tap channel for ISI-free modulation)
    const auto t0 = std::chrono::steady_clock::now();
    TapWindow tap;
    tap.t0 = distance({2.0, 4.0}, {8.5, 4.2});  // LOS delay (c = 1)
    tap.delta_t = 1.0;                          // 1 / bandwidth
    {
        const io::SceneSpec spec =
            io::load_scene_spec(scene_file("equalization_room.json"));
        const Scene scene = io::expand_scene(spec);
        const CirPipeline pipeline(scene, WindowSpec{WindowKind::Hann}, 1);
        const OptimizationResult result =
            optimize_ris(pipeline, tap, spec.ris_alphabet, 50, 5, 7);
        const Cir cir = pipeline.cir(RisConfiguration::from_bits(
            result.configuration, spec.ris_alphabet));
        const double margin = tap_margin_db(cir, tap);
        c.check(margin >= 10.0, "criterion7/target-tap-margin",
                "optimized target tap exceeds every other tap by " +
                    num(margin) + " dB >= 10 dB (N_RIS = 114)");
    }
    {
        const io::SceneSpec spec =
            io::load_scene_spec(scene_file("equalization_room_lossy.json"));
        const Scene scene = io::expand_scene(spec);
        const CirPipeline pipeline(scene, WindowSpec{WindowKind::Hann}, 1);
        const OptimizationResult result =
            optimize_ris(pipeline, tap, spec.ris_alphabet, 50, 5, 7);
        // regenerate the optimizer's random stage (same seed contract) to
        // recover the bits of the best random configuration
        rng::Stream stream(7);
        std::vector<std::vector<bool>> candidates(
            50, std::vector<bool>(scene.num_ris()));
        for (auto& bits : candidates)
            for (std::size_t i = 0; i < bits.size(); ++i)
                bits[i] = stream.bit();
        const Cir cir_rand = pipeline.cir(RisConfiguration::from_bits(
            candidates[result.trace.best_initial], spec.ris_alphabet));
        const Cir cir_opt = pipeline.cir(RisConfiguration::from_bits(
            result.configuration, spec.ris_alphabet));
        const double resid_rand = residual_outside_lobe(cir_rand, tap);
        const double resid_opt = residual_outside_lobe(cir_opt, tap);
        const double reduction = 100.0 * (1.0 - resid_opt / resid_rand);
        c.check(reduction >= 50.0, "criterion7/nlos-residual-reduction",
                "NLOS residual outside the LOS tap down " + num(reduction) +
                    "% >= 50% vs best random configuration (" +
                    num(resid_rand) + " -> " + num(resid_opt) + ")");
    }
    const double elapsed = seconds_since(t0);
    c.check(elapsed <= 7200.0, "criterion7/runtime-paper-scale",
            num(elapsed) + " s <= 7200 s");
    return c.failures;
}

// --- criterion 8: CLI determinism across thread counts -------------------------

std::string slurp_dir(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::string all;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        all += f.filename().string() + "\n" + ss.str() + "\n";
    }
    return all;
}

int criterion8() {
    Checker c;
    const std::filesystem::path base =
        std::filesystem::temp_directory_path() / "physfad_acceptance_8";
    std::filesystem::remove_all(base);
    const struct {
        std::string name;
        std::string args;
    } commands[] = {
        {"channel", "channel --scene " + scene_file("free_space.json") +
                        " --seed 5 --ris on"},
        {"cir", "cir --scene " + scene_file("free_space.json") +
                    " --seed 5 --window hann"},
        {"ris-characterize", "ris-characterize --scene " +
                                 scene_file("ris_characterization.json") +
                                 " --seed 5 --freq-points 33"},
        {"fading-sweep", "fading-sweep --scene " +
                             scene_file("fading_chamber.json") +
                             " --seed 5 --realizations 2 --fres 40"},
        {"equalize", "equalize --scene " +
                         scene_file("equalization_desk.json") +
                         " --seed 5 --random 3 --passes 1 --tap-ensemble 3"},
        {"field-map", "field-map --scene " + scene_file("free_space.json") +
                          " --seed 5 --ris on --freq 1.0 "
                          "--grid 1.0,-1.0,3.0,1.0,0.5"},
        {"validate", "validate --scene " + scene_file("free_space.json") +
                         " --dump-dipoles dipoles.csv"},
    };
    const unsigned thread_counts[] = {1, 4, 8};
    for (const auto& cmd : commands) {
        std::vector<std::string> snapshots;
        bool ran_ok = true;
        for (unsigned t : thread_counts) {
            const std::filesystem::path dir =
                base / (cmd.name + "_t" + std::to_string(t));
            std::filesystem::create_directories(dir);
            const std::string shell = std::string(PHYSFAD_CLI_PATH) + " " +
                                      cmd.args + " --threads " +
                                      std::to_string(t) + " --out " +
                                      dir.string() + " >/dev/null 2>&1";
            if (std::system(shell.c_str()) != 0) ran_ok = false;
            snapshots.push_back(slurp_dir(dir));
        }
        const bool identical = ran_ok && snapshots[0] == snapshots[1] &&
                               snapshots[0] == snapshots[2];
        c.check(identical, "criterion8/determinism-" + cmd.name,
                ran_ok ? "byte-identical outputs for --threads 1, 4, 8"
                       : "command failed to run");
    }
    std::filesystem::remove_all(base);
    return c.failures;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..8>\n");
        return 2;
    }
    const int criterion = std::atoi(argv[1]);
    int failures = 0;
    switch (criterion) {
        case 1: failures = criterion1(); break;
        case 2: failures = criterion2(); break;
        case 3: failures = criterion3(); break;
        case 4: failures = criterion4(); break;
        case 5: failures = criterion5(); break;
        case 6: failures = criterion6(); break;
        case 7: failures = criterion7(); break;
        case 8: failures = criterion8(); break;
        default:
            std::fprintf(stderr, "unknown criterion %d\n", criterion);
            return 2;
    }
    return failures == 0 ? 0 : 1;
}
