// Command-line front end: scene files in, CSV + JSON metadata out.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "physfad/builders.hpp"
#include "physfad/channel.hpp"
#include "physfad/equalization.hpp"
#include "physfad/fading.hpp"
#include "physfad/io.hpp"
#include "physfad/ris.hpp"
#include "physfad/rng.hpp"
#include "physfad/timedomain.hpp"
#include "physfad/types.hpp"

namespace {

using nlohmann::json;
using namespace physfad;

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct CommonOptions {
    std::string scene_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    unsigned threads = 1;
    double freq_min = 0.0;
    double freq_max = 0.0;
    std::size_t freq_points = 0;
    std::string window = "hann";
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool needs_scene = true) {
    auto* scene = cmd->add_option("--scene", opt.scene_path, "scene JSON file");
    if (needs_scene) scene->required();
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--seed", opt.seed, "RNG seed");
    cmd->add_option("--threads", opt.threads, "worker thread count");
    cmd->add_option("--freq-min", opt.freq_min, "override grid start");
    cmd->add_option("--freq-max", opt.freq_max, "override grid end");
    cmd->add_option("--freq-points", opt.freq_points, "override grid size");
    cmd->add_option("--window", opt.window,
                    "spectral window: hann | rectangular | tukey");
}

WindowSpec parse_window(const std::string& name) {
    if (name == "hann") return {WindowKind::Hann};
    if (name == "rectangular" || name == "rect")
        return {WindowKind::Rectangular};
    if (name == "tukey") return {WindowKind::Tukey};
    throw std::invalid_argument("unknown window: " + name);
}

std::filesystem::path out_path(const CommonOptions& opt,
                               const std::string& file) {
    std::string dir = opt.out_dir;
    if (const char* env = std::getenv("PHYSFAD_OUT_DIR")) dir = env;
    std::filesystem::create_directories(dir);
    return std::filesystem::path(dir) / file;
}

io::SceneSpec load_spec(const CommonOptions& opt) {
    io::SceneSpec spec = io::load_scene_spec(opt.scene_path);
    if (opt.freq_min > 0.0) spec.frequency_grid.min = opt.freq_min;
    if (opt.freq_max > 0.0) spec.frequency_grid.max = opt.freq_max;
    if (opt.freq_points > 0) spec.frequency_grid.points = opt.freq_points;
    return spec;
}

// Throws std::invalid_argument (exit 2) when the expanded scene is invalid.
Scene expand_checked(const io::SceneSpec& spec) {
    Scene scene = io::expand_scene(spec);
    const auto violations = validate_scene(scene);
    if (!violations.empty()) {
        std::ostringstream msg;
        for (const auto& v : violations) msg << v.message << "; ";
        throw std::invalid_argument("scene validation failed: " + msg.str());
    }
    return scene;
}

// --ris accepts on | off | random | an explicit bit string such as 0110.
RisConfiguration parse_ris(const std::string& text, const RisAlphabet& alphabet,
                           std::size_t n_ris, std::uint64_t seed) {
    if (text == "on") return RisConfiguration::all(alphabet.on, n_ris);
    if (text == "off") return RisConfiguration::all(alphabet.off, n_ris);
    std::vector<bool> bits(n_ris);
    if (text == "random") {
        rng::Stream stream(seed);
        for (std::size_t i = 0; i < n_ris; ++i) bits[i] = stream.bit();
        return RisConfiguration::from_bits(bits, alphabet);
    }
    if (text.size() != n_ris)
        throw std::invalid_argument("--ris bit string length must equal " +
                                    std::to_string(n_ris));
    for (std::size_t i = 0; i < n_ris; ++i) {
        if (text[i] != '0' && text[i] != '1')
            throw std::invalid_argument("--ris: expected on|off|random|bits");
        bits[i] = text[i] == '1';
    }
    return RisConfiguration::from_bits(bits, alphabet);
}

// --- subcommands ------------------------------------------------------------

int run_validate(const CommonOptions& opt, const std::string& dump_path) {
    const io::SceneSpec spec = load_spec(opt);
    const Scene scene = io::expand_scene(spec);
    const auto violations = validate_scene(scene);
    if (!dump_path.empty()) {
        io::CsvWriter csv(out_path(opt, dump_path).string());
        csv.header("index,role,x,y,chi_squared,f_res,gamma_abs,dipole_size");
        const char* roles[] = {"tx", "rx", "env", "ris"};
        const auto& d = scene.dipoles();
        for (std::size_t i = 0; i < d.size(); ++i)
            csv.row(i, roles[static_cast<int>(d[i].role)], d[i].position.x,
                    d[i].position.y, d[i].params.chi_squared, d[i].params.f_res,
                    d[i].params.gamma_abs, d[i].params.dipole_size);
    }
    json report = {{"scene_hash", io::scene_hash(spec)},
                   {"dipoles", scene.size()},
                   {"tx", scene.num_tx()},
                   {"rx", scene.num_rx()},
                   {"env", scene.num_env()},
                   {"ris", scene.num_ris()},
                   {"violations", json::array()}};
    for (const auto& v : violations) {
        report["violations"].push_back(
            {{"message", v.message}, {"dipoles", v.dipole_indices}});
    }
    if (!violations.empty()) {
        std::cerr << report.dump(2) << "\n";
        return kExitValidation;
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

int run_channel(const CommonOptions& opt, const std::string& ris_text) {
    const io::SceneSpec spec = load_spec(opt);
    const Scene scene = expand_checked(spec);
    const RisConfiguration ris =
        parse_ris(ris_text, spec.ris_alphabet, scene.num_ris(), opt.seed);
    const ChannelTensor tensor = channel_tensor(scene, ris, opt.threads);
    io::write_channel_csv(out_path(opt, "channel.csv").string(), tensor);
    io::write_metadata(out_path(opt, "channel.meta.json").string(), spec,
                       "channel", opt.seed,
                       {{"ris", ris_text}, {"config_hash", tensor.config_hash}});
    return 0;
}

int run_cir(const CommonOptions& opt, const std::string& ris_text) {
    const io::SceneSpec spec = load_spec(opt);
    const Scene scene = expand_checked(spec);
    const RisConfiguration ris =
        parse_ris(ris_text, spec.ris_alphabet, scene.num_ris(), opt.seed);
    const WindowSpec window = parse_window(opt.window);
    const CirPipeline pipeline(scene, window, opt.threads);
    const Cir cir = pipeline.cir(ris);
    io::write_cir_csv(out_path(opt, "cir.csv").string(), cir);
    io::write_metadata(out_path(opt, "cir.meta.json").string(), spec, "cir",
                       opt.seed,
                       {{"ris", ris_text},
                        {"window", window.name()},
                        {"time_step", cir.time_step},
                        {"unambiguous_range", cir.unambiguous_range}});
    return 0;
}

int run_fading(const CommonOptions& opt, std::size_t realizations,
               const std::vector<double>& f_res_values, double eval_freq) {
    const io::SceneSpec spec = load_spec(opt);
    expand_checked(spec);  // validation only
    StirredSceneSpec stirred = io::make_stirred_spec(spec, opt.seed);
    const auto sweep = transparency_sweep(stirred, f_res_values, realizations,
                                          eval_freq, opt.threads);
    io::CsvWriter per_channel(out_path(opt, "fading_per_channel.csv").string());
    per_channel.header("f_res_env,rx,tx,abs_mu,sigma,k,k_db");
    io::CsvWriter summary(out_path(opt, "fading_summary.csv").string());
    summary.header("f_res_env,mean_k_db,mean_effective_rank");
    const std::size_t n_rx = stirred.rx.size(), n_tx = stirred.tx.size();
    for (const auto& stats : sweep) {
        for (std::size_t r = 0; r < n_rx; ++r)
            for (std::size_t t = 0; t < n_tx; ++t) {
                const auto& est = stats.per_channel[r * n_tx + t];
                per_channel.row(stats.f_res_env, r, t, std::abs(est.mu),
                                est.sigma, est.k, est.k_db);
            }
        summary.row(stats.f_res_env, stats.mean_k_db,
                    stats.mean_effective_rank);
    }
    io::write_metadata(out_path(opt, "fading.meta.json").string(), spec,
                       "fading-sweep", opt.seed,
                       {{"realizations", realizations},
                        {"eval_frequency", eval_freq}});
    return 0;
}

int run_ris_characterize(const CommonOptions& opt) {
    const io::SceneSpec spec = load_spec(opt);
    const Scene scene = expand_checked(spec);
    if (scene.num_ris() == 0)
        throw std::invalid_argument("ris-characterize: scene has no RIS");
    if (scene.num_tx() != 0 || scene.num_rx() != 0)
        throw std::invalid_argument(
            "ris-characterize: scene must not contain transceivers");
    // reference plane and sampling line from the RIS element layout
    double plane_x = 0.0, center_y = 0.0;
    for (std::size_t s = 0; s < scene.num_ris(); ++s) {
        const Vec2 p = scene.dipoles()[scene.ris_index(s)].position;
        plane_x += p.x;
        center_y += p.y;
    }
    plane_x /= static_cast<double>(scene.num_ris());
    center_y /= static_cast<double>(scene.num_ris());
    NormalIncidenceSetup setup{scene, spec.ris_alphabet, plane_x, center_y, 64};
    const ReflectionSpectrum spectrum = characterize_normal_incidence(
        setup, scene.frequency_grid(), opt.threads);
    io::CsvWriter csv(out_path(opt, "reflection.csv").string());
    csv.header(
        "f,abs_r_on,arg_r_on,abs_r_off,arg_r_off,delta_phi,"
        "residual_on,residual_off");
    for (std::size_t i = 0; i < spectrum.frequencies.size(); ++i)
        csv.row(spectrum.frequencies[i], std::abs(spectrum.r_on[i]),
                std::arg(spectrum.r_on[i]), std::abs(spectrum.r_off[i]),
                std::arg(spectrum.r_off[i]), spectrum.delta_phi[i],
                spectrum.residual_on[i], spectrum.residual_off[i]);
    io::write_metadata(out_path(opt, "reflection.meta.json").string(), spec,
                       "ris-characterize", opt.seed,
                       {{"ris_plane_x", plane_x}});
    return 0;
}

int run_equalize(const CommonOptions& opt, const std::string& strategy_name,
                 std::size_t n_random, std::size_t n_passes,
                 std::size_t n_tap_ensemble) {
    const io::SceneSpec spec = load_spec(opt);
    const Scene scene = expand_checked(spec);
    const WindowSpec window = parse_window(opt.window);
    const CirPipeline pipeline(scene, window, opt.threads);

    TapStrategy strategy;
    if (strategy_name == "dominant_nlos") strategy = TapStrategy::DominantNlos;
    else if (strategy_name == "los") strategy = TapStrategy::Los;
    else throw std::invalid_argument("--strategy: dominant_nlos | los");

    // random-configuration CIR ensemble for tap selection
    rng::Stream stream(rng::mix(opt.seed, 0x7a9));
    std::vector<Cir> ensemble;
    for (std::size_t k = 0; k < n_tap_ensemble; ++k) {
        std::vector<bool> bits(scene.num_ris());
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = stream.bit();
        ensemble.push_back(pipeline.cir(
            RisConfiguration::from_bits(bits, spec.ris_alphabet)));
    }
    const double separation =
        distance(scene.dipoles()[scene.tx_index(0)].position,
                 scene.dipoles()[scene.rx_index(0)].position);
    const auto& grid = scene.frequency_grid();
    const double bandwidth = grid.back() - grid.front();
    const TapSelection tap =
        select_target_tap(ensemble, strategy, separation, bandwidth);

    const OptimizationResult result = optimize_ris(
        pipeline, tap.window, spec.ris_alphabet, n_random, n_passes, opt.seed);

    io::CsvWriter trace(out_path(opt, "trace.csv").string());
    trace.header("iteration,flip_index,cost_before,cost_after,accepted");
    for (std::size_t i = 0; i < result.trace.steps.size(); ++i) {
        const auto& s = result.trace.steps[i];
        trace.row(i + 1, s.flip_index, s.cost_before, s.cost_after,
                  s.accepted ? 1 : 0);
    }
    io::write_cir_csv(out_path(opt, "cir_before.csv").string(),
                      pipeline.cir(RisConfiguration::all(
                          spec.ris_alphabet.off, scene.num_ris())));
    io::write_cir_csv(
        out_path(opt, "cir_after.csv").string(),
        pipeline.cir(RisConfiguration::from_bits(result.configuration,
                                                 spec.ris_alphabet)));
    std::string bits;
    for (bool b : result.configuration) bits += b ? '1' : '0';
    json extra = {{"strategy", strategy_name},
                  {"tap_t0", tap.window.t0},
                  {"tap_delta_t", tap.window.delta_t},
                  {"configuration", bits},
                  {"initial_best_cost",
                   result.trace.initial_costs[result.trace.best_initial]},
                  {"final_cost", result.trace.final_cost}};
    io::write_metadata(out_path(opt, "equalize.meta.json").string(), spec,
                       "equalize", opt.seed, extra);
    return 0;
}

int run_field_map(const CommonOptions& opt, const std::string& ris_text,
                  double freq, const std::vector<double>& grid_spec) {
    const io::SceneSpec spec = load_spec(opt);
    const Scene scene = expand_checked(spec);
    if (scene.num_tx() == 0)
        throw std::invalid_argument("field-map: scene needs a transmitter");
    if (grid_spec.size() != 5)
        throw std::invalid_argument(
            "--grid expects x0,y0,x1,y1,step (5 values)");
    const double x0 = grid_spec[0], y0 = grid_spec[1];
    const double x1 = grid_spec[2], y1 = grid_spec[3], step = grid_spec[4];
    if (!(step > 0.0) || !(x1 >= x0) || !(y1 >= y0))
        throw std::invalid_argument("--grid: degenerate extent or step");
    const double f = freq > 0.0 ? freq : scene.frequency_grid().front();
    const RisConfiguration ris =
        parse_ris(ris_text, spec.ris_alphabet, scene.num_ris(), opt.seed);
    const InteractionMatrix w = assemble_w(scene, ris, f);
    const Eigen::VectorXcd p =
        solve_dipole_moments(w, Eigen::VectorXcd(canonical_excitations(scene).col(0)));
    std::vector<Vec2> points;
    for (double y = y0; y <= y1 + 1e-12; y += step)
        for (double x = x0; x <= x1 + 1e-12; x += step)
            points.push_back({x, y});
    const FieldMap map = evaluate_field_map(scene, f, p, points);
    io::CsvWriter csv(out_path(opt, "field.csv").string());
    csv.header("x,y,re_e,im_e");
    for (std::size_t i = 0; i < map.points.size(); ++i)
        csv.row(map.points[i].x, map.points[i].y, map.values[i].real(),
                map.values[i].imag());
    io::write_metadata(out_path(opt, "field.meta.json").string(), spec,
                       "field-map", opt.seed,
                       {{"frequency", f}, {"ris", ris_text}});
    return 0;
}

int emit_error(const std::string& kind, const std::string& message, int code) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"physfad: physics-based channel model for "
                 "RIS-parametrized environments"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::string ris_text = "on";
    std::string dump_path;
    std::string strategy = "dominant_nlos";
    std::size_t realizations = 100, n_random = 50, n_passes = 5,
                tap_ensemble = 20;
    std::vector<double> f_res_values;
    double eval_freq = 1.0, freq = 0.0;
    std::vector<double> grid_spec;

    auto* c_channel = app.add_subcommand("channel", "frequency-domain channel");
    add_common(c_channel, opt);
    c_channel->add_option("--ris", ris_text, "on | off | random | bit string");

    auto* c_fading = app.add_subcommand(
        "fading-sweep", "K-factor sweep over environment transparency");
    add_common(c_fading, opt);
    c_fading->add_option("--realizations", realizations, "ensemble size");
    c_fading->add_option("--fres", f_res_values, "environment f_res values")
        ->required()
        ->delimiter(',');
    c_fading->add_option("--eval-freq", eval_freq, "evaluation frequency");

    auto* c_ris = app.add_subcommand("ris-characterize",
                                     "normal-incidence reflection spectrum");
    add_common(c_ris, opt);

    auto* c_cir = app.add_subcommand("cir", "channel impulse response");
    add_common(c_cir, opt);
    c_cir->add_option("--ris", ris_text, "on | off | random | bit string");

    auto* c_eq = app.add_subcommand("equalize",
                                    "greedy RIS optimization of a target tap");
    add_common(c_eq, opt);
    c_eq->add_option("--strategy", strategy, "dominant_nlos | los");
    c_eq->add_option("--random", n_random, "random initial configurations");
    c_eq->add_option("--passes", n_passes, "flip passes over the elements");
    c_eq->add_option("--tap-ensemble", tap_ensemble,
                     "random CIRs used to pick the target tap");

    auto* c_field = app.add_subcommand("field-map", "total field on a grid");
    add_common(c_field, opt);
    c_field->add_option("--ris", ris_text, "on | off | random | bit string");
    c_field->add_option("--freq", freq, "frequency (default: grid start)");
    c_field->add_option("--grid", grid_spec, "x0,y0,x1,y1,step")
        ->required()
        ->delimiter(',');

    auto* c_validate = app.add_subcommand("validate", "check a scene file");
    add_common(c_validate, opt);
    c_validate->add_option("--dump-dipoles", dump_path,
                           "write the expanded dipole list as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_channel->parsed()) return run_channel(opt, ris_text);
        if (c_fading->parsed())
            return run_fading(opt, realizations, f_res_values, eval_freq);
        if (c_ris->parsed()) return run_ris_characterize(opt);
        if (c_cir->parsed()) return run_cir(opt, ris_text);
        if (c_eq->parsed())
            return run_equalize(opt, strategy, n_random, n_passes,
                                tap_ensemble);
        if (c_field->parsed())
            return run_field_map(opt, ris_text, freq, grid_spec);
        if (c_validate->parsed()) return run_validate(opt, dump_path);
    } catch (const SolverError& e) {
        return emit_error("solver", e.what(), kExitSolver);
    } catch (const SingularityError& e) {
        return emit_error("solver", e.what(), kExitSolver);
    } catch (const std::invalid_argument& e) {
        return emit_error("validation", e.what(), kExitValidation);
    } catch (const nlohmann::json::exception& e) {
        return emit_error("validation", e.what(), kExitValidation);
    } catch (const std::exception& e) {
        return emit_error("internal", e.what(), 1);
    }
    return 0;
}
