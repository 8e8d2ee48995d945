#pragma once

// Scene file schema (declarative JSON: builders are stored as their specs,
// not their expanded dipoles), CSV emission at full double precision, and
// the scene hash recorded in output metadata sidecars.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "physfad/builders.hpp"
#include "physfad/common.hpp"
#include "physfad/fading.hpp"
#include "physfad/types.hpp"

namespace physfad::io {

using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

struct FrequencyGridSpec {
    double min = 0.5;
    double max = 1.5;
    std::size_t points = 401;

    std::vector<double> expand() const {
        if (points < 1 || !(min > 0.0) || !(max >= min))
            throw std::invalid_argument("frequency_grid: invalid range");
        std::vector<double> grid(points);
        for (std::size_t i = 0; i < points; ++i)
            grid[i] = points == 1
                          ? min
                          : min + (max - min) * static_cast<double>(i) /
                                      static_cast<double>(points - 1);
        return grid;
    }
};

struct PlacedDipoleSpec {
    Vec2 position;
    PolarizabilityParams params;
};

struct StirrerJsonSpec {
    Vec2 centroid;
    double radius = 1.0;
    std::size_t vertices = 12;
    double radius_jitter = 0.4;
    double spacing = 0.25;
    std::uint64_t shape_seed = 0;
    PolarizabilityParams params;
};

struct SceneSpec {
    FrequencyGridSpec frequency_grid;
    std::vector<PlacedDipoleSpec> transmitters;
    std::vector<PlacedDipoleSpec> receivers;
    std::vector<builders::FenceSpec> environment_fences;
    std::vector<StirrerJsonSpec> stirrers;
    std::vector<builders::RisArraySpec> ris_arrays;
    RisAlphabet ris_alphabet;
};

// --- JSON conversion ---------------------------------------------------------

inline json to_json(Vec2 v) { return json::array({v.x, v.y}); }
inline Vec2 vec2_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("scene: expected [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const PolarizabilityParams& p) {
    return {{"chi_squared", p.chi_squared},
            {"f_res", p.f_res},
            {"gamma_abs", p.gamma_abs},
            {"dipole_size", p.dipole_size}};
}
inline PolarizabilityParams params_from_json(const json& j) {
    PolarizabilityParams p;
    p.chi_squared = j.value("chi_squared", p.chi_squared);
    p.f_res = j.value("f_res", p.f_res);
    p.gamma_abs = j.value("gamma_abs", p.gamma_abs);
    p.dipole_size = j.value("dipole_size", p.dipole_size);
    return p;
}

inline json polyline_to_json(const builders::Polyline& line) {
    json arr = json::array();
    for (const Vec2& v : line) arr.push_back(to_json(v));
    return arr;
}
inline builders::Polyline polyline_from_json(const json& j) {
    builders::Polyline line;
    for (const auto& v : j) line.push_back(vec2_from_json(v));
    return line;
}

inline json to_json(const SceneSpec& spec) {
    json j;
    j["frequency_grid"] = {{"min", spec.frequency_grid.min},
                           {"max", spec.frequency_grid.max},
                           {"points", spec.frequency_grid.points}};
    auto placed = [](const std::vector<PlacedDipoleSpec>& items) {
        json arr = json::array();
        for (const auto& it : items)
            arr.push_back({{"position", to_json(it.position)},
                           {"params", to_json(it.params)}});
        return arr;
    };
    j["transmitters"] = placed(spec.transmitters);
    j["receivers"] = placed(spec.receivers);
    j["environment_fences"] = json::array();
    for (const auto& f : spec.environment_fences)
        j["environment_fences"].push_back(
            {{"polyline", polyline_to_json(f.polyline)},
             {"closed", f.closed},
             {"spacing", f.spacing},
             {"params", to_json(f.params)}});
    j["stirrers"] = json::array();
    for (const auto& s : spec.stirrers)
        j["stirrers"].push_back({{"centroid", to_json(s.centroid)},
                                 {"radius", s.radius},
                                 {"vertices", s.vertices},
                                 {"radius_jitter", s.radius_jitter},
                                 {"spacing", s.spacing},
                                 {"shape_seed", s.shape_seed},
                                 {"params", to_json(s.params)}});
    j["ris_arrays"] = json::array();
    for (const auto& r : spec.ris_arrays) {
        json anchors = json::array();
        for (const auto& a : r.anchors) anchors.push_back(polyline_to_json(a));
        j["ris_arrays"].push_back({{"anchors", anchors},
                                   {"counts", r.counts},
                                   {"spacing", r.spacing},
                                   {"standoff", r.standoff},
                                   {"params", to_json(r.params)}});
    }
    j["ris_alphabet"] = {{"on", spec.ris_alphabet.on},
                         {"off", spec.ris_alphabet.off}};
    return j;
}

inline SceneSpec scene_spec_from_json(const json& j) {
    SceneSpec spec;
    if (j.contains("frequency_grid")) {
        const auto& g = j.at("frequency_grid");
        spec.frequency_grid.min = g.value("min", 0.5);
        spec.frequency_grid.max = g.value("max", 1.5);
        spec.frequency_grid.points = g.value("points", std::size_t{401});
    }
    auto placed = [&](const char* key, std::vector<PlacedDipoleSpec>& out) {
        if (!j.contains(key)) return;
        for (const auto& it : j.at(key)) {
            PlacedDipoleSpec p;
            p.position = vec2_from_json(it.at("position"));
            if (it.contains("params")) p.params = params_from_json(it["params"]);
            out.push_back(p);
        }
    };
    placed("transmitters", spec.transmitters);
    placed("receivers", spec.receivers);
    if (j.contains("environment_fences"))
        for (const auto& it : j.at("environment_fences")) {
            builders::FenceSpec f;
            f.polyline = polyline_from_json(it.at("polyline"));
            f.closed = it.value("closed", false);
            f.spacing = it.value("spacing", 0.25);
            if (it.contains("params")) f.params = params_from_json(it["params"]);
            spec.environment_fences.push_back(std::move(f));
        }
    if (j.contains("stirrers"))
        for (const auto& it : j.at("stirrers")) {
            StirrerJsonSpec s;
            s.centroid = vec2_from_json(it.at("centroid"));
            s.radius = it.value("radius", 1.0);
            s.vertices = it.value("vertices", std::size_t{12});
            s.radius_jitter = it.value("radius_jitter", 0.4);
            s.spacing = it.value("spacing", 0.25);
            s.shape_seed = it.value("shape_seed", std::uint64_t{0});
            if (it.contains("params")) s.params = params_from_json(it["params"]);
            spec.stirrers.push_back(std::move(s));
        }
    if (j.contains("ris_arrays"))
        for (const auto& it : j.at("ris_arrays")) {
            builders::RisArraySpec r;
            for (const auto& a : it.at("anchors"))
                r.anchors.push_back(polyline_from_json(a));
            r.counts = it.at("counts").get<std::vector<std::size_t>>();
            r.spacing = it.value("spacing", 0.25);
            r.standoff = it.value("standoff", 0.25);
            if (it.contains("params")) r.params = params_from_json(it["params"]);
            spec.ris_arrays.push_back(std::move(r));
        }
    if (j.contains("ris_alphabet")) {
        spec.ris_alphabet.on = j["ris_alphabet"].value("on", 1.0);
        spec.ris_alphabet.off = j["ris_alphabet"].value("off", 5.0);
    }
    return spec;
}

inline SceneSpec load_scene_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open scene file: " + path);
    json j;
    in >> j;
    return scene_spec_from_json(j);
}

inline void save_scene_spec(const SceneSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::invalid_argument("cannot write scene file: " + path);
    out << to_json(spec).dump(2) << "\n";
}

// --- expansion ---------------------------------------------------------------

// Fixed non-stirrer part of the scene; stirrer angles come per realization.
inline StirredSceneSpec make_stirred_spec(const SceneSpec& spec,
                                          std::uint64_t seed) {
    StirredSceneSpec out;
    out.seed = seed;
    out.frequency_grid = spec.frequency_grid.expand();
    for (const auto& t : spec.transmitters)
        out.tx.push_back({t.position, t.params, Role::Transmitter});
    for (const auto& r : spec.receivers)
        out.rx.push_back({r.position, r.params, Role::Receiver});
    for (const auto& f : spec.environment_fences) {
        const auto dipoles = builders::build_fence(f);
        out.static_env.insert(out.static_env.end(), dipoles.begin(),
                              dipoles.end());
    }
    for (const auto& s : spec.stirrers)
        out.stirrers.push_back(builders::make_star_stirrer(
            s.centroid, s.radius, s.vertices, s.radius_jitter, s.shape_seed,
            s.spacing, s.params));
    for (const auto& r : spec.ris_arrays) {
        const auto dipoles = builders::build_ris_array(r, out.static_env);
        out.ris_dipoles.insert(out.ris_dipoles.end(), dipoles.begin(),
                               dipoles.end());
    }
    return out;
}

// Expands to a concrete Scene; stirrers are frozen at angle 0 unless angles
// are supplied.
inline Scene expand_scene(const SceneSpec& spec,
                          const std::vector<double>& stirrer_angles = {}) {
    StirredSceneSpec stirred = make_stirred_spec(spec, 0);
    std::vector<double> angles = stirrer_angles;
    if (angles.empty()) angles.assign(stirred.stirrers.size(), 0.0);
    return stirred_realization(stirred, angles);
}

// FNV-1a over the canonical JSON dump.
inline std::uint64_t scene_hash(const SceneSpec& spec) {
    const std::string dump = to_json(spec).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

// --- CSV / metadata emission --------------------------------------------------

// Full double precision so golden-file comparisons are exact.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_)
            throw std::invalid_argument("cannot write output file: " + path);
    }
    void header(const std::string& line) { out_ << line << "\n"; }
    template <typename... Ts>
    void row(Ts... values) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
        out_ << "\n";
    }

  private:
    static std::string cell(double v) { return fmt(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }
    std::ofstream out_;
};

inline void write_channel_csv(const std::string& path,
                              const ChannelTensor& tensor) {
    CsvWriter csv(path);
    csv.header("f,rx,tx,re_h,im_h");
    for (std::size_t fi = 0; fi < tensor.frequency_grid.size(); ++fi)
        for (std::size_t r = 0; r < tensor.num_rx; ++r)
            for (std::size_t t = 0; t < tensor.num_tx; ++t) {
                const Complex h = tensor.at(fi, r, t);
                csv.row(tensor.frequency_grid[fi], r, t, h.real(), h.imag());
            }
}

inline void write_cir_csv(const std::string& path, const Cir& cir) {
    CsvWriter csv(path);
    csv.header("t,h");
    for (std::size_t i = 0; i < cir.samples.size(); ++i)
        csv.row(cir.time(i), cir.samples[i]);
}

// Metadata sidecar carried by every output file set.
inline void write_metadata(const std::string& path, const SceneSpec& spec,
                           const std::string& command, std::uint64_t seed,
                           const json& extra = json::object()) {
    json meta = {{"tool_version", kToolVersion},
                 {"command", command},
                 {"scene_hash", scene_hash(spec)},
                 {"seed", seed}};
    for (auto it = extra.begin(); it != extra.end(); ++it)
        meta[it.key()] = it.value();
    std::ofstream out(path);
    if (!out)
        throw std::invalid_argument("cannot write metadata file: " + path);
    out << meta.dump(2) << "\n";
}

}  // namespace physfad::io
