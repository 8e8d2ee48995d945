#pragma once

#include <string>

#include "physfad/types.hpp"

namespace testutil {

inline std::string source_dir() { return PHYSFAD_SOURCE_DIR; }
inline std::string data_file(const std::string& name) {
    return source_dir() + "/tests/data/" + name;
}
inline std::string scene_file(const std::string& name) {
    return source_dir() + "/scenes/" + name;
}
inline std::string cli_path() { return PHYSFAD_CLI_PATH; }

inline physfad::Dipole dipole(double x, double y,
                              physfad::PolarizabilityParams params = {}) {
    return {{x, y}, params, physfad::Role::Environment};
}

}  // namespace testutil
