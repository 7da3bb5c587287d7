#pragma once

#include <string>
#include <vector>

#include "hsad/cube.hpp"

namespace hsad {

struct Scene {
    HsiCube cube;
    TruthMask mask;
    std::string dataset;
    std::string name;
};

// Plain text manifest: one scene per line,
//   <header path> <mask header path> <dataset name>
// '#' starts a comment; relative paths resolve against the manifest file.
// Scene names are the header file stems and must be unique.
std::vector<Scene> load_manifest(const std::string& path);

} // namespace hsad
