#include "hsad/scene.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hsad/envi.hpp"
#include "hsad/errors.hpp"

namespace fs = std::filesystem;

namespace hsad {

std::vector<Scene> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open manifest: " + path);
    fs::path dir = fs::path(path).parent_path();

    std::vector<Scene> scenes;
    std::set<std::string> names;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = line;
        size_t hash = t.find('#');
        if (hash != std::string::npos) t = t.substr(0, hash);
        std::istringstream ss(t);
        std::string header, mask, dataset;
        if (!(ss >> header)) continue; // blank line
        if (!(ss >> mask >> dataset))
            throw FormatError("manifest line " + std::to_string(line_no) +
                              ": expected '<header> <mask> <dataset>' (" + path + ")");
        fs::path hp(header), mp(mask);
        if (hp.is_relative()) hp = dir / hp;
        if (mp.is_relative()) mp = dir / mp;

        Scene scene;
        scene.cube = load_envi(hp.string());
        scene.mask = load_mask(mp.string());
        if (scene.mask.width != scene.cube.width ||
            scene.mask.height != scene.cube.height)
            throw ShapeError("manifest line " + std::to_string(line_no) +
                             ": mask dimensions do not match the cube");
        scene.dataset = dataset;
        scene.name = hp.stem().string();
        if (!names.insert(scene.name).second)
            throw ParamError("manifest: duplicate scene name '" + scene.name + "'");
        scenes.push_back(std::move(scene));
    }
    if (scenes.empty())
        throw DataError("manifest lists no scenes: " + path);
    return scenes;
}

} // namespace hsad
