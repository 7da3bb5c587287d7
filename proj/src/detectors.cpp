#include "hsad/detectors.hpp"

#include <cstdio>
#include <cstring>
#include <sstream>

#include "hsad/errors.hpp"

namespace hsad {

namespace {

const std::vector<std::pair<std::string, DetectorId>>& id_table() {
    static const std::vector<std::pair<std::string, DetectorId>> table = {
        {"rx", DetectorId::Rx},         {"md_rx", DetectorId::MdRx},
        {"win_rx", DetectorId::WinRx},  {"ssrx", DetectorId::Ssrx},
        {"csd", DetectorId::Csd},       {"gm_rx", DetectorId::GmRx},
        {"cbad", DetectorId::Cbad},     {"fcbad", DetectorId::Fcbad},
        {"aed", DetectorId::Aed},       {"kifd", DetectorId::Kifd},
        {"lsunrsorad", DetectorId::Lsunrsorad},
    };
    return table;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

DetectorId detector_id_from_string(const std::string& name) {
    for (const auto& [s, id] : id_table())
        if (s == name) return id;
    std::string valid;
    for (const auto& [s, id] : id_table()) {
        if (!valid.empty()) valid += ", ";
        valid += s;
    }
    throw ParamError("unknown detector '" + name + "' (valid: " + valid + ")");
}

std::string to_string(DetectorId id) {
    for (const auto& [s, i] : id_table())
        if (i == id) return s;
    return "?";
}

const std::vector<std::string>& detector_id_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [s, id] : id_table()) v.push_back(s);
        return v;
    }();
    return names;
}

void validate_spec(const DetectorSpec& spec, const HsiCube& cube) {
    if (spec.ridge < 0.0)
        throw ParamError("ridge must be >= 0");
    const int npix = cube.pixel_count();
    switch (spec.id) {
    case DetectorId::Rx:
    case DetectorId::MdRx:
        break;
    case DetectorId::WinRx: {
        int lim = std::min(cube.width, cube.height);
        if (spec.window % 2 == 0 || spec.guard % 2 == 0)
            throw ParamError("win_rx: window and guard must be odd (window " +
                             std::to_string(spec.window) + ", guard " +
                             std::to_string(spec.guard) + ")");
        if (spec.guard < 1 || spec.guard >= spec.window || spec.window > lim)
            throw ParamError("win_rx: need 1 <= guard < window <= min(width,height); got guard " +
                             std::to_string(spec.guard) + ", window " +
                             std::to_string(spec.window) + ", limit " + std::to_string(lim));
        break;
    }
    case DetectorId::Ssrx:
        if (spec.remove_top_k < 1 || spec.remove_top_k >= cube.bands)
            throw ParamError("ssrx: remove_top_k must be in [1, bands-1]; got " +
                             std::to_string(spec.remove_top_k) + " with " +
                             std::to_string(cube.bands) + " bands");
        break;
    case DetectorId::Csd:
        if (!(spec.bg_fraction > 0.0 && spec.bg_fraction < 1.0))
            throw ParamError("csd: background variance fraction must be in (0,1)");
        break;
    case DetectorId::GmRx:
        if (spec.gmm_k < 1)
            throw ParamError("gm_rx: k must be >= 1");
        if (npix < spec.gmm_k * (cube.bands + 1))
            throw ParamError("gm_rx: need at least k*(bands+1) pixels");
        break;
    case DetectorId::Cbad:
        if (spec.cluster_k < 1 || spec.cluster_k > npix)
            throw ParamError("cbad: k must be in [1, pixel count]");
        break;
    case DetectorId::Fcbad:
        if (spec.cluster_k < 2 || spec.cluster_k > npix)
            throw ParamError("fcbad: k must be in [2, pixel count]");
        if (!(spec.fuzzifier > 1.0))
            throw ParamError("fcbad: fuzzifier m must be > 1");
        break;
    case DetectorId::Aed:
        if (spec.pc_count < 1 || spec.pc_count > cube.bands)
            throw ParamError("aed: pc_count must be in [1, bands]");
        if (!(spec.area_fraction > 0.0 && spec.area_fraction < 1.0))
            throw ParamError("aed: area_fraction must be in (0,1)");
        if (spec.levels < 8)
            throw ParamError("aed: levels must be >= 8");
        if (spec.smooth_radius < 0)
            throw ParamError("aed: smooth_radius must be >= 0");
        if (!(spec.smooth_eps > 0.0))
            throw ParamError("aed: smooth_eps must be > 0");
        break;
    case DetectorId::Kifd:
        if (spec.landmarks < 1 || spec.landmarks > npix)
            throw ParamError("kifd: landmarks must be in [1, pixel count " +
                             std::to_string(npix) + "]");
        if (spec.kpca_components < 1 || spec.kpca_components > spec.landmarks)
            throw ParamError("kifd: kpca_components must be in [1, landmarks]");
        if (spec.trees < 1 || spec.subsample < 1)
            throw ParamError("kifd: trees and subsample must be >= 1");
        break;
    case DetectorId::Lsunrsorad: {
        if (spec.scales.empty())
            throw ParamError("lsunrsorad: at least one (inner, outer) scale required");
        int lim = std::min(cube.width, cube.height);
        for (auto [inner, outer] : spec.scales) {
            if (inner % 2 == 0 || outer % 2 == 0 || inner < 1 || inner >= outer ||
                outer > lim)
                throw ParamError("lsunrsorad: need odd 1 <= inner < outer <= min(width,height); got (" +
                                 std::to_string(inner) + ", " + std::to_string(outer) + ")");
        }
        if (!(spec.lambda > 0.0))
            throw ParamError("lsunrsorad: lambda must be > 0");
        if (spec.outlier_frac < 0.0 || spec.outlier_frac >= 0.5)
            throw ParamError("lsunrsorad: outlier_frac must be in [0, 0.5)");
        break;
    }
    }
}

std::string canonical_string(const DetectorSpec& spec) {
    std::ostringstream ss;
    ss << "id=" << to_string(spec.id);
    ss << " seed=" << spec.seed;
    ss << " ridge=" << fmt(spec.ridge);
    ss << " window=" << spec.window << " guard=" << spec.guard;
    ss << " remove_top_k=" << spec.remove_top_k;
    ss << " bg_fraction=" << fmt(spec.bg_fraction);
    ss << " gmm_k=" << spec.gmm_k;
    ss << " cluster_k=" << spec.cluster_k;
    ss << " fuzzifier=" << fmt(spec.fuzzifier);
    ss << " pc_count=" << spec.pc_count;
    ss << " area_fraction=" << fmt(spec.area_fraction);
    ss << " levels=" << spec.levels;
    ss << " smooth_radius=" << spec.smooth_radius;
    ss << " smooth_eps=" << fmt(spec.smooth_eps);
    ss << " kpca_components=" << spec.kpca_components;
    ss << " landmarks=" << spec.landmarks;
    ss << " trees=" << spec.trees;
    ss << " subsample=" << spec.subsample;
    ss << " scales=";
    for (size_t i = 0; i < spec.scales.size(); ++i) {
        if (i) ss << ",";
        ss << spec.scales[i].first << ":" << spec.scales[i].second;
    }
    ss << " lambda=" << fmt(spec.lambda);
    ss << " outlier_frac=" << fmt(spec.outlier_frac);
    return ss.str();
}

DetectorSpec parse_spec(const std::string& canonical) {
    DetectorSpec spec;
    std::istringstream ss(canonical);
    std::string token;
    bool saw_id = false;
    while (ss >> token) {
        size_t eq = token.find('=');
        if (eq == std::string::npos)
            throw FormatError("bad detector spec token '" + token + "'");
        std::string key = token.substr(0, eq);
        std::string value = token.substr(eq + 1);
        try {
            if (key == "id") {
                spec.id = detector_id_from_string(value);
                saw_id = true;
            } else if (key == "seed") {
                spec.seed = std::stoull(value);
            } else if (key == "ridge") {
                spec.ridge = std::stod(value);
            } else if (key == "window") {
                spec.window = std::stoi(value);
            } else if (key == "guard") {
                spec.guard = std::stoi(value);
            } else if (key == "remove_top_k") {
                spec.remove_top_k = std::stoi(value);
            } else if (key == "bg_fraction") {
                spec.bg_fraction = std::stod(value);
            } else if (key == "gmm_k") {
                spec.gmm_k = std::stoi(value);
            } else if (key == "cluster_k") {
                spec.cluster_k = std::stoi(value);
            } else if (key == "fuzzifier") {
                spec.fuzzifier = std::stod(value);
            } else if (key == "pc_count") {
                spec.pc_count = std::stoi(value);
            } else if (key == "area_fraction") {
                spec.area_fraction = std::stod(value);
            } else if (key == "levels") {
                spec.levels = std::stoi(value);
            } else if (key == "smooth_radius") {
                spec.smooth_radius = std::stoi(value);
            } else if (key == "smooth_eps") {
                spec.smooth_eps = std::stod(value);
            } else if (key == "kpca_components") {
                spec.kpca_components = std::stoi(value);
            } else if (key == "landmarks") {
                spec.landmarks = std::stoi(value);
            } else if (key == "trees") {
                spec.trees = std::stoi(value);
            } else if (key == "subsample") {
                spec.subsample = std::stoi(value);
            } else if (key == "scales") {
                spec.scales.clear();
                std::istringstream ls(value);
                std::string pair;
                while (std::getline(ls, pair, ',')) {
                    size_t colon = pair.find(':');
                    if (colon == std::string::npos)
                        throw std::invalid_argument("scale pair");
                    spec.scales.emplace_back(std::stoi(pair.substr(0, colon)),
                                             std::stoi(pair.substr(colon + 1)));
                }
            } else if (key == "lambda") {
                spec.lambda = std::stod(value);
            } else if (key == "outlier_frac") {
                spec.outlier_frac = std::stod(value);
            } else {
                throw FormatError("unknown detector spec key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw FormatError("bad value for detector spec key '" + key + "': " + value);
        } catch (const std::out_of_range&) {
            throw FormatError("out-of-range value for detector spec key '" + key + "'");
        }
    }
    if (!saw_id)
        throw FormatError("detector spec is missing 'id'");
    return spec;
}

ScoreMap detect(const HsiCube& cube, const DetectorSpec& spec) {
    cube.validate();
    validate_spec(spec, cube);
    switch (spec.id) {
    case DetectorId::Rx:
        return detect_rx(cube, CenterMode::Mean, spec.ridge);
    case DetectorId::MdRx:
        return detect_rx(cube, CenterMode::Median, spec.ridge);
    case DetectorId::WinRx:
        return detect_win_rx(cube, spec.window, spec.guard, spec.ridge);
    case DetectorId::Ssrx:
        return detect_ssrx(cube, spec.remove_top_k, spec.ridge);
    case DetectorId::Csd:
        return detect_csd(cube, spec.bg_fraction);
    case DetectorId::GmRx:
        return detect_gmrx(cube, spec.gmm_k, spec.seed, spec.ridge);
    case DetectorId::Cbad:
        return detect_cbad(cube, spec.cluster_k, spec.seed, spec.ridge);
    case DetectorId::Fcbad:
        return detect_fcbad(cube, spec.cluster_k, spec.fuzzifier, spec.seed, spec.ridge);
    case DetectorId::Aed:
        return detect_aed(cube, spec.pc_count, spec.area_fraction, spec.levels,
                          spec.smooth_radius, spec.smooth_eps);
    case DetectorId::Kifd:
        return detect_kifd(cube, spec.kpca_components, spec.landmarks, spec.trees,
                           spec.subsample, spec.seed);
    case DetectorId::Lsunrsorad:
        return detect_lsunrsorad(cube, spec.scales, spec.lambda, spec.outlier_frac);
    }
    throw ParamError("unhandled detector id");
}

} // namespace hsad
