#include "hsad/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hsad/errors.hpp"
#include "hsad/pca.hpp"
#include "hsad/rng.hpp"

namespace hsad {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void check_same_dims(const std::vector<ScoreMap>& maps) {
    for (size_t i = 1; i < maps.size(); ++i)
        if (maps[i].width != maps[0].width || maps[i].height != maps[0].height)
            throw ShapeError("fused maps must share dimensions; map " +
                             std::to_string(i) + " is " + std::to_string(maps[i].width) +
                             "x" + std::to_string(maps[i].height) + " vs " +
                             std::to_string(maps[0].width) + "x" +
                             std::to_string(maps[0].height));
}

} // namespace

ScoreMap vote_fuse(const std::vector<ScoreMap>& maps, const ThresholdRule& rule,
                   int min_votes) {
    if (maps.size() < 2)
        throw ParamError("vote_fuse: need at least 2 maps");
    if (min_votes < 1)
        throw ParamError("vote_fuse: min_votes must be >= 1");
    check_same_dims(maps);

    ScoreMap out;
    out.width = maps[0].width;
    out.height = maps[0].height;
    out.source = "vote_fuse";
    out.scores.assign(maps[0].scores.size(), 0.0);

    std::vector<int> votes(out.scores.size(), 0);
    for (const auto& map : maps) {
        double t = apply_threshold_rule(map.scores, rule);
        for (size_t p = 0; p < map.scores.size(); ++p)
            if (map.scores[p] > t) ++votes[p];
    }
    for (size_t p = 0; p < out.scores.size(); ++p)
        out.scores[p] = votes[p] >= min_votes ? 1.0 : 0.0;
    return out;
}

ScoreMap average_fuse(const std::vector<ScoreMap>& maps) {
    if (maps.size() < 2)
        throw ParamError("average_fuse: need at least 2 maps");
    check_same_dims(maps);

    ScoreMap out;
    out.width = maps[0].width;
    out.height = maps[0].height;
    out.source = "average_fuse";
    out.normalized = false;
    out.scores.assign(maps[0].scores.size(), 0.0);
    for (const auto& map : maps) {
        std::vector<double> norm = normalize_minmax(map.scores);
        for (size_t p = 0; p < norm.size(); ++p) out.scores[p] += norm[p];
    }
    for (double& v : out.scores) v /= static_cast<double>(maps.size());
    return out;
}

Passthrough make_ten_pcs() {
    Passthrough p;
    p.kind = Passthrough::Kind::TenPcs;
    return p;
}

Passthrough make_random_channels(int bands, uint64_t seed, int count) {
    if (count < 1)
        throw ParamError("random channels: count must be >= 1");
    if (bands < count)
        throw ParamError("random channels: cube has " + std::to_string(bands) +
                         " bands but " + std::to_string(count) +
                         " distinct channels were requested; use ten_pcs or fewer channels");
    Passthrough p;
    p.kind = Passthrough::Kind::RandomChannels;
    p.seed = seed;
    p.channel_count = count;
    Rng rng(seed);
    auto idx = rng.sample_without_replacement(static_cast<size_t>(bands),
                                              static_cast<size_t>(count));
    p.channels.assign(idx.begin(), idx.end());
    return p;
}

Matrix build_meta_features(const HsiCube& cube, const std::vector<ScoreMap>& base_maps,
                           const Passthrough& pass, std::vector<NormStat>* stats_out) {
    if (base_maps.empty())
        throw ParamError("build_meta_features: need at least one base map");
    const int npix = cube.pixel_count();
    for (size_t i = 0; i < base_maps.size(); ++i)
        if (base_maps[i].width != cube.width || base_maps[i].height != cube.height)
            throw ShapeError("build_meta_features: base map " + std::to_string(i) +
                             " does not match the cube dimensions");

    int pass_cols;
    if (pass.kind == Passthrough::Kind::TenPcs) {
        pass_cols = 10;
    } else {
        if (pass.channels.empty())
            throw ParamError("build_meta_features: random channels not drawn");
        for (int c : pass.channels)
            if (c < 0 || c >= cube.bands)
                throw ShapeError("build_meta_features: channel " + std::to_string(c) +
                                 " out of range for " + std::to_string(cube.bands) +
                                 " bands");
        pass_cols = static_cast<int>(pass.channels.size());
    }

    const int cols = static_cast<int>(base_maps.size()) + pass_cols;
    Matrix features(npix, cols);
    if (stats_out) stats_out->assign(static_cast<size_t>(cols), {});

    auto put_normalized = [&](int col, const std::vector<double>& values) {
        if (stats_out) {
            auto [lo, hi] = std::minmax_element(values.begin(), values.end());
            (*stats_out)[static_cast<size_t>(col)] = {*lo, *hi};
        }
        std::vector<double> norm = normalize_minmax(values);
        for (int p = 0; p < npix; ++p) features(p, col) = norm[static_cast<size_t>(p)];
    };

    for (size_t i = 0; i < base_maps.size(); ++i)
        put_normalized(static_cast<int>(i), base_maps[i].scores);

    if (pass.kind == Passthrough::Kind::TenPcs) {
        PcaModel pca = pca_fit(cube, 10);
        Matrix proj = pca_transform(pca, cube);
        for (int j = 0; j < 10; ++j)
            put_normalized(static_cast<int>(base_maps.size()) + j,
                           component_image(proj, j));
    } else {
        std::vector<double> band(static_cast<size_t>(npix));
        for (int j = 0; j < pass_cols; ++j) {
            int b = pass.channels[static_cast<size_t>(j)];
            for (int p = 0; p < npix; ++p)
                band[static_cast<size_t>(p)] =
                    cube.data[static_cast<size_t>(p) * cube.bands + b];
            put_normalized(static_cast<int>(base_maps.size()) + j, band);
        }
    }
    return features;
}

namespace {

void check_bases(const std::vector<DetectorSpec>& bases) {
    if (bases.empty() || bases.size() > 4)
        throw ParamError("stacking: base specs must number 1..4");
    for (size_t i = 0; i < bases.size(); ++i)
        for (size_t j = i + 1; j < bases.size(); ++j)
            if (bases[i].id == bases[j].id)
                throw ParamError("stacking: base detector ids must be distinct");
}

Matrix pooled_features(const std::vector<SceneWithMaps>& scenes,
                       const std::vector<DetectorSpec>& bases, const Passthrough& pass,
                       std::vector<NormStat>* first_scene_stats) {
    Eigen::Index total = 0;
    for (const auto& s : scenes) {
        if (!s.cube)
            throw ParamError("stacking: null cube in training scene");
        if (s.base_maps.size() != bases.size())
            throw ShapeError("stacking: scene has " + std::to_string(s.base_maps.size()) +
                             " base maps for " + std::to_string(bases.size()) + " specs");
        total += s.cube->pixel_count();
    }
    Matrix pooled;
    Eigen::Index row = 0;
    for (size_t i = 0; i < scenes.size(); ++i) {
        Matrix f = build_meta_features(*scenes[i].cube, scenes[i].base_maps, pass,
                                       i == 0 ? first_scene_stats : nullptr);
        if (pooled.size() == 0) pooled.resize(total, f.cols());
        pooled.middleRows(row, f.rows()) = f;
        row += f.rows();
    }
    return pooled;
}

} // namespace

StackModel uge_fit(const std::vector<SceneWithMaps>& scenes,
                   const std::vector<DetectorSpec>& bases, int gmm_k, uint64_t seed) {
    if (scenes.empty())
        throw ParamError("uge_fit: need at least one training scene");
    check_bases(bases);
    if (gmm_k < 1)
        throw ParamError("uge_fit: gmm_k must be >= 1");

    StackModel model;
    model.base_specs = bases;
    model.meta_kind = MetaKind::Gmm;
    model.passthrough = make_ten_pcs();
    model.gmm_k = gmm_k;
    model.seed = seed;
    Matrix features = pooled_features(scenes, bases, model.passthrough,
                                      &model.fit_norm_stats);
    model.gmm = gmm_fit(features, gmm_k, seed);
    return model;
}

StackModel mge_fit(const std::vector<SceneWithMaps>& scenes,
                   const std::vector<const TruthMask*>& masks,
                   const std::vector<DetectorSpec>& bases, uint64_t seed) {
    if (scenes.empty())
        throw ParamError("mge_fit: need at least one training scene");
    if (masks.size() != scenes.size())
        throw ShapeError("mge_fit: mask count != scene count");
    check_bases(bases);

    int bands = 0;
    for (const auto& s : scenes) {
        if (!s.cube)
            throw ParamError("mge_fit: null cube in training scene");
        bands = bands == 0 ? s.cube->bands : std::min(bands, s.cube->bands);
    }

    StackModel model;
    model.base_specs = bases;
    model.meta_kind = MetaKind::Rf;
    model.passthrough = make_random_channels(bands, seed);
    model.seed = seed;

    Matrix features = pooled_features(scenes, bases, model.passthrough,
                                      &model.fit_norm_stats);
    std::vector<uint8_t> labels;
    labels.reserve(static_cast<size_t>(features.rows()));
    for (size_t i = 0; i < scenes.size(); ++i) {
        if (!masks[i] || masks[i]->width != scenes[i].cube->width ||
            masks[i]->height != scenes[i].cube->height)
            throw ShapeError("mge_fit: mask " + std::to_string(i) +
                             " does not match its cube");
        labels.insert(labels.end(), masks[i]->labels.begin(), masks[i]->labels.end());
    }
    model.rf = rf_fit(features, labels, seed);
    return model;
}

ScoreMap stack_apply_maps(const StackModel& model, const HsiCube& cube,
                          const std::vector<ScoreMap>& base_maps) {
    if (base_maps.size() != model.base_specs.size())
        throw ShapeError("stack_apply: expected " +
                         std::to_string(model.base_specs.size()) + " base maps, got " +
                         std::to_string(base_maps.size()));
    Matrix features = build_meta_features(cube, base_maps, model.passthrough);

    ScoreMap out;
    out.width = cube.width;
    out.height = cube.height;
    if (model.meta_kind == MetaKind::Gmm) {
        out.source = "uge_ad";
        Vector nll = gmm_nll_all(model.gmm, features);
        out.scores.assign(nll.data(), nll.data() + nll.size());
    } else {
        out.source = "mge_ad";
        Vector proba = rf_proba_all(model.rf, features);
        out.scores.assign(proba.data(), proba.data() + proba.size());
    }
    return out;
}

ScoreMap stack_apply(const StackModel& model, const HsiCube& cube) {
    std::vector<ScoreMap> maps;
    maps.reserve(model.base_specs.size());
    for (const auto& spec : model.base_specs) {
        try {
            maps.push_back(detect(cube, spec));
        } catch (const Error& e) {
            throw Error("stack_apply: base detector '" + to_string(spec.id) +
                        "' failed: " + e.what());
        }
    }
    return stack_apply_maps(model, cube, maps);
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

std::string stack_model_to_text(const StackModel& model) {
    std::ostringstream out;
    out << "hsad stack-model v1\n";
    out << "meta_kind = " << (model.meta_kind == MetaKind::Gmm ? "gmm" : "rf") << "\n";
    out << "gmm_k = " << model.gmm_k << "\n";
    out << "seed = " << model.seed << "\n";
    out << "norm_policy = scene-local\n";
    out << "base_count = " << model.base_specs.size() << "\n";
    for (size_t i = 0; i < model.base_specs.size(); ++i)
        out << "base " << i << " = " << canonical_string(model.base_specs[i]) << "\n";

    out << "passthrough kind = "
        << (model.passthrough.kind == Passthrough::Kind::TenPcs ? "ten_pcs"
                                                                : "random_channels")
        << "\n";
    out << "passthrough seed = " << model.passthrough.seed << "\n";
    out << "passthrough channel_count = " << model.passthrough.channel_count << "\n";
    if (!model.passthrough.channels.empty()) {
        out << "passthrough channels =";
        for (int c : model.passthrough.channels) out << " " << c;
        out << "\n";
    }

    out << "norm_stat_count = " << model.fit_norm_stats.size() << "\n";
    for (size_t i = 0; i < model.fit_norm_stats.size(); ++i)
        out << "norm_stat " << i << " = " << fmt(model.fit_norm_stats[i].lo) << " "
            << fmt(model.fit_norm_stats[i].hi) << "\n";

    if (model.meta_kind == MetaKind::Gmm) {
        out << "gmm k = " << model.gmm.k << "\n";
        out << "gmm dim = " << model.gmm.dim << "\n";
        out << "gmm weights =";
        for (int c = 0; c < model.gmm.k; ++c) out << " " << fmt(model.gmm.weights(c));
        out << "\n";
        for (int c = 0; c < model.gmm.k; ++c) {
            out << "gmm mean " << c << " =";
            for (int j = 0; j < model.gmm.dim; ++j)
                out << " " << fmt(model.gmm.means[static_cast<size_t>(c)](j));
            out << "\n";
            out << "gmm cov " << c << " =";
            const Matrix& cov = model.gmm.covariances[static_cast<size_t>(c)];
            for (int r = 0; r < model.gmm.dim; ++r)
                for (int j = 0; j < model.gmm.dim; ++j) out << " " << fmt(cov(r, j));
            out << "\n";
        }
    } else {
        out << "rf tree_count = " << model.rf.tree_count << "\n";
        out << "rf dim = " << model.rf.dim << "\n";
        for (int t = 0; t < model.rf.tree_count; ++t) {
            const auto& tree = model.rf.trees[static_cast<size_t>(t)];
            out << "rf tree " << t << " = " << tree.size();
            for (const auto& node : tree)
                out << " ; " << node.feature << " " << fmt(node.threshold) << " "
                    << node.left << " " << node.right << " " << int(node.vote);
            out << "\n";
        }
    }
    return out.str();
}

namespace {

std::pair<std::string, std::string> split_kv(const std::string& line) {
    size_t eq = line.find('=');
    if (eq == std::string::npos)
        throw FormatError("stack model: expected 'key = value' line: " + line);
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t");
        size_t b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    return {trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

} // namespace

StackModel stack_model_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "hsad stack-model v1")
        throw FormatError("stack model: bad or missing header line");

    StackModel model;
    model.base_specs.clear();
    std::vector<Vector> means;
    std::vector<Matrix> covs;
    int gmm_k = 0, gmm_dim = 0;
    int rf_trees = 0;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto [key, value] = split_kv(line);
        std::istringstream vs(value);
        if (key == "meta_kind") {
            if (value == "gmm")
                model.meta_kind = MetaKind::Gmm;
            else if (value == "rf")
                model.meta_kind = MetaKind::Rf;
            else
                throw FormatError("stack model: unknown meta_kind '" + value + "'");
        } else if (key == "gmm_k") {
            model.gmm_k = std::stoi(value);
        } else if (key == "seed") {
            model.seed = std::stoull(value);
        } else if (key == "norm_policy") {
            if (value != "scene-local")
                throw FormatError("stack model: unsupported norm_policy '" + value + "'");
        } else if (key == "base_count") {
            model.base_specs.reserve(std::stoul(value));
        } else if (key.rfind("base ", 0) == 0) {
            model.base_specs.push_back(parse_spec(value));
        } else if (key == "passthrough kind") {
            model.passthrough.kind = value == "ten_pcs"
                                         ? Passthrough::Kind::TenPcs
                                         : Passthrough::Kind::RandomChannels;
            if (value != "ten_pcs" && value != "random_channels")
                throw FormatError("stack model: unknown passthrough kind '" + value + "'");
        } else if (key == "passthrough seed") {
            model.passthrough.seed = std::stoull(value);
        } else if (key == "passthrough channel_count") {
            model.passthrough.channel_count = std::stoi(value);
        } else if (key == "passthrough channels") {
            model.passthrough.channels.clear();
            int c;
            while (vs >> c) model.passthrough.channels.push_back(c);
        } else if (key == "norm_stat_count") {
            model.fit_norm_stats.reserve(std::stoul(value));
        } else if (key.rfind("norm_stat ", 0) == 0) {
            NormStat st;
            if (!(vs >> st.lo >> st.hi))
                throw FormatError("stack model: bad norm_stat line");
            model.fit_norm_stats.push_back(st);
        } else if (key == "gmm k") {
            gmm_k = std::stoi(value);
        } else if (key == "gmm dim") {
            gmm_dim = std::stoi(value);
        } else if (key == "gmm weights") {
            model.gmm.weights.resize(gmm_k);
            for (int c = 0; c < gmm_k; ++c)
                if (!(vs >> model.gmm.weights(c)))
                    throw FormatError("stack model: bad gmm weights line");
        } else if (key.rfind("gmm mean ", 0) == 0) {
            Vector mu(gmm_dim);
            for (int j = 0; j < gmm_dim; ++j)
                if (!(vs >> mu(j)))
                    throw FormatError("stack model: bad gmm mean line");
            means.push_back(std::move(mu));
        } else if (key.rfind("gmm cov ", 0) == 0) {
            Matrix cov(gmm_dim, gmm_dim);
            for (int r = 0; r < gmm_dim; ++r)
                for (int j = 0; j < gmm_dim; ++j)
                    if (!(vs >> cov(r, j)))
                        throw FormatError("stack model: bad gmm cov line");
            covs.push_back(std::move(cov));
        } else if (key == "rf tree_count") {
            rf_trees = std::stoi(value);
            model.rf.tree_count = rf_trees;
            model.rf.trees.resize(static_cast<size_t>(rf_trees));
        } else if (key == "rf dim") {
            model.rf.dim = std::stoi(value);
        } else if (key.rfind("rf tree ", 0) == 0) {
            int t = std::stoi(key.substr(8));
            if (t < 0 || t >= rf_trees)
                throw FormatError("stack model: rf tree index out of range");
            size_t node_count = 0;
            vs >> node_count;
            auto& tree = model.rf.trees[static_cast<size_t>(t)];
            tree.reserve(node_count);
            std::string sep;
            for (size_t nidx = 0; nidx < node_count; ++nidx) {
                RandomForest::Node node;
                int vote;
                if (!(vs >> sep) || sep != ";" ||
                    !(vs >> node.feature >> node.threshold >> node.left >> node.right >>
                      vote))
                    throw FormatError("stack model: bad rf tree line");
                node.vote = static_cast<uint8_t>(vote);
                tree.push_back(node);
            }
        } else {
            throw FormatError("stack model: unknown key '" + key + "'");
        }
    }

    if (model.meta_kind == MetaKind::Gmm) {
        if (model.passthrough.kind != Passthrough::Kind::TenPcs)
            throw FormatError("stack model: gmm meta requires ten_pcs passthrough");
        if (static_cast<int>(means.size()) != gmm_k ||
            static_cast<int>(covs.size()) != gmm_k || gmm_k < 1)
            throw FormatError("stack model: incomplete gmm parameters");
        model.gmm.k = gmm_k;
        model.gmm.dim = gmm_dim;
        model.gmm.means = std::move(means);
        model.gmm.covariances = std::move(covs);
        model.gmm.refresh_factorizations();
    } else {
        if (model.passthrough.kind != Passthrough::Kind::RandomChannels)
            throw FormatError("stack model: rf meta requires random_channels passthrough");
        if (model.passthrough.channels.empty())
            throw FormatError("stack model: rf meta without drawn channels");
        if (rf_trees < 1)
            throw FormatError("stack model: incomplete rf parameters");
    }
    if (model.base_specs.empty() || model.base_specs.size() > 4)
        throw FormatError("stack model: base specs must number 1..4");
    return model;
}

void save_stack_model(const StackModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot open for writing: " + path);
    out << stack_model_to_text(model);
    if (!out)
        throw DataError("write failed: " + path);
}

StackModel load_stack_model(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open stack model: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return stack_model_from_text(ss.str());
}

} // namespace hsad
