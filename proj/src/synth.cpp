#include "hsad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hsad/errors.hpp"
#include "hsad/linalg.hpp"
#include "hsad/rng.hpp"

namespace hsad {

RegionLayout layout_from_string(const std::string& name) {
    if (name == "uniform") return RegionLayout::Uniform;
    if (name == "split") return RegionLayout::Split;
    throw ParamError("unknown region layout '" + name + "' (valid: uniform, split)");
}

std::string to_string(RegionLayout layout) {
    return layout == RegionLayout::Uniform ? "uniform" : "split";
}

namespace {

void validate(const SceneSpec& s) {
    if (s.width < 1 || s.height < 1 || s.bands < 2)
        throw ParamError("gen_scene: need width >= 1, height >= 1, bands >= 2");
    if (s.endmember_count < 1)
        throw ParamError("gen_scene: endmember count must be >= 1");
    if (s.noise_sigma < 0.0)
        throw ParamError("gen_scene: noise sigma must be >= 0");
    if (s.anomaly_count < 0 || s.anomaly_size < 0)
        throw ParamError("gen_scene: anomaly count and size must be >= 0");
    if (s.anomaly_count > 0 && s.anomaly_size < 1)
        throw ParamError("gen_scene: anomaly size must be >= 1 when anomalies are requested");
    double budget = 0.05 * s.width * s.height;
    double used = static_cast<double>(s.anomaly_count) * s.anomaly_size * s.anomaly_size;
    if (used > budget)
        throw ParamError("gen_scene: anomalies cover " + std::to_string(used) +
                         " pixels, more than 5% of the scene (" +
                         std::to_string(budget) + ")");
    if (s.anomaly_count > 0 && s.endmember_count >= s.bands)
        throw ParamError("gen_scene: implants need endmember count < bands so an "
                         "orthogonal offset direction exists");
    if (s.layout == RegionLayout::Split && s.endmember_count < 2)
        throw ParamError("gen_scene: split layout needs at least 2 endmembers");
}

// Smooth positive spectral curve: baseline plus 2-3 Gaussian bumps.
Vector random_endmember(int bands, Rng& rng) {
    Vector e = Vector::Constant(bands, 0.2);
    int bumps = 2 + static_cast<int>(rng.uniform_int(2));
    for (int b = 0; b < bumps; ++b) {
        double amp = rng.uniform(0.4, 1.2);
        double center = rng.uniform(0.0, bands - 1.0);
        double width = rng.uniform(bands / 10.0, bands / 3.0);
        for (int i = 0; i < bands; ++i) {
            double z = (i - center) / width;
            e(i) += amp * std::exp(-0.5 * z * z);
        }
    }
    return e;
}

// Orthonormal basis of the endmember span (rows).
Matrix span_basis(const Matrix& endmembers) {
    const int bands = static_cast<int>(endmembers.cols());
    Matrix basis(endmembers.rows(), bands);
    int rank = 0;
    for (Eigen::Index e = 0; e < endmembers.rows(); ++e) {
        Vector v = endmembers.row(e).transpose();
        for (int j = 0; j < rank; ++j)
            v -= basis.row(j).transpose() * basis.row(j).dot(v.transpose());
        double norm = v.norm();
        if (norm > 1e-10) basis.row(rank++) = v.transpose() / norm;
    }
    return basis.topRows(rank);
}

// Unit implant direction: equal parts inside the endmember span (a shifted
// mixing ratio, visible to spatial detectors) and orthogonal to it
// (guaranteed out-of-simplex energy for subspace detectors). Every block
// draws its own direction so implants do not form one tight spectral
// cluster.
Vector implant_direction(const Matrix& basis, Rng& rng) {
    const int bands = static_cast<int>(basis.cols());
    const int rank = static_cast<int>(basis.rows());
    for (int attempt = 0; attempt < 64; ++attempt) {
        Vector g(bands);
        for (int i = 0; i < bands; ++i) g(i) = rng.normal();
        Vector in_span = Vector::Zero(bands);
        for (int j = 0; j < rank; ++j)
            in_span += basis.row(j).transpose() * basis.row(j).dot(g.transpose());
        Vector ortho = g - in_span;
        double no = ortho.norm();
        double ns = in_span.norm();
        if (no < 1e-8) continue;
        ortho /= no;
        if (ns < 1e-12) return ortho;
        in_span /= ns;
        return (ortho + in_span) * (1.0 / std::sqrt(2.0));
    }
    throw GenError("gen_scene: could not find a direction orthogonal to the endmembers");
}

// Smooth random field with approximately standard normal marginals: a sum
// of random plane waves with wavelengths comparable to the image size.
struct WaveField {
    struct Wave {
        double kx, ky, phase;
    };
    std::vector<Wave> waves;
    double scale;

    static WaveField make(int width, int height, Rng& rng) {
        WaveField f;
        const int count = 16;
        double base = std::max(4.0, 0.2 * std::min(width, height));
        double top = std::max(8.0, 0.7 * std::min(width, height));
        f.waves.resize(count);
        for (auto& w : f.waves) {
            double wavelength = rng.uniform(base, top);
            double theta = rng.uniform(0.0, 2.0 * M_PI);
            double k = 2.0 * M_PI / wavelength;
            w.kx = k * std::cos(theta);
            w.ky = k * std::sin(theta);
            w.phase = rng.uniform(0.0, 2.0 * M_PI);
        }
        f.scale = std::sqrt(2.0 / count);
        return f;
    }

    double at(int x, int y) const {
        double v = 0.0;
        for (const auto& w : waves) v += std::cos(w.kx * x + w.ky * y + w.phase);
        return scale * v;
    }
};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Dirichlet(1,..,1) over `parts` weights from parts-1 uniforms by stick
// breaking with Beta(1, parts-i) quantiles.
void stick_break(const std::vector<double>& uniforms, int parts,
                 std::vector<double>& out) {
    out.assign(static_cast<size_t>(parts), 0.0);
    double remaining = 1.0;
    for (int i = 0; i < parts - 1; ++i) {
        double u = std::clamp(uniforms[static_cast<size_t>(i)], 1e-12, 1.0 - 1e-12);
        double v = 1.0 - std::pow(1.0 - u, 1.0 / (parts - 1 - i));
        out[static_cast<size_t>(i)] = remaining * v;
        remaining *= (1.0 - v);
    }
    out[static_cast<size_t>(parts - 1)] = remaining;
}

} // namespace

std::pair<HsiCube, TruthMask> gen_scene(const SceneSpec& spec) {
    validate(spec);
    const int w = spec.width, h = spec.height, bands = spec.bands;
    const int npix = w * h;
    const int e_count = spec.endmember_count;
    Rng rng(spec.seed);

    Matrix endmembers(e_count, bands);
    for (int e = 0; e < e_count; ++e)
        endmembers.row(e) = random_endmember(bands, rng).transpose();
    Matrix basis = span_basis(endmembers);

    // non-overlapping square placements (top-left corners), one implant
    // direction per block
    std::vector<std::pair<int, int>> blocks;
    std::vector<Vector> block_dirs;
    const int s = spec.anomaly_size;
    for (int a = 0; a < spec.anomaly_count; ++a) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            int bx = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(w - s + 1)));
            int by = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(h - s + 1)));
            bool overlaps = false;
            for (auto [ox, oy] : blocks)
                if (bx < ox + s && ox < bx + s && by < oy + s && oy < by + s) {
                    overlaps = true;
                    break;
                }
            if (!overlaps) {
                blocks.emplace_back(bx, by);
                placed = true;
            }
        }
        if (!placed)
            throw GenError("gen_scene: failed to place anomaly " + std::to_string(a + 1) +
                           " after 1000 attempts; reduce anomaly count or size");
        block_dirs.push_back(implant_direction(basis, rng));
    }

    // smooth abundance fields (one per stick-breaking stage)
    int field_count = std::max(0, e_count - 1);
    std::vector<WaveField> fields;
    fields.reserve(static_cast<size_t>(field_count));
    for (int f = 0; f < field_count; ++f) fields.push_back(WaveField::make(w, h, rng));

    // i.i.d. band noise for every pixel, drawn independently of the anomaly
    // configuration so that only `anomaly_contrast` differs between scenes
    // that share a seed
    std::vector<double> noise(static_cast<size_t>(npix) * bands, 0.0);
    if (spec.noise_sigma > 0.0)
        for (auto& v : noise) v = rng.normal(0.0, spec.noise_sigma);

    // endmember subsets per region
    int left_count = e_count;
    int left_offset = 0, right_offset = 0, right_count = e_count;
    if (spec.layout == RegionLayout::Split) {
        left_count = (e_count + 1) / 2;
        right_offset = left_count;
        right_count = e_count - left_count;
    }

    std::vector<double> uniforms(static_cast<size_t>(std::max(1, field_count)));
    std::vector<double> abundance;
    auto mixture_at = [&](int x, int y) {
        int base, cnt;
        if (spec.layout == RegionLayout::Split && x >= w / 2) {
            base = right_offset;
            cnt = right_count;
        } else {
            base = left_offset;
            cnt = left_count;
        }
        Vector mix = Vector::Zero(bands);
        if (cnt == 1) {
            mix = endmembers.row(base).transpose();
            return mix;
        }
        for (int f = 0; f < cnt - 1; ++f)
            uniforms[static_cast<size_t>(f)] = normal_cdf(fields[static_cast<size_t>(f)].at(x, y));
        stick_break(uniforms, cnt, abundance);
        for (int e = 0; e < cnt; ++e)
            mix += abundance[static_cast<size_t>(e)] * endmembers.row(base + e).transpose();
        return mix;
    };

    HsiCube cube;
    cube.width = w;
    cube.height = h;
    cube.bands = bands;
    cube.name = "synth-" + std::to_string(spec.seed);
    cube.data.resize(static_cast<size_t>(npix) * bands);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            Vector mix = mixture_at(x, y);
            size_t off = (static_cast<size_t>(y) * w + x) * bands;
            for (int b = 0; b < bands; ++b)
                cube.data[off + b] = mix(b) + noise[off + b];
        }
    }

    TruthMask mask;
    mask.width = w;
    mask.height = h;
    mask.labels.assign(static_cast<size_t>(npix), 0);

    for (size_t blk = 0; blk < blocks.size(); ++blk) {
        auto [bx, by] = blocks[blk];
        // the block's dedicated spectrum: local background mixture plus the
        // implant offset
        Vector base = mixture_at(bx, by) + spec.anomaly_contrast * block_dirs[blk];
        for (int dy = 0; dy < s; ++dy) {
            for (int dx = 0; dx < s; ++dx) {
                int x = bx + dx, y = by + dy;
                size_t off = (static_cast<size_t>(y) * w + x) * bands;
                for (int b = 0; b < bands; ++b)
                    cube.data[off + b] = base(b) + noise[off + b];
                mask.labels[static_cast<size_t>(y) * w + x] = 1;
            }
        }
    }

    cube.validate();
    mask.validate();
    return {std::move(cube), std::move(mask)};
}

} // namespace hsad
