#include "hsad/envi.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "hsad/errors.hpp"

namespace fs = std::filesystem;

namespace hsad {

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// key = value pairs; a value opening with '{' runs to the matching '}'
// (possibly across lines). Keys lowercased with collapsed whitespace.
std::map<std::string, std::string> parse_header(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open header file: " + path);
    std::map<std::string, std::string> fields;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t == "ENVI" || t[0] == ';') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos) continue;
        std::string key = to_lower(trim(t.substr(0, eq)));
        // collapse internal whitespace runs to single spaces
        std::string norm;
        bool sp = false;
        for (char c : key) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                sp = true;
            } else {
                if (sp && !norm.empty()) norm += ' ';
                sp = false;
                norm += c;
            }
        }
        std::string value = trim(t.substr(eq + 1));
        if (!value.empty() && value[0] == '{') {
            while (value.find('}') == std::string::npos && std::getline(in, line))
                value += " " + trim(line);
            size_t close = value.find('}');
            if (close == std::string::npos)
                throw FormatError("format error: unterminated '{' in header field '" +
                                  norm + "' (" + path + ")");
            value = trim(value.substr(1, close - 1));
        }
        fields[norm] = value;
    }
    return fields;
}

long require_int(const std::map<std::string, std::string>& fields,
                 const std::string& key, const std::string& path) {
    auto it = fields.find(key);
    if (it == fields.end())
        throw FormatError("format error: missing header key '" + key + "' (" + path + ")");
    try {
        size_t pos = 0;
        long v = std::stol(it->second, &pos);
        if (pos != it->second.size())
            throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw FormatError("format error: unparsable header key '" + key + "' = '" +
                          it->second + "' (" + path + ")");
    }
}

std::string resolve_raw_path(const std::string& header_path,
                             const std::map<std::string, std::string>& fields) {
    fs::path hdr(header_path);
    std::vector<fs::path> tried;
    auto it = fields.find("data file");
    if (it != fields.end() && !it->second.empty()) {
        fs::path p(it->second);
        if (p.is_relative()) p = hdr.parent_path() / p;
        if (fs::exists(p)) return p.string();
        tried.push_back(p);
    }
    // strip .hdr, then common raw extensions
    fs::path stem = hdr;
    if (to_lower(hdr.extension().string()) == ".hdr") stem.replace_extension();
    std::vector<fs::path> candidates = {stem};
    for (const char* ext : {".img", ".raw", ".dat", ".bsq", ".bil", ".bip", ".bin"}) {
        fs::path p = stem;
        p.replace_extension(ext);
        candidates.push_back(p);
    }
    for (const auto& c : candidates) {
        if (c != hdr && fs::exists(c)) return c.string();
        tried.push_back(c);
    }
    std::string msg = "cannot resolve raw data file for header " + header_path + "; tried:";
    for (const auto& t : tried) msg += " " + t.string();
    throw DataError(msg);
}

std::vector<char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open raw data file: " + path);
    in.seekg(0, std::ios::end);
    std::streamoff size = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<char> bytes(static_cast<size_t>(size));
    if (size > 0) in.read(bytes.data(), size);
    if (!in)
        throw DataError("failed reading raw data file: " + path);
    return bytes;
}

template <typename T>
T byteswap_value(T v) {
    char* p = reinterpret_cast<char*>(&v);
    std::reverse(p, p + sizeof(T));
    return v;
}

// Reads one element at raw index i, honoring element size and byte order.
double element_at(const char* bytes, size_t i, int data_type, bool swap) {
    if (data_type == 4) {
        float f;
        std::memcpy(&f, bytes + i * sizeof(float), sizeof(float));
        if (swap) f = byteswap_value(f);
        return static_cast<double>(f);
    }
    double d;
    std::memcpy(&d, bytes + i * sizeof(double), sizeof(double));
    if (swap) d = byteswap_value(d);
    return d;
}

struct RawGeometry {
    int width, height, bands, data_type;
    std::string interleave;
    bool swap;
    size_t header_offset;
};

RawGeometry read_geometry(const std::map<std::string, std::string>& fields,
                          const std::string& path) {
    RawGeometry g;
    g.width = static_cast<int>(require_int(fields, "samples", path));
    g.height = static_cast<int>(require_int(fields, "lines", path));
    g.bands = static_cast<int>(require_int(fields, "bands", path));
    g.data_type = static_cast<int>(require_int(fields, "data type", path));
    auto il = fields.find("interleave");
    if (il == fields.end())
        throw FormatError("format error: missing header key 'interleave' (" + path + ")");
    g.interleave = to_lower(il->second);
    if (g.interleave != "bsq" && g.interleave != "bil" && g.interleave != "bip")
        throw FormatError("format error: unparsable header key 'interleave' = '" +
                          il->second + "' (" + path + ")");
    long byte_order = require_int(fields, "byte order", path);
    if (byte_order != 0 && byte_order != 1)
        throw FormatError("format error: unparsable header key 'byte order' = " +
                          std::to_string(byte_order) + " (" + path + ")");
    g.swap = byte_order == 1;
    g.header_offset = 0;
    auto off = fields.find("header offset");
    if (off != fields.end())
        g.header_offset = static_cast<size_t>(require_int(fields, "header offset", path));
    return g;
}

// flat index into the raw stream of (pixel p, band b) for each interleave
size_t raw_index(const RawGeometry& g, size_t p, size_t b) {
    size_t npix = static_cast<size_t>(g.width) * g.height;
    size_t y = p / g.width;
    size_t x = p % g.width;
    if (g.interleave == "bip") return p * g.bands + b;
    if (g.interleave == "bil") return (y * g.bands + b) * g.width + x;
    return b * npix + p; // bsq
}

} // namespace

HsiCube load_envi(const std::string& header_path) {
    auto fields = parse_header(header_path);
    RawGeometry g = read_geometry(fields, header_path);
    if (g.data_type != 4 && g.data_type != 5)
        throw FormatError("unsupported data type " + std::to_string(g.data_type) +
                          " in " + header_path + " (supported: 4 = float32, 5 = float64)");
    if (g.width < 1 || g.height < 1 || g.bands < 1)
        throw FormatError("format error: non-positive dimensions in " + header_path);

    std::string raw_path = resolve_raw_path(header_path, fields);
    std::vector<char> bytes = read_file_bytes(raw_path);

    size_t elem = g.data_type == 4 ? 4 : 8;
    size_t count = static_cast<size_t>(g.width) * g.height * g.bands;
    size_t expected = g.header_offset + count * elem;
    if (bytes.size() != expected)
        throw SizeError("size error: raw file " + raw_path + " is " +
                        std::to_string(bytes.size()) + " bytes, expected " +
                        std::to_string(expected) + " (samples*lines*bands*" +
                        std::to_string(elem) + (g.header_offset ? " + offset" : "") + ")");

    HsiCube cube;
    cube.width = g.width;
    cube.height = g.height;
    cube.bands = g.bands;
    cube.name = fs::path(header_path).stem().string();
    cube.data.resize(count);
    const char* payload = bytes.data() + g.header_offset;
    size_t npix = static_cast<size_t>(g.width) * g.height;
    for (size_t p = 0; p < npix; ++p)
        for (size_t b = 0; b < static_cast<size_t>(g.bands); ++b)
            cube.data[p * g.bands + b] =
                element_at(payload, raw_index(g, p, b), g.data_type, g.swap);

    for (size_t i = 0; i < cube.data.size(); ++i)
        if (!std::isfinite(cube.data[i]))
            throw DataError("data error: non-finite value at pixel-major index " +
                            std::to_string(i) + " in " + raw_path);

    auto wl = fields.find("wavelength");
    if (wl != fields.end() && !wl->second.empty()) {
        std::string list = wl->second;
        std::replace(list.begin(), list.end(), ',', ' ');
        std::istringstream ss(list);
        double v;
        while (ss >> v) cube.wavelengths.push_back(v);
        if (cube.wavelengths.size() != static_cast<size_t>(g.bands))
            throw FormatError("format error: wavelength list length " +
                              std::to_string(cube.wavelengths.size()) + " != bands " +
                              std::to_string(g.bands) + " (" + header_path + ")");
    }
    cube.validate();
    return cube;
}

namespace {

std::string strip_hdr(const std::string& header_path) {
    fs::path p(header_path);
    if (to_lower(p.extension().string()) == ".hdr") {
        fs::path raw = p;
        raw.replace_extension();
        return raw.string();
    }
    return header_path + ".raw";
}

void write_file_or_throw(const std::string& path, const char* data, size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot open for writing: " + path);
    out.write(data, static_cast<std::streamsize>(size));
    if (!out)
        throw DataError("write failed: " + path);
}

} // namespace

void save_envi(const HsiCube& cube, const std::string& header_path,
               const std::string& description) {
    cube.validate();
    std::string raw_path = strip_hdr(header_path);

    std::ostringstream hdr;
    hdr << "ENVI\n";
    if (!description.empty()) hdr << "description = {" << description << "}\n";
    hdr << "samples = " << cube.width << "\n";
    hdr << "lines = " << cube.height << "\n";
    hdr << "bands = " << cube.bands << "\n";
    hdr << "header offset = 0\n";
    hdr << "data type = 5\n";
    hdr << "interleave = bip\n";
    hdr << "byte order = 0\n";
    if (!cube.wavelengths.empty()) {
        hdr << "wavelength = {";
        for (size_t i = 0; i < cube.wavelengths.size(); ++i) {
            if (i) hdr << ", ";
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", cube.wavelengths[i]);
            hdr << buf;
        }
        hdr << "}\n";
    }
    std::string header_text = hdr.str();
    write_file_or_throw(header_path, header_text.data(), header_text.size());
    // pixel-major doubles are already in bip order
    write_file_or_throw(raw_path, reinterpret_cast<const char*>(cube.data.data()),
                        cube.data.size() * sizeof(double));
}

TruthMask load_mask(const std::string& header_path) {
    auto fields = parse_header(header_path);
    RawGeometry g = read_geometry(fields, header_path);
    if (g.data_type != 1)
        throw FormatError("unsupported data type " + std::to_string(g.data_type) +
                          " for mask " + header_path + " (expected 1 = 8-bit)");
    std::string raw_path = resolve_raw_path(header_path, fields);
    std::vector<char> bytes = read_file_bytes(raw_path);
    size_t count = static_cast<size_t>(g.width) * g.height * g.bands;
    if (g.bands != 1)
        throw FormatError("mask must have bands = 1: " + header_path);
    if (bytes.size() != g.header_offset + count)
        throw SizeError("size error: mask raw file " + raw_path + " is " +
                        std::to_string(bytes.size()) + " bytes, expected " +
                        std::to_string(g.header_offset + count));
    TruthMask mask;
    mask.width = g.width;
    mask.height = g.height;
    mask.labels.resize(count);
    for (size_t i = 0; i < count; ++i)
        mask.labels[i] = bytes[g.header_offset + i] ? 1 : 0;
    mask.validate();
    return mask;
}

void save_mask(const TruthMask& mask, const std::string& header_path) {
    mask.validate();
    std::string raw_path = strip_hdr(header_path);
    std::ostringstream hdr;
    hdr << "ENVI\n";
    hdr << "samples = " << mask.width << "\n";
    hdr << "lines = " << mask.height << "\n";
    hdr << "bands = 1\n";
    hdr << "header offset = 0\n";
    hdr << "data type = 1\n";
    hdr << "interleave = bip\n";
    hdr << "byte order = 0\n";
    std::string header_text = hdr.str();
    write_file_or_throw(header_path, header_text.data(), header_text.size());
    std::vector<char> bytes(mask.labels.size());
    for (size_t i = 0; i < mask.labels.size(); ++i)
        bytes[i] = mask.labels[i] ? 1 : 0;
    write_file_or_throw(raw_path, bytes.data(), bytes.size());
}

} // namespace hsad
