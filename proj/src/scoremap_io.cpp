#include "hsad/scoremap_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hsad/errors.hpp"

namespace hsad {

namespace {

constexpr char kMagic[4] = {'H', 'S', 'A', 'D'};

void put_u32_le(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32_le(const char* p) {
    return static_cast<uint32_t>(static_cast<unsigned char>(p[0])) |
           (static_cast<uint32_t>(static_cast<unsigned char>(p[1])) << 8) |
           (static_cast<uint32_t>(static_cast<unsigned char>(p[2])) << 16) |
           (static_cast<uint32_t>(static_cast<unsigned char>(p[3])) << 24);
}

bool host_is_little_endian() {
    uint32_t v = 1;
    char c;
    std::memcpy(&c, &v, 1);
    return c == 1;
}

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw DataError("write failed: " + path);
}

} // namespace

ScoreMapFormat scoremap_format_from_string(const std::string& name) {
    if (name == "flat-f64" || name == "f64") return ScoreMapFormat::FlatF64;
    if (name == "pgm16" || name == "pgm") return ScoreMapFormat::Pgm16;
    throw ParamError("unknown score map format '" + name +
                     "' (valid: flat-f64, pgm16)");
}

void save_scoremap(const ScoreMap& map, const std::string& path, ScoreMapFormat format) {
    map.validate();
    if (format == ScoreMapFormat::FlatF64) {
        std::string bytes;
        bytes.reserve(16 + map.scores.size() * 8);
        bytes.append(kMagic, 4);
        put_u32_le(bytes, static_cast<uint32_t>(map.width));
        put_u32_le(bytes, static_cast<uint32_t>(map.height));
        put_u32_le(bytes, 0); // reserved
        for (double v : map.scores) {
            char buf[8];
            std::memcpy(buf, &v, 8);
            if (!host_is_little_endian()) std::reverse(buf, buf + 8);
            bytes.append(buf, 8);
        }
        write_bytes(path, bytes);
        return;
    }

    // pgm16
    double lo = *std::min_element(map.scores.begin(), map.scores.end());
    double hi = *std::max_element(map.scores.begin(), map.scores.end());
    bool constant = hi == lo;
    std::ostringstream head;
    head << "P5\n";
    if (constant) head << "# hsad: constant score map, degenerate scaling\n";
    head << map.width << " " << map.height << "\n65535\n";
    std::string bytes = head.str();
    bytes.reserve(bytes.size() + map.scores.size() * 2);
    for (double v : map.scores) {
        uint16_t q = 0;
        if (!constant)
            q = static_cast<uint16_t>(std::llround((v - lo) / (hi - lo) * 65535.0));
        bytes.push_back(static_cast<char>((q >> 8) & 0xff)); // PGM is big endian
        bytes.push_back(static_cast<char>(q & 0xff));
    }
    write_bytes(path, bytes);
}

ScoreMap load_scoremap_flat(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open score map: " + path);
    in.seekg(0, std::ios::end);
    std::streamoff size = in.tellg();
    in.seekg(0, std::ios::beg);
    if (size < 16)
        throw FormatError("score map file too small: " + path);
    std::vector<char> bytes(static_cast<size_t>(size));
    in.read(bytes.data(), size);
    if (!in)
        throw DataError("read failed: " + path);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError("bad magic in score map file: " + path);
    uint32_t w = get_u32_le(bytes.data() + 4);
    uint32_t h = get_u32_le(bytes.data() + 8);
    size_t count = static_cast<size_t>(w) * h;
    if (bytes.size() != 16 + count * 8)
        throw SizeError("size error: score map " + path + " is " +
                        std::to_string(bytes.size()) + " bytes, expected " +
                        std::to_string(16 + count * 8));
    ScoreMap map;
    map.width = static_cast<int>(w);
    map.height = static_cast<int>(h);
    map.source = std::filesystem::path(path).stem().string();
    map.scores.resize(count);
    for (size_t i = 0; i < count; ++i) {
        char buf[8];
        std::memcpy(buf, bytes.data() + 16 + i * 8, 8);
        if (!host_is_little_endian()) std::reverse(buf, buf + 8);
        std::memcpy(&map.scores[i], buf, 8);
    }
    map.validate();
    return map;
}

} // namespace hsad
