#pragma once

#include <string>

#include "hsad/cube.hpp"

namespace hsad {

enum class ScoreMapFormat { FlatF64, Pgm16 };

ScoreMapFormat scoremap_format_from_string(const std::string& name);

// flat-f64: 16-byte header (magic "HSAD", u32 width, u32 height, u32
// reserved, little endian) followed by width*height little-endian doubles.
// pgm16: P5 maxval 65535, min-max scaled; constant maps write all zeros.
void save_scoremap(const ScoreMap& map, const std::string& path, ScoreMapFormat format);

ScoreMap load_scoremap_flat(const std::string& path);

} // namespace hsad
