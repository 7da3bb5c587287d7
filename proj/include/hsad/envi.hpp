#pragma once

#include <string>

#include "hsad/cube.hpp"

namespace hsad {

// ENVI-style text header + companion raw file. Accepted data types: 4
// (32-bit float) and 5 (64-bit float); interleave bsq|bil|bip; byte order
// 0|1. Data is re-laid out to pixel-major on load.
HsiCube load_envi(const std::string& header_path);

// Writes header (data type 5, bip, byte order 0) + raw file. The raw file
// path is the header path minus its ".hdr" suffix.
void save_envi(const HsiCube& cube, const std::string& header_path,
               const std::string& description = "");

// Masks use the same header convention with data type 1 (8-bit).
TruthMask load_mask(const std::string& header_path);
void save_mask(const TruthMask& mask, const std::string& header_path);

} // namespace hsad
