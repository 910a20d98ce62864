#pragma once

// Binary PGM/PPM input, PFM and Middlebury .flo output, false-color maps.

#include <string>
#include <vector>

#include "dcm/census.hpp"

namespace dcm {

/// P5 / P6, maxval up to 65535 (two-byte samples are big-endian).
/// Intensities are scaled to [0, 1].
Image read_image(const std::string& path);
Image parse_pnm(const std::string& bytes);

/// 8-bit P5 (one channel) or P6 (three channels); values clamped to [0, 1].
void write_pnm(const std::string& path, const Image& image);
std::string encode_pnm(const Image& image);

/// Float map with one ("Pf") or three ("PF") channels; little-endian,
/// scale -1, rows stored bottom to top.
void write_pfm(const std::string& path, const Image& field);
std::string encode_pfm(const Image& field);
Image read_pfm(const std::string& path);
Image parse_pfm(const std::string& bytes);

/// Two-channel flow field, interleaved per pixel.
void write_flo(const std::string& path, const Image& flow);
std::string encode_flo(const Image& flow);
Image read_flo(const std::string& path);

/// Gray ramp over [lo, hi]; non-finite values become black. Returns RGB.
Image colorize_disparity(const Image& disparity, double lo, double hi);

/// Hue wheel for direction, saturation for magnitude relative to
/// max_magnitude (0: use the field's maximum). Zero flow is white.
Image colorize_flow(const Image& flow, double max_magnitude = 0.0);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace dcm
