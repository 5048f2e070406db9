#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "diner/grid.hpp"

namespace diner {

/// Reads PGM (P5), PPM (P6) with maxval 255 or 65535 (16-bit samples are
/// big-endian per the format), or PFM ("Pf"/"PF", negative scale =
/// little-endian, rows bottom-to-top). Values map linearly to [0,1] for
/// PGM/PPM; PFM floats are taken as-is.
Grid read_image(const std::filesystem::path& path);

/// Format chosen by extension: .pgm/.ppm quantize to maxval 65535, .pfm
/// stores 32-bit floats losslessly. Writes go to a temp file first and are
/// renamed into place, so failures leave no partial output.
void write_image(const std::filesystem::path& path, const Grid& img);

/// Like write_image but with an explicit PGM/PPM maxval (255 or 65535).
void write_image_quantized(const std::filesystem::path& path, const Grid& img,
                           unsigned maxval);

/// Whole-file helpers with the same atomic-rename discipline.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// 3D volume as one PFM per frame plus a JSON manifest {"frames": [...]}.
/// Frame paths in the manifest are relative to the manifest directory.
Grid read_volume(const std::filesystem::path& manifest_path);
void write_volume(const std::filesystem::path& manifest_path, const Grid& volume);

} // namespace diner
