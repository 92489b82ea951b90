#pragma once

#include <string>

#include "steglab/image.hpp"

namespace steglab {

/// Reads a PNG or binary PPM (P6) file by extension sniffing on content.
/// Grayscale and alpha PNGs are expanded/flattened to plain RGB.
ByteImage read_image(const std::string& path);

/// Writes a PNG or binary PPM depending on the file extension (.png, .ppm).
/// Both formats round-trip pixel data exactly.
void write_image(const std::string& path, const ByteImage& img);

ByteImage read_ppm(const std::string& path);
void write_ppm(const std::string& path, const ByteImage& img);
ByteImage read_png(const std::string& path);
void write_png(const std::string& path, const ByteImage& img);

/// Center-crops to a square and bilinearly resizes to size x size.
ByteImage crop_resize(const ByteImage& img, int size);

}  // namespace steglab
