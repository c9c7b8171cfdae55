#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "blendforge/image.hpp"

namespace blendforge {

class Mask;

/// 8-bit RGB PNG codec. Samples quantize as round(255 x) / 255. Encoding is
/// deterministic: fixed zlib level, no timestamps or text chunks.
std::vector<std::uint8_t> encode_png(const ImageBuffer& img);
ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes);

/// Masks travel as 8-bit grayscale PNG.
std::vector<std::uint8_t> encode_mask_png(const Mask& mask);
Mask decode_mask_png(const std::vector<std::uint8_t>& bytes);

ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageBuffer& img);
Mask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const Mask& mask);

/// Quantizes to the 8-bit grid without encoding.
ImageBuffer quantize_8bit(const ImageBuffer& img);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes);

}  // namespace blendforge
