#include "blendforge/png_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <png.h>

#include "blendforge/error.hpp"
#include "blendforge/geometry.hpp"

namespace blendforge {

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::vector<std::uint8_t> encode_raw(const std::vector<std::uint8_t>& pixels,
                                     int width, int height, png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;

  // Upper bound instead of a sizing pass, which would compress twice.
  png_alloc_size_t size = PNG_IMAGE_PNG_SIZE_MAX(image);
  std::vector<std::uint8_t> bytes(size);
  if (!png_image_write_to_memory(&image, bytes.data(), &size, 0, pixels.data(), 0,
                                 nullptr)) {
    throw Error(ErrorCode::Io, fmt::format("PNG encode failed: {}", image.message));
  }
  bytes.resize(size);
  return bytes;
}

std::vector<std::uint8_t> decode_raw(const std::vector<std::uint8_t>& bytes,
                                     png_uint_32 format, int& width, int& height) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::Io, fmt::format("PNG decode failed: {}", image.message));
  }
  image.format = format;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::Io, fmt::format("PNG decode failed: {}", image.message));
  }
  width = static_cast<int>(image.width);
  height = static_cast<int>(image.height);
  return pixels;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
  const std::size_t n = img.pixel_count();
  std::vector<std::uint8_t> pixels(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) pixels[i * 3 + c] = to_byte(img.channel(c)[i]);
  }
  return encode_raw(pixels, img.width(), img.height(), PNG_FORMAT_RGB);
}

ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes) {
  int w = 0, h = 0;
  const auto pixels = decode_raw(bytes, PNG_FORMAT_RGB, w, h);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> samples(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) samples[c * n + i] = pixels[i * 3 + c] / 255.0;
  }
  return ImageBuffer(w, h, std::move(samples));
}

std::vector<std::uint8_t> encode_mask_png(const Mask& mask) {
  std::vector<std::uint8_t> pixels(mask.values().size());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = to_byte(mask.values()[i]);
  return encode_raw(pixels, mask.width(), mask.height(), PNG_FORMAT_GRAY);
}

Mask decode_mask_png(const std::vector<std::uint8_t>& bytes) {
  int w = 0, h = 0;
  const auto pixels = decode_raw(bytes, PNG_FORMAT_GRAY, w, h);
  std::vector<double> values(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) values[i] = pixels[i] / 255.0;
  return Mask(w, h, std::move(values));
}

ImageBuffer quantize_8bit(const ImageBuffer& img) {
  std::vector<double> samples(img.samples().begin(), img.samples().end());
  for (double& v : samples) v = to_byte(v) / 255.0;
  return ImageBuffer(img.width(), img.height(), std::move(samples));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LocatedError(ErrorCode::Io, fmt::format("cannot open {}", path.string()),
                       path.string());
  }
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw LocatedError(ErrorCode::Io, fmt::format("cannot write {}", path.string()),
                       path.string());
  }
}

ImageBuffer read_png(const std::filesystem::path& path) {
  try {
    return decode_png(read_file_bytes(path));
  } catch (const LocatedError&) {
    throw;
  } catch (const Error& e) {
    throw LocatedError(e.code(), fmt::format("{}: {}", path.string(), e.what()),
                       path.string());
  }
}

void write_png(const std::filesystem::path& path, const ImageBuffer& img) {
  write_file_bytes(path, encode_png(img));
}

Mask read_mask_png(const std::filesystem::path& path) {
  return decode_mask_png(read_file_bytes(path));
}

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
  write_file_bytes(path, encode_mask_png(mask));
}

}  // namespace blendforge
