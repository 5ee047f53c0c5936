#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include "annofix/io.hpp"

namespace annofix {

namespace {

std::uint8_t to_byte(double v) {
  if (v <= 0.0) return 0;
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

}  // namespace

RasterImage load_png(const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot read PNG '" + path + "': " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG '" + path + "': " + image.message);
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  RasterImage img;
  const int nch = color ? 3 : 1;
  for (int ch = 0; ch < nch; ++ch) img.channels.emplace_back(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * w + x) * nch;
      for (int ch = 0; ch < nch; ++ch) {
        img.channels[ch].at(x, y) = buffer[base + ch] / 255.0;
      }
    }
  }
  return img;
}

void save_png(const std::string& path, const RasterImage& img) {
  const int w = img.width();
  const int h = img.height();
  const int nch = img.num_channels() == 3 ? 3 : 1;
  std::vector<std::uint8_t> buffer(static_cast<std::size_t>(w) * h * nch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * w + x) * nch;
      for (int ch = 0; ch < nch; ++ch) {
        buffer[base + ch] = to_byte(img.channels[ch].at(x, y));
      }
    }
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = nch == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path + "': " + image.message);
  }
}

void save_png_gray(const std::string& path, const ScalarGrid& gray) {
  save_png(path, RasterImage(gray));
}

void save_png_mask(const std::string& path, const BinaryMask& mask) {
  ScalarGrid g(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.size(); ++i) g.values[i] = mask.bits[i] ? 1.0 : 0.0;
  save_png_gray(path, g);
}

BinaryMask load_png_mask(const std::string& path) {
  const RasterImage img = load_png(path);
  const ScalarGrid gray = img.num_channels() == 1 ? img.channels[0] : to_intensity(img);
  BinaryMask mask(gray.width, gray.height, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) mask.bits[i] = gray.values[i] > 0.0 ? 1 : 0;
  return mask;
}

}  // namespace annofix
