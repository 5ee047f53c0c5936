#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace annofix {

/// Row-major 2-D grid of doubles; backbone for images, level sets and masks.
struct ScalarGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  ScalarGrid() = default;
  ScalarGrid(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w < 1 || h < 1) throw std::invalid_argument("ScalarGrid: dimensions must be >= 1");
  }

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return values.size(); }
  bool same_dims(int w, int h) const { return width == w && height == h; }
};

/// Signed field; its non-negative region encodes a binary area (H(v) = 1 iff v >= 0).
using LevelSet = ScalarGrid;

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // exactly 0 or 1

  BinaryMask() = default;
  BinaryMask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w < 1 || h < 1) throw std::invalid_argument("BinaryMask: dimensions must be >= 1");
  }

  std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return bits.size(); }
  bool same_dims(int w, int h) const { return width == w && height == h; }

  long count() const {
    long n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
  }
  bool empty_mask() const { return count() == 0; }
};

/// 1 (gray) or 3 (RGB) channels, all dimension-equal, samples in [0,1].
struct RasterImage {
  std::vector<ScalarGrid> channels;

  RasterImage() = default;
  explicit RasterImage(ScalarGrid gray) { channels.push_back(std::move(gray)); }
  RasterImage(ScalarGrid r, ScalarGrid g, ScalarGrid b) {
    channels.push_back(std::move(r));
    channels.push_back(std::move(g));
    channels.push_back(std::move(b));
  }

  int width() const { return channels.empty() ? 0 : channels[0].width; }
  int height() const { return channels.empty() ? 0 : channels[0].height; }
  int num_channels() const { return static_cast<int>(channels.size()); }
  bool same_dims(int w, int h) const { return width() == w && height() == h; }
};

/// Per-region average color; entries beyond the channel count stay zero.
using Color = std::array<double, 3>;

struct RegionMeans {
  Color c1{};  // mean where mask = 1
  Color c2{};  // mean where mask = 0
  bool degenerate = false;  // one region was empty; its mean is the global mean
};

enum class ColorMode { luminance, multichannel };

/// H(v) = 1 iff v >= 0.
BinaryMask heaviside(const LevelSet& ls);

/// Region means of img under mask; empty region falls back to the global mean and flags.
RegionMeans region_means(const RasterImage& img, const BinaryMask& mask);

/// Gray passthrough; RGB reduces via Rec.601 luminance.
ScalarGrid to_intensity(const RasterImage& img);

void validate_image(const RasterImage& img);

}  // namespace annofix
