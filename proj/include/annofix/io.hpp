#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "annofix/geometry.hpp"
#include "annofix/grid.hpp"

namespace annofix {

/// Unreadable, unwritable or malformed external data. The CLI maps this to
/// exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- PNG (8-bit gray or RGB, normalized to [0,1] on load) -------------------

RasterImage load_png(const std::string& path);
void save_png(const std::string& path, const RasterImage& img);
void save_png_gray(const std::string& path, const ScalarGrid& gray);
/// Masks are written with 1-bit semantics: 0 or 255.
void save_png_mask(const std::string& path, const BinaryMask& mask);
BinaryMask load_png_mask(const std::string& path);  // nonzero -> 1

// --- GeoJSON (pixel coordinates, x right, y down) ----------------------------

/// World-to-pixel affine from an optional sidecar file:
/// px = a*x + b*y + c, py = d*x + e*y + f.
struct WorldToPixel {
  double a = 1.0, b = 0.0, c = 0.0;
  double d = 0.0, e = 1.0, f = 0.0;
};

std::vector<Polyline> load_geojson_lines(const std::string& path,
                                         const std::optional<WorldToPixel>& transform = {});
void save_geojson_lines(const std::string& path, const std::vector<Polyline>& lines);
WorldToPixel load_sidecar_transform(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace annofix
