#pragma once

#include <vector>

#include "annofix/geometry.hpp"
#include "annofix/grid.hpp"

namespace annofix::annot {

inline constexpr double kDefaultAnnotationRadiusPx = 5.0;
inline constexpr double kDefaultPoiRadiusPx = 30.0;

/// Processing window in map pixel coordinates.
struct TileWindow {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
  std::vector<std::string> source_polyline_ids;
};

/// Corridor mask: pixel = 1 iff the Euclidean distance from the pixel center
/// (integer coordinates) to the nearest segment is <= radius. Round end caps.
BinaryMask buffer_rasterize(const std::vector<Polyline>& lines, double radius, int canvas_w,
                            int canvas_h);

/// buffer_rasterize with the wide pixels-of-interest radius (default 30 px).
BinaryMask make_poi(const std::vector<Polyline>& lines, double radius, int canvas_w, int canvas_h);

/// Windows covering the poi-buffered extent of every polyline. Adjacent
/// windows overlap by at least `overlap` px; windows are clamped inside the
/// map and keep the requested size whenever the map allows it.
std::vector<TileWindow> tile_windows(const std::vector<Polyline>& lines, int map_w, int map_h,
                                     int window = 128, int overlap = 32,
                                     double buffer_radius = kDefaultPoiRadiusPx);

}  // namespace annofix::annot
