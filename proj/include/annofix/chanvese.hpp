#pragma once

#include <optional>
#include <vector>

#include "annofix/grid.hpp"

namespace annofix::chanvese {

struct CvOptions {
  int max_iters = 200;
  double energy_tol = 0.0;  // stop once the energy change is <= tol
  ColorMode color_mode = ColorMode::multichannel;
};

struct EnergyRecord {
  double energy = 0.0;
  Color c1{};
  Color c2{};
  long foreground_area = 0;
};

using EnergyTrace = std::vector<EnergyRecord>;

struct CvResult {
  BinaryMask mask;
  EnergyTrace trace;
  bool degenerate = false;  // a region emptied at some point
};

/// Piecewise-constant two-phase energy: sum (u-c1)^2 over H(phi) plus
/// (u-c2)^2 over the complement.
double energy(const RasterImage& img, const LevelSet& phi, const Color& c1, const Color& c2);

/// Fast sign update: +1 where (u-c1)^2 <= (u-c2)^2, else -1. Ties go to
/// the foreground.
LevelSet step(const RasterImage& img, const Color& c1, const Color& c2);

/// Checkerboard +-1 field with the given period; seeds both phases everywhere.
LevelSet checkerboard_init(int width, int height, int period = 8);

/// Alternates region means and sign updates until the energy change drops to
/// energy_tol or max_iters is reached. Without an init, starts from an 8-px
/// checkerboard.
CvResult segment(const RasterImage& img, std::optional<LevelSet> init, const CvOptions& opts = {});

}  // namespace annofix::chanvese
