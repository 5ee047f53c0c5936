#pragma once

#include "annofix/grid.hpp"
#include "annofix/vectorize.hpp"

namespace annofix::metrics {

struct PixelScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  bool zero_division = false;  // a rate had an empty denominator and was reported as 0
};

PixelScore pixel_prf(const BinaryMask& pred, const BinaryMask& gt);

struct LineScore {
  double correctness = 0.0;   // matched_pred_len / total_pred_len
  double completeness = 0.0;  // matched_gt_len / total_gt_len
  double apls = 0.0;
  double matched_pred_len = 0.0;
  double total_pred_len = 0.0;
  double matched_gt_len = 0.0;
  double total_gt_len = 0.0;
  bool pred_empty = false;
  bool gt_empty = false;
};

/// Both geometries resampled at 0.5-px spacing; a sample matches when it lies
/// within tol of any geometry of the other graph. Fills everything but apls.
LineScore correctness_completeness(const vectorize::LineGraph& pred,
                                   const vectorize::LineGraph& gt, double tol = 5.0);

/// Average path length similarity: control nodes every control_spacing px
/// along the ground truth, snapped to the prediction within snap_radius;
/// 1 - mean over connected control pairs of min(1, |L_gt - L_pred| / L_gt),
/// averaged over both directions. Unsnappable or disconnected pairs count as
/// the full penalty.
double apls(const vectorize::LineGraph& pred, const vectorize::LineGraph& gt,
            double control_spacing = 50.0, double snap_radius = 5.0);

}  // namespace annofix::metrics
