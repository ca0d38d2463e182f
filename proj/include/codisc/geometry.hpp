#pragma once

#include <algorithm>

namespace codisc {

// Axis-aligned rectangle in pixel coordinates, (x, y) top-left corner.
// Valid rects have strictly positive width and height.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }

  bool valid() const { return w > 0.0 && h > 0.0; }

  bool operator==(const Rect&) const = default;
};

inline double rect_area(const Rect& r) { return r.w * r.h; }

inline double rect_intersection_area(const Rect& r, const Rect& s) {
  const double iw = std::min(r.x + r.w, s.x + s.w) - std::max(r.x, s.x);
  const double ih = std::min(r.y + r.h, s.y + s.h) - std::max(r.y, s.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

// Intersection over union; 0 for disjoint rects. All areas come from the
// same corner arithmetic, so iou(r, r) is exactly 1 and the ratio never
// leaves [0, 1] under floating-point rounding.
inline double iou(const Rect& r, const Rect& s) {
  const double iw = std::min(r.x + r.w, s.x + s.w) - std::max(r.x, s.x);
  const double ih = std::min(r.y + r.h, s.y + s.h) - std::max(r.y, s.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double area_r = ((r.x + r.w) - r.x) * ((r.y + r.h) - r.y);
  const double area_s = ((s.x + s.w) - s.x) * ((s.y + s.h) - s.y);
  const double uni = area_r + area_s - inter;
  return uni <= 0.0 ? 0.0 : inter / uni;
}

}  // namespace codisc
