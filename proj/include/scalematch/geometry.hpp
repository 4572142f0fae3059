#pragma once

#include <algorithm>

namespace scalematch {

/// Axis-aligned box, top-left corner plus size, in pixels.
struct Box {
  double x = 0, y = 0, w = 0, h = 0;

  double area() const { return w * h; }
  double x2() const { return x + w; }
  double y2() const { return y + h; }

  bool operator==(const Box&) const = default;
};

inline double intersection_area(const Box& a, const Box& b) {
  const double iw = std::min(a.x2(), b.x2()) - std::max(a.x, b.x);
  const double ih = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
  if (iw <= 0 || ih <= 0) return 0.0;
  return iw * ih;
}

/// Intersection over union.
inline double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

/// Intersection over detection area; matching criterion for ignore regions.
inline double iod(const Box& det, const Box& region) {
  const double inter = intersection_area(det, region);
  const double da = det.area();
  return da > 0 ? inter / da : 0.0;
}

}  // namespace scalematch
