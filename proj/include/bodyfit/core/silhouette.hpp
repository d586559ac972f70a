#pragma once

#include <vector>

#include "bodyfit/core/camera.hpp"

namespace bodyfit {

// Closed boundary loop, consecutive entries 8-connected, last adjacent to
// first.
struct Contour2D {
  std::vector<PixelCoord> points;
};

struct Silhouette {
  std::vector<std::uint8_t> mask;  // width*height, 1 inside the subject
  std::size_t area = 0;
  Contour2D contour;
};

struct SilhouetteOptions {
  double min_depth = kSensorMinRange;  // meters
  double max_depth = kSensorMaxRange;
  std::size_t min_area = 2000;  // pixels
};

// Largest 8-connected component of in-range pixels and its Moore boundary
// trace. Throws NoSubject when that component is smaller than min_area.
Silhouette extract_silhouette_contour(const DepthFrame& frame, const SilhouetteOptions& options = {});

// Moore-neighbour trace (clockwise, Jacob's stopping criterion) of the
// component containing the first set pixel in raster order.
Contour2D trace_boundary(const std::vector<std::uint8_t>& mask, int width, int height);

}  // namespace bodyfit
