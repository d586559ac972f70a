#include "bodyfit/core/silhouette.hpp"

#include <array>

#include "bodyfit/error.hpp"

namespace bodyfit {

namespace {

// Clockwise on screen (rows grow downward): W, NW, N, NE, E, SE, S, SW.
constexpr std::array<int, 8> kDr = {0, -1, -1, -1, 0, 1, 1, 1};
constexpr std::array<int, 8> kDc = {-1, -1, 0, 1, 1, 1, 0, -1};

int direction_of(int dr, int dc) {
  for (int d = 0; d < 8; ++d)
    if (kDr[d] == dr && kDc[d] == dc) return d;
  return -1;
}

}  // namespace

Contour2D trace_boundary(const std::vector<std::uint8_t>& mask, int width, int height) {
  if (width <= 0 || height <= 0 || mask.size() != static_cast<std::size_t>(width) * height)
    fail(ErrorCode::InvalidArgument, "mask size does not match width*height");
  const auto set = [&](int r, int c) {
    return r >= 0 && r < height && c >= 0 && c < width && mask[static_cast<std::size_t>(r) * width + c] != 0;
  };
  Contour2D out;
  int sr = -1, sc = -1;
  for (int r = 0; r < height && sr < 0; ++r)
    for (int c = 0; c < width; ++c)
      if (set(r, c)) {
        sr = r;
        sc = c;
        break;
      }
  if (sr < 0) return out;

  // Raster order guarantees the west neighbour of the start is background.
  const int start_back = 0;
  int pr = sr, pc = sc, back = start_back;
  out.points.push_back({sr, sc});
  const std::size_t limit = 4 * mask.size() + 8;
  while (out.points.size() < limit) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      if (set(pr + kDr[d], pc + kDc[d])) {
        found = d;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const int prev = (found + 7) % 8;
    const int br = pr + kDr[prev], bc = pc + kDc[prev];
    pr += kDr[found];
    pc += kDc[found];
    back = direction_of(br - pr, bc - pc);
    if (pr == sr && pc == sc && back == start_back) break;
    out.points.push_back({pr, pc});
  }
  return out;
}

Silhouette extract_silhouette_contour(const DepthFrame& frame, const SilhouetteOptions& options) {
  frame.validate();
  const int w = frame.width(), h = frame.height();
  const std::size_t n = frame.data.size();
  std::vector<std::uint8_t> valid(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (frame.data[i] == 0) continue;
    const double z = frame.data[i] * frame.intrinsics.depth_unit;
    valid[i] = z >= options.min_depth && z <= options.max_depth;
  }

  std::vector<std::int32_t> label(n, -1);
  std::vector<std::uint32_t> stack;
  std::int32_t best = -1;
  std::size_t best_size = 0;
  std::int32_t next = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!valid[seed] || label[seed] >= 0) continue;
    std::size_t size = 0;
    stack.assign(1, static_cast<std::uint32_t>(seed));
    label[seed] = next;
    while (!stack.empty()) {
      const std::uint32_t i = stack.back();
      stack.pop_back();
      ++size;
      const int r = static_cast<int>(i / w), c = static_cast<int>(i % w);
      for (int d = 0; d < 8; ++d) {
        const int rr = r + kDr[d], cc = c + kDc[d];
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        const std::size_t j = static_cast<std::size_t>(rr) * w + cc;
        if (valid[j] && label[j] < 0) {
          label[j] = next;
          stack.push_back(static_cast<std::uint32_t>(j));
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best = next;
    }
    ++next;
  }
  if (best < 0 || best_size < options.min_area)
    fail(ErrorCode::NoSubject, "largest in-range component has " + std::to_string(best_size) + " pixels");

  Silhouette s;
  s.mask.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) s.mask[i] = label[i] == best;
  s.area = best_size;
  s.contour = trace_boundary(s.mask, w, h);
  return s;
}

}  // namespace bodyfit
