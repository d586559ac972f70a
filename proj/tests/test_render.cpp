#include <cmath>

#include "bodyfit/render/renderer.hpp"
#include "helpers.hpp"

using namespace bodyfit;
using namespace bodyfit::test;

namespace {

CameraIntrinsics small_camera() { return {100.0, 100.0, 32.0, 24.0, 64, 48, 0.001}; }

// Camera-space point seen at pixel (col, row) at depth z.
Vec3 at_pixel(double col, double row, double z, const CameraIntrinsics& in) { return unproject_pixel(col, row, z, in); }

std::size_t nonzero(const DepthFrame& f) {
  std::size_t n = 0;
  for (auto v : f.data) n += v != 0;
  return n;
}

}  // namespace

TEST_CASE("constant-depth triangle reads its depth") {
  const auto in = small_camera();
  const std::vector<Vec3> v = {at_pixel(5, 5, 2.0, in), at_pixel(55, 8, 2.0, in), at_pixel(20, 40, 2.0, in)};
  std::size_t covered = 0;
  const DepthFrame f = rasterize(v, {{0, 1, 2}}, in, 0.0, 0, &covered);
  CHECK(covered > 500);
  CHECK(nonzero(f) == covered);
  for (auto d : f.data) CHECK((d == 0 || d == 2000));
  CHECK(f.at(15, 25) == 2000);
  CHECK(f.at(0, 0) == 0);
}

TEST_CASE("nearest surface wins regardless of order") {
  const auto in = small_camera();
  std::vector<Vec3> v;
  for (double z : {2.0, 1.5}) {
    v.push_back(at_pixel(-10, -10, z, in));
    v.push_back(at_pixel(80, -10, z, in));
    v.push_back(at_pixel(-10, 70, z, in));
  }
  const DepthFrame a = rasterize(v, {{0, 1, 2}, {3, 4, 5}}, in);
  const DepthFrame b = rasterize(v, {{3, 4, 5}, {0, 1, 2}}, in);
  CHECK(a.data == b.data);
  CHECK(a.at(10, 10) == 1500);
}

TEST_CASE("shared edges leave no gaps and no double coverage") {
  const auto in = small_camera();
  // Square from pixel 10.5 to 40.5 split along its diagonal: 30 x 30 centres inside.
  const std::vector<Vec3> v = {at_pixel(10.5, 10.5, 2, in), at_pixel(40.5, 10.5, 2, in), at_pixel(40.5, 40.5, 2, in),
                               at_pixel(10.5, 40.5, 2, in)};
  std::size_t covered = 0;
  const DepthFrame f = rasterize(v, {{0, 2, 1}, {0, 3, 2}}, in, 0, 0, &covered);
  CHECK(nonzero(f) == 900);
  CHECK(covered == 900);
}

TEST_CASE("depth is interpolated perspective-correctly") {
  const auto in = small_camera();
  // Plane z = 2 + 0.5 x, a slanted wall.
  auto z_of = [](double x) { return 2.0 + 0.5 * x; };
  std::vector<Vec3> v;
  for (double x : {-0.8, 0.8})
    for (double y : {-0.8, 0.8}) v.push_back({x, y, z_of(x)});
  const DepthFrame f = rasterize(v, {{0, 1, 3}, {0, 3, 2}}, in);
  for (int row = 0; row < in.height; row += 3)
    for (int col = 0; col < in.width; col += 3) {
      if (!f.at(row, col)) continue;
      // Ray (u, v, 1) * z meets the plane where z = 2 + 0.5 u z.
      const double u = (col - in.cx) / in.fx;
      const double z = 2.0 / (1.0 - 0.5 * u);
      CHECK(std::abs(f.at(row, col) - z * 1000) <= 0.5 + 1e-9);
    }
}

TEST_CASE("rendered body and joint projection") {
  const BodyModel m = build_mesh(BodyParams{});
  const RenderResult r = render_depth(m);
  CHECK(r.covered_pixels > 10000);
  const auto px = project_joints(r.skeleton, r.frame.intrinsics);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    CHECK(px[j].isApprox(r.joint_pixels[j]));
    CHECK(px[j].x() > 0);
    CHECK(px[j].x() < 640);
    CHECK(px[j].y() > 0);
    CHECK(px[j].y() < 480);
  }
  // The head is above the feet in the image.
  CHECK(px[0].y() < px[13].y());
  // The torso joint pixel hits the body at roughly the camera distance.
  const Vec2 to = r.joint_pixels[static_cast<int>(JointId::TO)];
  const double d = r.frame.meters(int(std::lround(to.y())), int(std::lround(to.x())));
  CHECK(d > 1.7);
  CHECK(d < 2.0);

  RenderConfig back;
  back.view = View::Back;
  const RenderResult rb = render_depth(m, back);
  CHECK(rb.covered_pixels > 10000);
  // Turning the camera around swaps the image sides of left and right.
  const auto side = [](const RenderResult& x) {
    return x.joint_pixels[static_cast<int>(JointId::LS)].x() - x.joint_pixels[static_cast<int>(JointId::RS)].x();
  };
  CHECK(side(r) * side(rb) < 0);

  Skeleton15 behind = r.skeleton;
  behind[JointId::HE].z() = -0.1;
  CHECK_THROWS_CODE(project_joints(behind, r.frame.intrinsics), ErrorCode::NonPositiveDepth);
}

TEST_CASE("model too close for the frustum") {
  RenderConfig cfg;
  cfg.intrinsics.fx = cfg.intrinsics.fy = 3000;  // telephoto: only the torso fits
  CHECK_THROWS_CODE(render_depth(build_mesh(BodyParams{}), cfg), ErrorCode::ModelOutOfFrustum);
  cfg.camera_distance = -1;
  CHECK_THROWS_CODE(cfg.validate(), ErrorCode::InvalidArgument);
}

TEST_CASE("depth noise is seeded and has the requested spread") {
  const BodyModel m = build_mesh(BodyParams{});
  RenderConfig cfg;
  const RenderResult clean = render_depth(m, cfg);
  cfg.noise_sd_mm = 5;
  cfg.noise_seed = 42;
  const RenderResult a = render_depth(m, cfg), b = render_depth(m, cfg);
  CHECK(a.frame.data == b.frame.data);
  cfg.noise_seed = 43;
  CHECK(render_depth(m, cfg).frame.data != a.frame.data);

  double s = 0, ss = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < clean.frame.data.size(); ++i)
    if (clean.frame.data[i] && a.frame.data[i]) {
      const double e = double(a.frame.data[i]) - clean.frame.data[i];
      s += e, ss += e * e, ++n;
    }
  const double mean = s / n, sd = std::sqrt(ss / n - mean * mean);
  CHECK(std::abs(mean) < 0.2);
  // Rounding both frames adds about 1/6 unit^2 of variance.
  CHECK(sd == doctest::Approx(std::sqrt(25.0 + 1.0 / 6)).epsilon(0.03));
}
