#include <cmath>

#include "bodyfit/core/silhouette.hpp"
#include "bodyfit/measure/anthropometrics.hpp"
#include "bodyfit/render/renderer.hpp"
#include "bodyfit/synth/body_model.hpp"
#include "bodyfit/synth/demographics.hpp"
#include "helpers.hpp"

using namespace bodyfit;
using namespace bodyfit::test;
using J = JointId;

namespace {

// Axis-aligned standing skeleton at depth z.
Skeleton15 upright(double z = 2.0) {
  Skeleton15 s;
  s[J::HE] = {0, 1.60, z};
  s[J::NE] = {0, 1.40, z};
  s[J::TO] = {0, 0.90, z};
  s[J::LS] = {-0.20, 1.30, z};
  s[J::RS] = {0.20, 1.30, z};
  s[J::LE] = {-0.25, 1.00, z};
  s[J::RE] = {0.25, 1.00, z};
  s[J::LA] = {-0.28, 0.75, z};
  s[J::RA] = {0.28, 0.75, z};
  s[J::LH] = {-0.12, 0.80, z};
  s[J::RH] = {0.12, 0.80, z};
  s[J::LK] = {-0.12, 0.35, z};
  s[J::RK] = {0.12, 0.35, z};
  s[J::LF] = {-0.12, -0.10, z};
  s[J::RF] = {0.12, -0.10, z};
  return s;
}

double arc_length(double a, double b, int n = 200000) {
  auto f = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
  const double h = 2 * M_PI / n;
  double s = f(0) + f(2 * M_PI);
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

std::vector<Vec2> ellipse_samples(const Vec2& c, double a, double b, double angle, int n, double t0 = 0.3) {
  std::vector<Vec2> pts;
  const Eigen::Rotation2Dd R(angle);
  for (int i = 0; i < n; ++i) {
    const double t = t0 + 2 * M_PI * i / n;
    pts.push_back(c + R * Vec2(a * std::cos(t), b * std::sin(t)));
  }
  return pts;
}

// Skeleton whose torso runs down the axis of a vertical cylinder at depth z.
Skeleton15 cylinder_skeleton(double z) {
  Skeleton15 s = upright(z);
  for (auto& j : s.joints) j.z() = z;
  return s;
}

}  // namespace

TEST_CASE("principal axes of an axis-aligned skeleton") {
  const PrincipalAxes a = principal_axes(upright());
  CHECK(a.u.isApprox(Vec3(0, -1, 0), 1e-12));
  CHECK(a.v.isApprox(Vec3(1, 0, 0), 1e-12));
  CHECK(a.w.isApprox(Vec3(0, 0, 1), 1e-12));
}

TEST_CASE("posture gate rejects a tilted torso-hip direction") {
  Skeleton15 s = upright();
  // Hip midpoint 0.1 m below TO, rotated 20 degrees away from u.
  const double t = 20 * M_PI / 180;
  const Vec3 mid = s[J::TO] + 0.1 * Vec3(std::sin(t), -std::cos(t), 0);
  s[J::LH] = mid + Vec3(-0.12, 0, 0);
  s[J::RH] = mid + Vec3(0.12, 0, 0);
  CHECK_THROWS_CODE(principal_axes(s), ErrorCode::Posture);
  // 5 degrees passes (sin 5 deg = 0.087).
  const double t5 = 5 * M_PI / 180;
  const Vec3 mid5 = s[J::TO] + 0.1 * Vec3(std::sin(t5), -std::cos(t5), 0);
  s[J::LH] = mid5 + Vec3(-0.12, 0, 0);
  s[J::RH] = mid5 + Vec3(0.12, 0, 0);
  CHECK_NOTHROW(principal_axes(s));

  Skeleton15 d = upright();
  d[J::TO] = d[J::NE];
  CHECK_THROWS_CODE(principal_axes(d), ErrorCode::DegenerateSkeleton);
  d = upright();
  d[J::RS] = d[J::LS];
  CHECK_THROWS_CODE(principal_axes(d), ErrorCode::DegenerateSkeleton);
}

TEST_CASE("principal axes are orthonormal and right-handed (500 random skeletons)") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> jitter(-0.005, 0.005);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    Skeleton15 s = upright();
    for (auto& j : s.joints) j += Vec3(jitter(rng), jitter(rng), jitter(rng));
    s = s.transformed(random_rotation(rng), Vec3(jitter(rng), jitter(rng), 2));
    PrincipalAxes a;
    try {
      a = principal_axes(s);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Posture);
      continue;
    }
    ++checked;
    Mat3 M;
    M << a.u, a.v, a.w;
    CHECK((M.transpose() * M - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(M.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((a.u.cross(a.v) - a.w).norm() < 1e-9);
  }
  CHECK(checked > 400);
}

TEST_CASE("height from the topmost and bottommost axial contour points") {
  const CameraIntrinsics in = CameraIntrinsics::wide_vga();
  DepthFrame f(in);
  Contour2D c;
  for (int row = 70; row <= 420; ++row) {
    f.at(row, 320) = 2000;
    c.points.push_back({row, 320});
  }
  const Skeleton15 s = upright();
  const PrincipalAxes a = principal_axes(s);
  CHECK(estimate_height(c, f, s, a) == doctest::Approx(175.0).epsilon(1e-9));

  Contour2D lateral;
  lateral.points = {{240, 600}, {241, 600}, {240, 20}};
  CHECK_THROWS_CODE(estimate_height(lateral, f, s, a), ErrorCode::InsufficientContour);
  CHECK_THROWS_CODE(estimate_height(Contour2D{}, f, s, a), ErrorCode::InsufficientContour);
}

TEST_CASE("limb lengths") {
  Skeleton15 s = upright();
  s[J::NE] = {0, 1.4, 2};
  s[J::LA] = {-0.8, 1.3, 2};
  s[J::LE] = {-0.5, 1.3, 2};
  s[J::LS] = {-0.2, 1.3, 2};
  s[J::RA] = {0.8, 1.3, 2};
  s[J::RE] = {0.5, 1.3, 2};
  s[J::RS] = {0.2, 1.3, 2};
  s[J::LH] = {-0.1, 0.9, 2};
  s[J::LK] = {-0.1, 0.45, 2};
  s[J::LF] = {-0.1, 0.0, 2};
  s[J::RH] = {0.1, 0.9, 2};
  s[J::RK] = {0.1, 0.45, 2};
  s[J::RF] = {0.1, 0.0, 2};
  const LimbLengths l = limb_lengths(s);
  CHECK(l.sleeve == doctest::Approx((0.3 + 0.3 + std::sqrt(0.04 + 0.01)) * 100).epsilon(1e-12));
  CHECK(l.sleeve == doctest::Approx(82.36).epsilon(1e-4));
  CHECK(l.leg == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(l.shoulder == doctest::Approx(40.0).epsilon(1e-12));

  s[J::LK].x() = std::nan("");
  CHECK_THROWS_CODE(limb_lengths(s), ErrorCode::DegenerateSkeleton);
}

TEST_CASE("derived joints") {
  const Skeleton15 s = upright();
  const auto d = derived_joints(s);
  CHECK(d[0].isApprox(Vec3(0, 1.5, 2)));
  CHECK(d[1].isApprox(0.5 * (d[0] + 0.5 * (s[J::LS] + s[J::RS]))));
  CHECK(d[2].isApprox(0.5 * (s[J::NE] + s[J::TO])));
  CHECK(d[3] == s[J::TO]);
  CHECK(d[4].x() == doctest::Approx(0.0));
}

TEST_CASE("cross sections of a half cylinder") {
  const PointCloud cyl = half_cylinder(0.15, 4.0, 2.0, 0.004);
  const Skeleton15 s = cylinder_skeleton(2.0);
  const PrincipalAxes a = principal_axes(s);
  const auto pts = cross_section_points(cyl, a, Vec3(0, 0.9, 2.0));
  REQUIRE(pts.size() > 20);
  for (const auto& p : pts) CHECK(p.norm() == doctest::Approx(0.15).epsilon(1e-9));
  CHECK_THROWS_CODE(cross_section_points(cyl, a, Vec3(0, 10, 2.0)), ErrorCode::EmptySection);

  // A point exactly in the plane through the anchor is kept.
  PointCloud ring;
  for (int i = 0; i < 8; ++i) ring.points.push_back({0.1 * std::cos(i), 0.0, 2 + 0.1 * std::sin(i)});
  CHECK(cross_section_points(ring, a, Vec3(0, 0, 2)).size() == 8);

  // Phantom girth: full circle of radius 0.15 is 94.25 cm.
  const auto g = measure_girths(cyl, s, a);
  CHECK(g[static_cast<int>(Girth::Waist)].girth_cm == doctest::Approx(94.2478).epsilon(0.02));
}

TEST_CASE("girths are scale equivariant and rigidly invariant") {
  const PointCloud cyl = half_cylinder(0.15, 4.0, 2.0, 0.004);
  // Slightly elliptic so the fits are not trivially circles.
  PointCloud ell = cyl;
  for (auto& p : ell.points) p.x() *= 1.3;
  const Skeleton15 s = cylinder_skeleton(2.0);
  const auto base = measure_girths(ell, s, principal_axes(s));

  const double k = 1.1;
  PointCloud big = ell;
  for (auto& p : big.points) p *= k;
  Skeleton15 sb = s;
  for (auto& j : sb.joints) j *= k;
  const auto scaled = measure_girths(big, sb, principal_axes(sb));

  std::mt19937_64 rng(3);
  const Mat3 R = Eigen::AngleAxisd(0.4, Vec3(0.2, 1, 0.1).normalized()).toRotationMatrix();
  const Vec3 t(0.3, -0.2, 0.5);
  PointCloud moved = ell;
  for (auto& p : moved.points) p = R * p + t;
  const Skeleton15 sm = s.transformed(R, t);
  const auto rigid = measure_girths(moved, sm, principal_axes(sm));
  for (int g = 0; g < 5; ++g) {
    CHECK(scaled[g].girth_cm == doctest::Approx(k * base[g].girth_cm).epsilon(1e-9));
    CHECK(rigid[g].girth_cm == doctest::Approx(base[g].girth_cm).epsilon(1e-6));
  }
  const LimbLengths l0 = limb_lengths(s), l1 = limb_lengths(sb), l2 = limb_lengths(sm);
  CHECK(l1.sleeve == doctest::Approx(k * l0.sleeve).epsilon(1e-12));
  CHECK(l2.leg == doctest::Approx(l0.leg).epsilon(1e-12));
}

TEST_CASE("direct ellipse fit recovers exact conics") {
  const auto circle = ellipse_samples({0.01, -0.02}, 0.15, 0.15, 0, 8);
  const EllipseFit c = fit_ellipse(circle);
  CHECK(c.a == doctest::Approx(0.15).epsilon(1e-6));
  CHECK(c.b == doctest::Approx(0.15).epsilon(1e-6));
  CHECK((c.center - Vec2(0.01, -0.02)).norm() < 1e-6);

  const double th = 25 * M_PI / 180;
  const EllipseFit e = fit_ellipse(ellipse_samples({0.3, 0.1}, 0.18, 0.11, th, 20));
  CHECK(e.a == doctest::Approx(0.18).epsilon(1e-6));
  CHECK(e.b == doctest::Approx(0.11).epsilon(1e-6));
  CHECK(std::abs(e.angle - th) < 1e-6);
  CHECK((e.center - Vec2(0.3, 0.1)).norm() < 1e-6);
  CHECK(algebraic_residual(e.conic, ellipse_samples({0.3, 0.1}, 0.18, 0.11, th, 50)) < 1e-20);

  CHECK_THROWS_CODE(fit_ellipse(std::vector<Vec2>(circle.begin(), circle.begin() + 5)), ErrorCode::DegenerateInput);
  std::vector<Vec2> line;
  for (int i = 0; i < 10; ++i) line.push_back({0.1 * i, 0.05 * i});
  CHECK_THROWS_CODE(fit_ellipse(line), ErrorCode::DegenerateInput);
}

TEST_CASE("ellipse fits survive random rotations and offsets") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ax(0.05, 0.3), ang(-1.5, 1.5), off(-1, 1);
  for (int i = 0; i < 200; ++i) {
    double a = ax(rng), b = ax(rng);
    if (a < b) std::swap(a, b);
    if (a / b > 4) continue;
    const Vec2 c(off(rng), off(rng));
    const EllipseFit e = fit_ellipse(ellipse_samples(c, a, b, ang(rng), 30, off(rng)));
    CHECK(e.a >= e.b);
    CHECK(e.a == doctest::Approx(a).epsilon(1e-6));
    CHECK(e.b == doctest::Approx(b).epsilon(1e-6));
    CHECK((e.center - c).norm() < 1e-6);
  }
}

TEST_CASE("ellipse perimeters against arc-length integration") {
  CHECK(ellipse_perimeter(0.15, 0.15) == doctest::Approx(2 * M_PI * 0.15).epsilon(1e-12));
  CHECK(ellipse_perimeter_ramanujan1(0.15, 0.10) == doctest::Approx(M_PI * (0.75 - std::sqrt(0.2475))).epsilon(1e-12));
  CHECK(ellipse_perimeter(0.15, 0.10) == doctest::Approx(0.79327).epsilon(1e-5));
  CHECK(ellipse_perimeter(0.15, 0.10) == doctest::Approx(arc_length(0.15, 0.10)).epsilon(1e-6));
  CHECK(ellipse_perimeter(0.18, 0.11) == doctest::Approx(0.92438).epsilon(1e-5));
  CHECK(ellipse_perimeter(0.18, 0.11) == doctest::Approx(arc_length(0.18, 0.11)).epsilon(1e-4));
  for (double r : {1.0, 2.0, 3.0, 5.0})
    CHECK(ellipse_perimeter(r * 0.1, 0.1) == doctest::Approx(arc_length(r * 0.1, 0.1)).epsilon(1e-6));
}

TEST_CASE("rendered body measures close to generator truth") {
  BodyParams p;
  p.height = 1.80;
  const BodyModel m = build_mesh(p);
  const RenderResult r = render_depth(m);
  const Measurements got = measure_all(r.frame, r.skeleton);
  const Measurements& want = m.truth;
  CHECK(std::abs(got.height - want.height) <= 2.0);
  CHECK(got.sleeve_length == doctest::Approx(want.sleeve_length).epsilon(0.03));
  CHECK(got.leg_length == doctest::Approx(want.leg_length).epsilon(0.03));
  CHECK(got.shoulder_length == doctest::Approx(want.shoulder_length).epsilon(0.03));
  CHECK(got.girth_neck == doctest::Approx(want.girth_neck).epsilon(0.04));
  CHECK(got.girth_shoulder == doctest::Approx(want.girth_shoulder).epsilon(0.04));
  CHECK(got.girth_chest == doctest::Approx(want.girth_chest).epsilon(0.04));
  CHECK(got.girth_waist == doctest::Approx(want.girth_waist).epsilon(0.04));
  CHECK(got.girth_hip == doctest::Approx(want.girth_hip).epsilon(0.04));
}

// Girths come from a fit to the visible front half only, so single bodies
// can miss by more than 4% (most often neck and shoulder); across a sample
// the mean error per girth is held to the tolerance and the worst case is
// reported.
TEST_CASE("sampled bodies measure close to generator truth") {
  const DemographicTable t = DemographicTable::defaults();
  const int n = 20;
  std::array<double, 5> mean{}, worst{};
  for (int i = 0; i < n; ++i) {
    const BodyModel m = build_mesh(sample_one(t, 2024, i));
    const RenderResult r = render_depth(m);
    const Measurements got = measure_all(r.frame, r.skeleton);
    const Measurements& want = m.truth;
    INFO("body " << i);
    CHECK(std::abs(got.height - want.height) <= 2.0);
    CHECK(got.sleeve_length == doctest::Approx(want.sleeve_length).epsilon(0.03));
    CHECK(got.leg_length == doctest::Approx(want.leg_length).epsilon(0.03));
    CHECK(got.shoulder_length == doctest::Approx(want.shoulder_length).epsilon(0.03));
    const auto gv = got.values(), wv = want.values();
    for (int g = 0; g < 5; ++g) {
      const double e = std::abs(gv[4 + g] / wv[4 + g] - 1);
      mean[g] += e / n;
      worst[g] = std::max(worst[g], e);
    }
  }
  for (int g = 0; g < 5; ++g) {
    MESSAGE(girth_name(Girth(g)) << " girth: mean " << 100 * mean[g] << "%, worst " << 100 * worst[g] << "%");
    CHECK(mean[g] < 0.04);
  }
}

TEST_CASE("measure_all gates on posture without partial output") {
  const BodyModel m = build_mesh(BodyParams{});
  RenderResult r = render_depth(m);
  Skeleton15 s = r.skeleton;
  const Vec3 shift = 0.3 * (s[J::TO] - s[J::NE]).norm() * Vec3(1, 0, 0);
  s[J::LH] += shift;
  s[J::RH] += shift;
  CHECK_THROWS_CODE(measure_all(r.frame, s), ErrorCode::Posture);
  CHECK_THROWS_CODE(measure_all(DepthFrame(r.frame.intrinsics), r.skeleton), ErrorCode::NoSubject);
}
