#include <algorithm>
#include <cmath>

#include "bodyfit/measure/ellipse.hpp"
#include "bodyfit/render/joint_mapping.hpp"
#include "bodyfit/synth/body_model.hpp"
#include "bodyfit/synth/demographics.hpp"
#include "bodyfit/synth/model_io.hpp"
#include "helpers.hpp"

using namespace bodyfit;
using namespace bodyfit::test;

namespace {

// Arc length of x = a cos t, y = b sin t by composite Simpson on [0, 2 pi].
double arc_length(double a, double b, int n = 20000) {
  auto f = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
  const double h = 2 * M_PI / n;
  double s = f(0) + f(2 * M_PI);
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

// Perimeter of the horizontal slice y = y0 through the triangles of one segment.
double slice_perimeter(const TriangleMesh& mesh, std::size_t segment, double y0) {
  double total = 0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (mesh.triangle_segment[t] != segment) continue;
    std::vector<Vec3> hits;
    for (int e = 0; e < 3; ++e) {
      const Vec3& p = mesh.vertices[mesh.triangles[t][e]];
      const Vec3& q = mesh.vertices[mesh.triangles[t][(e + 1) % 3]];
      if ((p.y() - y0) * (q.y() - y0) < 0) hits.push_back(p + (q - p) * ((y0 - p.y()) / (q.y() - p.y())));
    }
    if (hits.size() == 2) total += (hits[0] - hits[1]).norm();
  }
  return total;
}

}  // namespace

TEST_CASE("sampler is deterministic and order independent") {
  const DemographicTable t = DemographicTable::defaults();
  const auto a = sample_population(t, 200, 11);
  const auto b = sample_population(t, 200, 11);
  CHECK(a == b);
  for (std::uint64_t i : {0u, 17u, 199u}) CHECK(sample_one(t, 11, i) == a[i]);
  CHECK_FALSE(sample_population(t, 200, 12) == a);
  for (const auto& p : a) CHECK_NOTHROW(p.validate());
}

TEST_CASE("sampler group means match the table at sd_scale 1") {
  const DemographicTable t = DemographicTable::defaults();
  SamplerOptions o;
  o.height_sd_scale = o.weight_sd_scale = 1.0;
  const auto ps = sample_population(t, 10000, 3, o);
  for (const auto& row : t.rows) {
    double sh = 0, sw = 0;
    std::size_t n = 0;
    for (const auto& p : ps)
      if (p.age_group == row.age_group && p.gender == row.gender) sh += p.height * 100, sw += p.weight, ++n;
    REQUIRE(n > 1000);
    // Three standard errors of the mean.
    CHECK(std::abs(sh / n - row.height_mean_cm) < 3 * row.height_sd_cm / std::sqrt(double(n)));
    CHECK(std::abs(sw / n - row.weight_mean_kg) < 3 * row.weight_sd_kg / std::sqrt(double(n)));
  }
}

TEST_CASE("sampled heights follow the truncated normal (KS)") {
  DemographicTable t;
  t.rows = {{AgeGroup::Age25To44, Gender::Male, 176.8, 0.3, 87.6, 0.8, 1.0}};
  const SamplerOptions o;  // default scales: sd 7 cm, 12 kg
  const auto ps = sample_population(t, 5000, 9, o);
  std::vector<double> h;
  for (const auto& p : ps) h.push_back(p.height);
  std::sort(h.begin(), h.end());
  const double mean = 1.768, sd = 0.003 * o.height_sd_scale;
  double d = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double f = truncated_normal_cdf(h[i], mean, sd, kMinHeight, kMaxHeight);
    d = std::max({d, std::abs(f - double(i) / h.size()), std::abs(f - double(i + 1) / h.size())});
  }
  // 1% critical value of the one-sample KS statistic.
  CHECK(d < 1.63 / std::sqrt(double(h.size())));
}

TEST_CASE("normal helpers") {
  CHECK(normal_cdf(0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-9));
  for (double p : {0.001, 0.1, 0.5, 0.9, 0.999}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("table validation and parameter ranges") {
  DemographicTable t = DemographicTable::defaults();
  t.rows[0].group_weight += 0.1;
  CHECK_THROWS_CODE(t.validate(), ErrorCode::InvalidArgument);
  BodyParams p;
  p.height = 2.5;
  CHECK_THROWS_CODE(p.validate(), ErrorCode::ParamOutOfRange);
  CHECK_THROWS_CODE(build_mesh(p), ErrorCode::ParamOutOfRange);
}

TEST_CASE("generator truth follows the parameters") {
  BodyParams p;
  p.height = 1.80;
  const BodyModel m = build_mesh(p);
  CHECK(m.truth.height == doctest::Approx(180.0));
  double top = -1e9, bottom = 1e9;
  for (const auto& v : m.mesh.vertices) top = std::max(top, v.y()), bottom = std::min(bottom, v.y());
  CHECK(top == doctest::Approx(1.80).epsilon(1e-9));
  CHECK(bottom == doctest::Approx(0.0).epsilon(1e-9));

  // Truth girths are the perimeters of the generating ellipses, and the mesh
  // slices through each section agree with them.
  const std::array<double, 5> girths = {m.truth.girth_neck, m.truth.girth_shoulder, m.truth.girth_chest,
                                        m.truth.girth_waist, m.truth.girth_hip};
  for (std::size_t g = 0; g < 5; ++g) {
    const SectionTruth& s = m.sections[g];
    CHECK(girths[g] == doctest::Approx(100 * arc_length(s.semi_x, s.semi_z)).epsilon(1e-3));
    const double slice = 100 * slice_perimeter(m.mesh, m.mesh.segment_id(s.segment), s.center.y() + 1e-9);
    CHECK(slice == doctest::Approx(girths[g]).epsilon(0.01));
  }
}

TEST_CASE("girths grow with weight") {
  BodyParams light, heavy;
  light.weight = 70;
  heavy.weight = 95;
  const Measurements a = build_mesh(light).truth, b = build_mesh(heavy).truth;
  CHECK(b.girth_neck > a.girth_neck);
  CHECK(b.girth_shoulder > a.girth_shoulder);
  CHECK(b.girth_chest > a.girth_chest);
  CHECK(b.girth_waist > a.girth_waist);
  CHECK(b.girth_hip > a.girth_hip);
}

TEST_CASE("female hip/waist ratio exceeds male at equal size") {
  const DemographicTable t = DemographicTable::defaults();
  for (std::uint64_t i = 0; i < 20; ++i) {
    BodyParams p = sample_one(t, 77, i);
    p.gender = Gender::Male;
    const Measurements m = build_mesh(p).truth;
    p.gender = Gender::Female;
    const Measurements f = build_mesh(p).truth;
    CHECK(f.girth_hip / f.girth_waist > m.girth_hip / m.girth_waist);
  }
}

TEST_CASE("rig remaps onto the generator skeleton") {
  const BodyModel m = build_mesh(BodyParams{});
  const Skeleton15 sk = remap_skeleton(m.rig, JointMapping::default_rig());
  for (std::size_t j = 0; j < kJointCount; ++j) CHECK((sk.joints[j] - m.skeleton.joints[j]).norm() < 1e-3);

  std::map<std::string, Vec3> named;
  for (JointId id : kAllJoints) named[std::string(joint_name(id))] = m.skeleton[id];
  const Skeleton15 same = remap_skeleton(named, JointMapping::identity());
  for (std::size_t j = 0; j < kJointCount; ++j) CHECK(same.joints[j] == m.skeleton.joints[j]);

  JointMapping mid = JointMapping::identity();
  mid.sources[static_cast<std::size_t>(JointId::NE)] = {"LS", "RS"};
  const Skeleton15 ne = remap_skeleton(named, mid);
  CHECK(ne[JointId::NE].isApprox(0.5 * (m.skeleton[JointId::LS] + m.skeleton[JointId::RS])));

  named.erase("HE");
  CHECK_THROWS_CODE(remap_skeleton(named, JointMapping::identity()), ErrorCode::MissingSourceJoint);
}

TEST_CASE("model bundles round-trip") {
  TempDir dir("bundle");
  BodyParams p;
  p.gender = Gender::Female;
  p.height = 1.62;
  p.weight = 58.5;
  const BodyModel m = build_mesh(p);
  export_model(m, dir.path / "m");
  const BodyModel back = import_model(dir.path / "m");
  CHECK(back.params == m.params);
  CHECK(back.truth == m.truth);
  REQUIRE(back.mesh.vertices.size() == m.mesh.vertices.size());
  CHECK(back.mesh.triangles == m.mesh.triangles);
  double worst = 0;
  for (std::size_t i = 0; i < m.mesh.vertices.size(); ++i)
    worst = std::max(worst, (back.mesh.vertices[i] - m.mesh.vertices[i]).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-6);
  std::filesystem::remove(dir.path / "m" / "skeleton.json");
  CHECK_THROWS_CODE(import_model(dir.path / "m"), ErrorCode::Format);
}
