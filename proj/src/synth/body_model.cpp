#include "bodyfit/synth/body_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>

#include "bodyfit/error.hpp"
#include "bodyfit/measure/anthropometrics.hpp"

namespace bodyfit {

std::size_t TriangleMesh::segment_id(const std::string& name) const {
  for (std::size_t i = 0; i < segment_names.size(); ++i)
    if (segment_names[i] == name) return i;
  fail(ErrorCode::InvalidArgument, "mesh has no segment " + name);
}

namespace {

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
// Homogeneous of degree one in the data, so scaling every knot value by k
// scales the curve by k.
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)), d_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 2) {
      d_.assign(n, 0.0);
      return;
    }
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = x_[k + 1] - x_[k];
      delta[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    if (n == 2) {
      d_[0] = d_[1] = delta[0];
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (delta[k - 1] * delta[k] <= 0.0) continue;
      const double w1 = 2 * h[k] + h[k - 1], w2 = h[k] + 2 * h[k - 1];
      d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  double operator()(double t) const {
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
    const double h = x_[k + 1] - x_[k], s = (t - x_[k]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1];
  }

 private:
  static double end_slope(double h0, double h1, double d0, double d1) {
    double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(d) > 3 * std::abs(d0)) return 3 * d0;
    return d;
  }

  std::vector<double> x_, y_, d_;
};

struct Ring {
  Vec3 center;
  Vec3 e1, e2;  // e1 x e2 points along increasing ring index
  double a, b;
};

class MeshBuilder {
 public:
  explicit MeshBuilder(TriangleMesh& mesh) : m_(mesh) {}

  // Tube through `rings`, closed by triangle fans to cap0 / cap1 (ring
  // centres when not given).
  void tube(const std::string& segment, const std::vector<Ring>& rings, int n_around,
            std::optional<Vec3> cap0 = std::nullopt, std::optional<Vec3> cap1 = std::nullopt) {
    const auto seg = static_cast<std::uint16_t>(m_.segment_names.size());
    m_.segment_names.push_back(segment);
    const auto base = static_cast<std::uint32_t>(m_.vertices.size());
    const auto n = static_cast<std::uint32_t>(n_around);
    for (const Ring& r : rings) {
      for (std::uint32_t k = 0; k < n; ++k) {
        const double th = 2.0 * std::numbers::pi * k / n;
        m_.vertices.push_back(r.center + r.a * std::cos(th) * r.e1 + r.b * std::sin(th) * r.e2);
      }
    }
    const auto at = [&](std::size_t i, std::uint32_t k) { return base + static_cast<std::uint32_t>(i) * n + k % n; };
    for (std::size_t i = 0; i + 1 < rings.size(); ++i) {
      for (std::uint32_t k = 0; k < n; ++k) {
        add(at(i, k), at(i, k + 1), at(i + 1, k + 1), seg);
        add(at(i, k), at(i + 1, k + 1), at(i + 1, k), seg);
      }
    }
    const auto c0 = static_cast<std::uint32_t>(m_.vertices.size());
    m_.vertices.push_back(cap0.value_or(rings.front().center));
    const auto c1 = static_cast<std::uint32_t>(m_.vertices.size());
    m_.vertices.push_back(cap1.value_or(rings.back().center));
    const std::size_t last = rings.size() - 1;
    for (std::uint32_t k = 0; k < n; ++k) {
      add(c0, at(0, k + 1), at(0, k), seg);
      add(c1, at(last, k), at(last, k + 1), seg);
    }
  }

 private:
  void add(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint16_t seg) {
    m_.triangles.push_back({a, b, c});
    m_.triangle_segment.push_back(seg);
  }
  TriangleMesh& m_;
};

// Ring heights: a uniform grid plus every height that must be represented
// exactly.
std::vector<double> ring_heights(double lo, double hi, double step, const std::vector<double>& extra) {
  std::vector<double> ys;
  const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / step)));
  for (int i = 0; i <= n; ++i) {
    const double y = lo + (hi - lo) * i / n;
    const bool crowded = std::any_of(extra.begin(), extra.end(), [&](double e) { return std::abs(e - y) < 0.3 * step; });
    if (i == 0 || i == n || !crowded) ys.push_back(y);
  }
  for (double e : extra)
    if (e > lo + 0.1 * step && e < hi - 0.1 * step) ys.push_back(e);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  return ys;
}

struct TorsoKey {
  double y, sx, sz, dz;
};

// Anchor heights (.530 hip, .620 waist, .725 chest, .8525 shoulder) sit on
// local extrema or plateaus so the measured slab sees a locally constant
// section.
constexpr TorsoKey kMaleTorso[] = {
    {.460, .085, .060, 0}, {.490, .100, .066, 0}, {.530, .104, .068, 0}, {.580, .098, .064, 0},
    {.620, .092, .062, 0}, {.670, .096, .064, 0}, {.700, .103, .070, 0}, {.725, .103, .070, 0},
    {.750, .103, .070, 0}, {.790, .114, .065, 0}, {.820, .118, .060, 0}, {.840, .110, .057, 0},
    {.8525, .110, .057, 0}, {.866, .106, .055, 0},
};
constexpr TorsoKey kFemaleTorso[] = {
    {.460, .090, .062, 0}, {.490, .106, .070, 0}, {.530, .110, .072, 0}, {.580, .096, .064, 0},
    {.620, .080, .056, 0}, {.670, .086, .060, 0}, {.700, .094, .078, -.006}, {.725, .094, .078, -.006},
    {.750, .094, .078, -.006}, {.790, .100, .065, 0}, {.820, .102, .062, 0}, {.840, .098, .057, 0},
    {.8525, .098, .057, 0}, {.866, .095, .055, 0},
};

// Stature fractions.
constexpr double kTorsoBottom = 0.460, kTorsoTop = 0.866;
constexpr double kNeckBottom = 0.80, kNeckTop = 0.92;
constexpr double kHeadCenter = 0.94;
constexpr double kNeckJoint = 0.83, kTorsoJoint = 0.62, kShoulderJoint = 0.82, kHipJoint = 0.53;
constexpr double kKneeJoint = 0.285, kFootJoint = 0.045;
constexpr double kUpperArm = 0.186, kForearm = 0.146, kPalm = 0.372, kFingertip = 0.432;
constexpr double kArmDroop = 30.0 * std::numbers::pi / 180.0;
constexpr double kRingStep = 0.006;

struct Shape {
  double H;
  double gm;  // BMI-driven girth multiplier
  bool female;
  std::vector<TorsoKey> torso;  // scaled, in meters
  double neck_sx, neck_sz;
  double head_sx, head_sy, head_sz;
};

double region_exponent(double y, bool female) {
  const double hip = female ? 1.2 : 0.9, waist = female ? 1.2 : 1.4, chest = 1.0, shoulders = 0.7;
  if (y <= 0.535) return hip;
  if (y <= 0.585) return 0.5 * (hip + waist);
  if (y <= 0.675) return waist;
  if (y <= 0.76) return chest;
  return shoulders;
}

double age_waist_factor(AgeGroup g) {
  switch (g) {
    case AgeGroup::Age18To24: return 0.97;
    case AgeGroup::Age25To44: return 1.0;
    case AgeGroup::Age45To64: return 1.035;
    case AgeGroup::Age65To74: return 1.05;
  }
  return 1.0;
}

double age_shoulder_factor(AgeGroup g) {
  switch (g) {
    case AgeGroup::Age45To64: return 0.99;
    case AgeGroup::Age65To74: return 0.98;
    default: return 1.0;
  }
}

Shape make_shape(const BodyParams& p) {
  Shape s;
  s.H = p.height;
  s.female = p.gender == Gender::Female;
  const double bmi = p.weight / (p.height * p.height);
  s.gm = std::clamp(std::sqrt(bmi / 22.0), 0.75, 1.6);
  const double waist_age = age_waist_factor(p.age_group), shoulder_age = age_shoulder_factor(p.age_group);
  for (const TorsoKey& k : s.female ? std::span<const TorsoKey>(kFemaleTorso) : std::span<const TorsoKey>(kMaleTorso)) {
    double f = std::pow(s.gm, region_exponent(k.y, s.female));
    if (k.y > 0.57 && k.y < 0.59) f *= std::sqrt(waist_age);
    else if (k.y > 0.59 && k.y < 0.68) f *= waist_age;
    else if (k.y > 0.81) f *= shoulder_age;
    s.torso.push_back({k.y * s.H, k.sx * s.H * f, k.sz * s.H * f, k.dz * s.H});
  }
  const double nf = std::pow(s.gm, 0.8);
  s.neck_sx = (s.female ? 0.030 : 0.034) * s.H * nf;
  s.neck_sz = (s.female ? 0.033 : 0.037) * s.H * nf;
  s.head_sx = (s.female ? 0.043 : 0.044) * s.H;
  s.head_sy = 0.06 * s.H;
  s.head_sz = (s.female ? 0.052 : 0.053) * s.H;
  return s;
}

struct TorsoProfile {
  Pchip sx, sz, dz;
  explicit TorsoProfile(const std::vector<TorsoKey>& keys)
      : sx(column(keys, &TorsoKey::sx)), sz(column(keys, &TorsoKey::sz)), dz(column(keys, &TorsoKey::dz)) {}
  static Pchip column(const std::vector<TorsoKey>& keys, double TorsoKey::*field) {
    std::vector<double> x, y;
    for (const auto& k : keys) {
      x.push_back(k.y);
      y.push_back(k.*field);
    }
    return Pchip(x, y);
  }
};

Vec3 unit(const Vec3& v) { return v.normalized(); }

// Frame for a tube running along d with e1 close to `hint`.
std::pair<Vec3, Vec3> frame_for(const Vec3& d, const Vec3& hint) {
  const Vec3 e1 = unit(hint - hint.dot(d) * d);
  return {e1, d.cross(e1)};
}

}  // namespace

BodyModel build_mesh(const BodyParams& params) {
  params.validate();
  const Shape s = make_shape(params);
  const double H = s.H, gm = s.gm;
  const TorsoProfile torso(s.torso);
  BodyModel model;
  model.params = params;
  MeshBuilder mb(model.mesh);
  const Vec3 X(1, 0, 0), Y(0, 1, 0), Z(0, 0, 1);
  const double step = kRingStep * H;

  // Joints and anchors.
  const double shoulder_x = 0.85 * torso.sx(kShoulderJoint * H);
  const double hip_x = 0.052 * (s.female ? 1.06 : 1.0) * H;
  const double knee_x = 0.047 * H, foot_x = 0.045 * H;
  const double y_neck_anchor = 0.5 * (kNeckJoint + kHeadCenter) * H;
  const double y_shoulder_anchor = 0.5 * (y_neck_anchor + kShoulderJoint * H);
  const double y_chest_anchor = 0.5 * (kNeckJoint + kTorsoJoint) * H;

  // Torso.
  {
    std::vector<double> extra = {y_shoulder_anchor, y_chest_anchor, kTorsoJoint * H, kHipJoint * H,
                                 kShoulderJoint * H};
    for (const auto& k : s.torso) extra.push_back(k.y);
    std::vector<Ring> rings;
    for (double y : ring_heights(kTorsoBottom * H, kTorsoTop * H, step, extra))
      rings.push_back({Vec3(0, y, torso.dz(y)), X, -Z, torso.sx(y), torso.sz(y)});
    mb.tube("torso", rings, 64);
  }
  // Neck.
  {
    std::vector<Ring> rings;
    for (double y : ring_heights(kNeckBottom * H, kNeckTop * H, step, {y_neck_anchor}))
      rings.push_back({Vec3(0, y, 0), X, -Z, s.neck_sx, s.neck_sz});
    mb.tube("neck", rings, 32);
  }
  // Head: latitude rings of an ellipsoid closed at the poles.
  const Vec3 head_c(0, kHeadCenter * H, 0);
  {
    const int n_lat = 24;
    std::vector<Ring> rings;
    for (int i = 1; i < n_lat; ++i) {
      const double phi = -std::numbers::pi / 2 + std::numbers::pi * i / n_lat;
      rings.push_back({head_c + Vec3(0, s.head_sy * std::sin(phi), 0), X, -Z, s.head_sx * std::cos(phi),
                       s.head_sz * std::cos(phi)});
    }
    mb.tube("head", rings, 32, head_c - Vec3(0, s.head_sy, 0), head_c + Vec3(0, s.head_sy, 0));
  }

  std::map<std::string, Vec3>& rig = model.rig;
  rig["root"] = Vec3(0, kHipJoint * H, 0);
  rig["spine05"] = Vec3(0, 0.50 * H, 0);
  rig["spine04"] = Vec3(0, 0.56 * H, 0);
  rig["spine03"] = Vec3(0, kTorsoJoint * H, 0);
  rig["spine02"] = Vec3(0, 0.70 * H, 0);
  rig["spine01"] = Vec3(0, 0.77 * H, 0);
  rig["neck01"] = Vec3(0, 0.85 * H, 0);
  rig["neck02"] = Vec3(0, 0.89 * H, 0);
  rig["head"] = head_c;
  rig["head_end"] = Vec3(0, H, 0);

  // Arms and hands; side -1 is the subject's left (model -x).
  const double af = std::pow(gm, 0.9);
  for (int side : {-1, 1}) {
    const std::string sfx = side < 0 ? ".L" : ".R";
    const Vec3 dir(side * std::cos(kArmDroop), -std::sin(kArmDroop), 0);
    const Vec3 sh(side * shoulder_x, kShoulderJoint * H, 0);
    const Vec3 elbow = sh + kUpperArm * H * dir;
    const Vec3 wrist = sh + (kUpperArm + kForearm) * H * dir;
    const Vec3 palm = sh + kPalm * H * dir;
    const Vec3 tip = sh + kFingertip * H * dir;
    rig["clavicle" + sfx] = Vec3(side * 0.04 * H, kNeckJoint * H, 0);
    rig["shoulder01" + sfx] = sh;
    rig["lowerarm01" + sfx] = elbow;
    rig["wrist" + sfx] = wrist;
    rig["hand" + sfx] = palm;
    rig["fingertip" + sfx] = tip;

    const auto [e1, e2] = frame_for(dir, Z.cross(dir));
    const Pchip arm_r({0.0, kUpperArm * H, (kUpperArm + kForearm) * H},
                      {0.030 * H * af, 0.022 * H * af, 0.015 * H * af});
    std::vector<Ring> arm;
    for (double t : ring_heights(0.0, (kUpperArm + kForearm) * H, step, {kUpperArm * H})) {
      const double r = arm_r(t);
      arm.push_back({sh + t * dir, e1, e2, r, r});
    }
    mb.tube(side < 0 ? "arm_left" : "arm_right", arm, 24);

    const double t0 = (kUpperArm + kForearm) * H - 0.01 * H;
    const Pchip hand_w({t0, kPalm * H, kFingertip * H}, {0.018 * H, 0.024 * H, 0.012 * H});
    const Pchip hand_t({t0, kPalm * H, kFingertip * H}, {0.013 * H, 0.010 * H, 0.006 * H});
    std::vector<Ring> hand;
    for (double t : ring_heights(t0, kFingertip * H, step * 0.5, {kPalm * H}))
      hand.push_back({sh + t * dir, e1, e2, hand_w(t), hand_t(t)});
    mb.tube(side < 0 ? "hand_left" : "hand_right", hand, 24);
  }

  // Legs and feet.
  const double thigh_f = std::pow(gm, 0.9) * (s.female ? 1.04 : 1.0), calf_f = std::pow(gm, 0.5);
  const Pchip leg_r({0.03 * H, kFootJoint * H, 0.10 * H, 0.20 * H, kKneeJoint * H, 0.35 * H, 0.42 * H, 0.505 * H},
                    {0.017 * H * calf_f, 0.018 * H * calf_f, 0.022 * H * calf_f, 0.036 * H * calf_f,
                     0.031 * H * thigh_f, 0.037 * H * thigh_f, 0.043 * H * thigh_f, 0.047 * H * thigh_f});
  const Pchip leg_x({kFootJoint * H, kKneeJoint * H, kHipJoint * H}, {foot_x, knee_x, hip_x});
  for (int side : {-1, 1}) {
    const std::string sfx = side < 0 ? ".L" : ".R";
    rig["pelvis" + sfx] = Vec3(side * 0.05 * H, 0.56 * H, 0);
    rig["upperleg01" + sfx] = Vec3(side * hip_x, kHipJoint * H, 0);
    rig["lowerleg01" + sfx] = Vec3(side * knee_x, kKneeJoint * H, 0);
    rig["foot" + sfx] = Vec3(side * foot_x, kFootJoint * H, 0);
    rig["toe1" + sfx] = Vec3(side * foot_x, 0.02 * H, -0.10 * H);

    std::vector<Ring> leg;
    for (double y : ring_heights(0.03 * H, 0.505 * H, step, {kKneeJoint * H, kFootJoint * H})) {
      const double r = leg_r(y);
      leg.push_back({Vec3(side * leg_x(y), y, 0), X, -Z, r, r});
    }
    mb.tube(side < 0 ? "leg_left" : "leg_right", leg, 32);

    // Foot runs toward the toes (-z); sole stays on y = 0.
    const Pchip foot_w({-0.035 * H, 0.0, 0.08 * H, 0.11 * H}, {0.022 * H, 0.026 * H, 0.028 * H, 0.020 * H});
    const Pchip foot_h({-0.035 * H, 0.0, 0.08 * H, 0.11 * H}, {0.020 * H, 0.022 * H, 0.016 * H, 0.010 * H});
    const Vec3 d = -Z;
    const auto [e1, e2] = frame_for(d, X);
    std::vector<Ring> foot;
    for (double t : ring_heights(-0.035 * H, 0.11 * H, step, {})) {
      const double h = foot_h(t);
      foot.push_back({Vec3(side * foot_x, h, -t), e1, e2, foot_w(t), h});
    }
    mb.tube(side < 0 ? "foot_left" : "foot_right", foot, 24);
  }

  // Skeleton15 from the rig through the standard mapping.
  using J = JointId;
  Skeleton15& sk = model.skeleton;
  sk[J::HE] = rig["head"];
  sk[J::NE] = 0.5 * (rig["clavicle.L"] + rig["clavicle.R"]);
  sk[J::TO] = rig["spine03"];
  sk[J::LS] = rig["shoulder01.L"];
  sk[J::RS] = rig["shoulder01.R"];
  sk[J::LE] = rig["lowerarm01.L"];
  sk[J::RE] = rig["lowerarm01.R"];
  sk[J::LA] = rig["hand.L"];
  sk[J::RA] = rig["hand.R"];
  sk[J::LH] = rig["upperleg01.L"];
  sk[J::RH] = rig["upperleg01.R"];
  sk[J::LK] = rig["lowerleg01.L"];
  sk[J::RK] = rig["lowerleg01.R"];
  sk[J::LF] = rig["foot.L"];
  sk[J::RF] = rig["foot.R"];

  const auto torso_section = [&](double y) {
    return SectionTruth{Vec3(0, y, torso.dz(y)), torso.sx(y), torso.sz(y), "torso"};
  };
  auto& sec = model.sections;
  sec[static_cast<int>(Girth::Neck)] = {Vec3(0, y_neck_anchor, 0), s.neck_sx, s.neck_sz, "neck"};
  sec[static_cast<int>(Girth::Shoulder)] = torso_section(y_shoulder_anchor);
  sec[static_cast<int>(Girth::Chest)] = torso_section(y_chest_anchor);
  sec[static_cast<int>(Girth::Waist)] = torso_section(kTorsoJoint * H);
  sec[static_cast<int>(Girth::Hip)] = torso_section(kHipJoint * H);

  const auto girth = [&](Girth g) {
    const auto& e = sec[static_cast<int>(g)];
    return 100.0 * ellipse_perimeter(std::max(e.semi_x, e.semi_z), std::min(e.semi_x, e.semi_z));
  };
  Measurements& t = model.truth;
  t.height = params.height * 100.0;
  const LimbLengths limbs = limb_lengths(sk);
  t.sleeve_length = limbs.sleeve;
  t.leg_length = limbs.leg;
  t.shoulder_length = limbs.shoulder;
  t.girth_neck = girth(Girth::Neck);
  t.girth_shoulder = girth(Girth::Shoulder);
  t.girth_chest = girth(Girth::Chest);
  t.girth_waist = girth(Girth::Waist);
  t.girth_hip = girth(Girth::Hip);
  return model;
}

}  // namespace bodyfit
