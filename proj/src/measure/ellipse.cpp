#include "bodyfit/measure/ellipse.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "bodyfit/error.hpp"

namespace bodyfit {

using Conic = Eigen::Matrix<double, 6, 1>;

namespace {

Conic normalized(Conic c) {
  const double k = 4.0 * c[0] * c[2] - c[1] * c[1];
  if (!(k > 0.0)) fail(ErrorCode::NotAnEllipse, "conic is not an ellipse");
  c /= std::sqrt(k);
  return c;
}

}  // namespace

EllipseFit fit_ellipse(const std::vector<Vec2>& pts) {
  const std::size_t n = pts.size();
  if (n < 6) fail(ErrorCode::DegenerateInput, "ellipse fit needs at least 6 points, got " + std::to_string(n));
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(n);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(n);
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cov).eigenvalues();
  if (!(ev[1] > 0.0) || ev[0] <= 1e-12 * ev[1]) fail(ErrorCode::DegenerateInput, "points are collinear");
  const double scale = std::sqrt(ev[0] + ev[1]);

  // Halir & Flusser's partition of the scatter matrix.
  Eigen::Matrix3d S1 = Eigen::Matrix3d::Zero(), S2 = Eigen::Matrix3d::Zero(), S3 = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const double x = (p.x() - mean.x()) / scale, y = (p.y() - mean.y()) / scale;
    const Eigen::Vector3d d1(x * x, x * y, y * y), d2(x, y, 1.0);
    S1 += d1 * d1.transpose();
    S2 += d1 * d2.transpose();
    S3 += d2 * d2.transpose();
  }
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(S3);
  if (!lu.isInvertible()) fail(ErrorCode::DegenerateInput, "singular linear scatter block");
  const Eigen::Matrix3d T = -lu.solve(S2.transpose());
  const Eigen::Matrix3d M = S1 + S2 * T;
  Eigen::Matrix3d Mc;
  Mc.row(0) = M.row(2) / 2.0;
  Mc.row(1) = -M.row(1);
  Mc.row(2) = M.row(0) / 2.0;
  const Eigen::EigenSolver<Eigen::Matrix3d> es(Mc);
  int best = -1;
  double best_eval = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d v = es.eigenvectors().col(i).real();
    const double cond = 4.0 * v[0] * v[2] - v[1] * v[1];
    if (cond <= 0.0 || !v.allFinite()) continue;
    const double lambda = es.eigenvalues()[i].real();
    if (best < 0 || std::abs(lambda) < std::abs(best_eval)) {
      best = i;
      best_eval = lambda;
    }
  }
  if (best < 0) fail(ErrorCode::NotAnEllipse, "no eigenvector satisfies the ellipse constraint");
  const Eigen::Vector3d a1 = es.eigenvectors().col(best).real();
  const Eigen::Vector3d a2 = T * a1;

  // Undo the centring and scaling.
  const double A = a1[0], B = a1[1], C = a1[2], D = a2[0], E = a2[1], F = a2[2];
  const double s2 = scale * scale, mx = mean.x(), my = mean.y();
  Conic c;
  c[0] = A / s2;
  c[1] = B / s2;
  c[2] = C / s2;
  c[3] = (-2 * A * mx - B * my) / s2 + D / scale;
  c[4] = (-2 * C * my - B * mx) / s2 + E / scale;
  c[5] = (A * mx * mx + B * mx * my + C * my * my) / s2 - (D * mx + E * my) / scale + F;
  c = normalized(c);

  EllipseFit fit;
  fit.conic = c;
  Eigen::Matrix2d Q;
  Q << c[0], c[1] / 2, c[1] / 2, c[2];
  const Vec2 center = Q.ldlt().solve(Vec2(-c[3] / 2, -c[4] / 2));
  const double f0 = c[5] + 0.5 * (c[3] * center.x() + c[4] * center.y());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> qs(Q);
  const double l0 = qs.eigenvalues()[0], l1 = qs.eigenvalues()[1];
  // The sign of the conic is arbitrary; the semi-axes are sqrt(-f0 / lambda).
  const double r0 = -f0 / l0, r1 = -f0 / l1;
  if (!(r0 > 0.0) || !(r1 > 0.0) || !std::isfinite(r0) || !std::isfinite(r1))
    fail(ErrorCode::NotAnEllipse, "fitted conic has no real ellipse");
  fit.center = center;
  // Smaller |lambda| belongs to the major axis.
  const int major = std::abs(l0) <= std::abs(l1) ? 0 : 1;
  fit.a = std::sqrt(major == 0 ? r0 : r1);
  fit.b = std::sqrt(major == 0 ? r1 : r0);
  const Vec2 dir = qs.eigenvectors().col(major);
  double ang = std::atan2(dir.y(), dir.x());
  if (ang <= -std::numbers::pi / 2) ang += std::numbers::pi;
  if (ang > std::numbers::pi / 2) ang -= std::numbers::pi;
  fit.angle = ang;
  return fit;
}

double algebraic_residual(const Conic& conic, const std::vector<Vec2>& pts) {
  const Conic c = normalized(conic);
  double sum = 0.0;
  for (const auto& p : pts) {
    const double x = p.x(), y = p.y();
    const double r = c[0] * x * x + c[1] * x * y + c[2] * y * y + c[3] * x + c[4] * y + c[5];
    sum += r * r;
  }
  return sum;
}

Conic conic_from_params(const Vec2& center, double a, double b, double angle) {
  if (!(a > 0.0) || !(b > 0.0)) fail(ErrorCode::InvalidArgument, "ellipse semi-axes must be positive");
  const double cs = std::cos(angle), sn = std::sin(angle);
  const double ia = 1.0 / (a * a), ib = 1.0 / (b * b);
  const double A = cs * cs * ia + sn * sn * ib;
  const double B = 2.0 * cs * sn * (ia - ib);
  const double C = sn * sn * ia + cs * cs * ib;
  const double cx = center.x(), cy = center.y();
  Conic c;
  c << A, B, C, -2 * A * cx - B * cy, -B * cx - 2 * C * cy, A * cx * cx + B * cx * cy + C * cy * cy - 1.0;
  return normalized(c);
}

double ellipse_perimeter(double a, double b) {
  const double s = a + b;
  if (!(s > 0.0)) return 0.0;
  const double h = ((a - b) / s) * ((a - b) / s);
  return std::numbers::pi * s * (1.0 + 3.0 * h / (10.0 + std::sqrt(4.0 - 3.0 * h)));
}

double ellipse_perimeter_ramanujan1(double a, double b) {
  return std::numbers::pi * (3.0 * (a + b) - std::sqrt((3.0 * a + b) * (a + 3.0 * b)));
}

}  // namespace bodyfit
