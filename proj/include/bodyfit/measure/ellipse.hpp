#pragma once

#include <vector>

#include "bodyfit/core/types.hpp"

namespace bodyfit {

struct EllipseFit {
  Vec2 center = Vec2::Zero();
  double a = 0.0;      // semi-major, m
  double b = 0.0;      // semi-minor, m
  double angle = 0.0;  // orientation of the major axis, rad in (-pi/2, pi/2]
  // Conic coefficients (A, B, C, D, E, F) of A x^2 + B xy + C y^2 + D x + E y + F = 0
  // in the input coordinates, scaled so that 4AC - B^2 = 1.
  Eigen::Matrix<double, 6, 1> conic = Eigen::Matrix<double, 6, 1>::Zero();
};

// Direct least-squares ellipse fit with the 4AC - B^2 = 1 constraint, solved
// in the numerically stable block form on centred and scaled coordinates.
// Throws DegenerateInput (fewer than 6 points, collinear) or NotAnEllipse.
EllipseFit fit_ellipse(const std::vector<Vec2>& points);

// Sum of squared algebraic residuals of `conic` over `points`, with the conic
// normalised to 4AC - B^2 = 1.
double algebraic_residual(const Eigen::Matrix<double, 6, 1>& conic, const std::vector<Vec2>& points);

// Conic coefficients for an ellipse given in centre/axes/angle form.
Eigen::Matrix<double, 6, 1> conic_from_params(const Vec2& center, double a, double b, double angle);

// Ramanujan's second approximation; relative error below 1e-6 for a/b <= 5.
double ellipse_perimeter(double a, double b);
inline double ellipse_perimeter(const EllipseFit& e) { return ellipse_perimeter(e.a, e.b); }
// pi [3(a+b) - sqrt((3a+b)(a+3b))]
double ellipse_perimeter_ramanujan1(double a, double b);

}  // namespace bodyfit
