#pragma once

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "bodyfit/core/camera.hpp"
#include "bodyfit/core/point_cloud.hpp"
#include "bodyfit/core/random.hpp"
#include "bodyfit/error.hpp"

namespace bodyfit::test {

#define CHECK_THROWS_CODE(expr, errc)                                    \
  do {                                                                   \
    bool thrown_ = false;                                                \
    try {                                                                \
      (void)(expr);                                                      \
    } catch (const ::bodyfit::Error& e_) {                               \
      thrown_ = true;                                                    \
      CHECK_MESSAGE(e_.code() == (errc), e_.what());                     \
    }                                                                    \
    CHECK_MESSAGE(thrown_, "expected an error from " #expr);             \
  } while (0)

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("bodyfit_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

inline Mat3 random_rotation(std::mt19937_64& rng) {
  Eigen::Quaterniond q(standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng));
  return q.normalized().toRotationMatrix();
}

// Dense grid on the plane z = depth, spacing h, centred on the optical axis.
inline PointCloud plane_patch(double half, double h, double depth) {
  PointCloud c;
  for (double x = -half; x <= half + 1e-12; x += h)
    for (double y = -half; y <= half + 1e-12; y += h) c.points.push_back({x, y, depth});
  return c;
}

// Frontal half of a cylinder of radius r whose axis is the y axis at z =
// depth: the visible side faces the camera at the origin.
inline PointCloud half_cylinder(double r, double height, double depth, double h) {
  PointCloud c;
  const int na = static_cast<int>(std::ceil(M_PI * r / h));
  for (double y = -height / 2; y <= height / 2 + 1e-12; y += h)
    for (int i = 0; i <= na; ++i) {
      const double t = M_PI * i / na;  // 0..pi across the front
      c.points.push_back({r * std::cos(t), y, depth - r * std::sin(t)});
    }
  return c;
}

}  // namespace bodyfit::test
