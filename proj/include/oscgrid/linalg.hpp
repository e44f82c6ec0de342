#pragma once

#include <cmath>
#include <numbers>
#include <span>

#include <Eigen/Dense>

namespace oscgrid {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

inline Mat2 rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

// 90 degree rotation; plays the role of the imaginary unit in alpha-beta coordinates.
inline Mat2 j_matrix() {
  Mat2 j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

inline Vec2 node_of(const Vec& v, Index k) { return v.segment<2>(2 * k); }

// a (x) I2
inline Mat kron_i2(const Mat& a) {
  Mat out = Mat::Zero(2 * a.rows(), 2 * a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out(2 * i, 2 * j) = a(i, j);
      out(2 * i + 1, 2 * j + 1) = a(i, j);
    }
  }
  return out;
}

inline Mat block_diagonal(std::span<const Mat2> blocks) {
  const auto n = static_cast<Index>(blocks.size());
  Mat out = Mat::Zero(2 * n, 2 * n);
  for (Index k = 0; k < n; ++k) out.block<2, 2>(2 * k, 2 * k) = blocks[static_cast<std::size_t>(k)];
  return out;
}

// I_N (x) R(angle)
inline Mat block_rotation(Index n, double angle) {
  const Mat2 r = rotation(angle);
  Mat out = Mat::Zero(2 * n, 2 * n);
  for (Index k = 0; k < n; ++k) out.block<2, 2>(2 * k, 2 * k) = r;
  return out;
}

// I_N (x) J
inline Mat block_j(Index n) {
  Mat out = Mat::Zero(2 * n, 2 * n);
  for (Index k = 0; k < n; ++k) out.block<2, 2>(2 * k, 2 * k) = j_matrix();
  return out;
}

// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

inline double deg(double rad) { return rad * 180.0 / kPi; }
inline double rad(double deg) { return deg * kPi / 180.0; }

}  // namespace oscgrid
