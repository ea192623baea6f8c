#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qmf {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector2c = Eigen::Vector2cd;
using Vector4c = Eigen::Vector4cd;
using Vector4d = Eigen::Vector4d;
using Matrix4d = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qmf
