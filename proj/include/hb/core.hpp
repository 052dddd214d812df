#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hb {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// SI constants (CODATA 2018 exact values where defined).
namespace si {
inline constexpr double planck = 6.62607015e-34;
inline constexpr double hbar = planck / (2.0 * std::numbers::pi);
inline constexpr double light_speed = 299792458.0;
inline constexpr double electron_mass = 9.1093837015e-31;
inline constexpr double boltzmann = 1.380649e-23;
}  // namespace si

enum class ErrorKind {
  DimensionMismatch,
  Resolution,
  Degenerate,
  Normalization,
  InvalidArgument,
  RankDeficient,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Normalization: return "normalization";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::RankDeficient: return "rank deficient";
  }
  return "unknown";
}

/// Base exception for every library precondition failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

/// Relative deviation |a - b| / max(|b|, floor).
inline double rel_diff(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

}  // namespace hb
