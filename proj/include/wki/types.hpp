#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

namespace wki {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Japanese bracket sqrt(1 + |q|^2).
inline double bracket(cplx q) { return std::sqrt(1.0 + std::norm(q)); }

inline Mat2 identity2() { return Mat2::Identity(); }

}  // namespace wki
