#pragma once

#include <array>
#include <cmath>

#include "thread5d/errors.hpp"

namespace thread5d {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec5 = std::array<double, 5>;
using Mat5 = std::array<std::array<double, 5>, 5>;

inline double det3(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Adjugate-based inverse; fine at 3x3 and keeps symmetric inputs symmetric
// up to rounding. Throws on a singular input.
inline Mat3 inverse3(const Mat3& m) {
  const double det = det3(m);
  if (det == 0.0 || !std::isfinite(det))
    throw NumericError("singular 3x3 matrix");
  const double s = 1.0 / det;
  Mat3 r;
  r[0][0] = s * (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
  r[0][1] = s * (m[0][2] * m[2][1] - m[0][1] * m[2][2]);
  r[0][2] = s * (m[0][1] * m[1][2] - m[0][2] * m[1][1]);
  r[1][0] = s * (m[1][2] * m[2][0] - m[1][0] * m[2][2]);
  r[1][1] = s * (m[0][0] * m[2][2] - m[0][2] * m[2][0]);
  r[1][2] = s * (m[0][2] * m[1][0] - m[0][0] * m[1][2]);
  r[2][0] = s * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  r[2][1] = s * (m[0][1] * m[2][0] - m[0][0] * m[2][1]);
  r[2][2] = s * (m[0][0] * m[1][1] - m[0][1] * m[1][0]);
  return r;
}

// Gauss-Jordan with partial pivoting. Throws NumericError when the pivot
// collapses (metric assembled from invalid fields, or evaluation outside
// the metric's valid region).
inline Mat5 inverse5(const Mat5& m) {
  Mat5 a = m;
  Mat5 inv{};
  for (int i = 0; i < 5; ++i) inv[i][i] = 1.0;

  for (int col = 0; col < 5; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 5; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (std::fabs(a[pivot][col]) < 1e-300)
      throw NumericError("singular 5x5 metric");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double s = 1.0 / a[col][col];
    for (int j = 0; j < 5; ++j) {
      a[col][j] *= s;
      inv[col][j] *= s;
    }
    for (int r = 0; r < 5; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (int j = 0; j < 5; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

// Leading principal minors, used for the SPD check on the spatial 3-metric.
inline std::array<double, 3> leading_minors3(const Mat3& m) {
  return {m[0][0],
          m[0][0] * m[1][1] - m[0][1] * m[1][0],
          det3(m)};
}

} // namespace thread5d
