#pragma once

// Fixed-size dense linear algebra for the 4-dimensional phase space of the
// cart-pendulum. Everything lives on the stack; no allocation.

#include <array>
#include <cstddef>

namespace cartimpact {

using Vec4 = std::array<double, 4>;

/// 4x4 real matrix, row-major.
struct Mat4 {
  std::array<double, 16> a{};

  double& operator()(std::size_t row, std::size_t col) { return a[row * 4 + col]; }
  double operator()(std::size_t row, std::size_t col) const { return a[row * 4 + col]; }

  static Mat4 identity();
  static Mat4 zero() { return Mat4{}; }
  static Mat4 diagonal(const Vec4& d);

  bool operator==(const Mat4&) const = default;
};

Mat4 matmul(const Mat4& lhs, const Mat4& rhs);
Mat4 operator*(const Mat4& lhs, const Mat4& rhs);
Vec4 operator*(const Mat4& m, const Vec4& v);
Mat4 operator+(const Mat4& lhs, const Mat4& rhs);
Mat4 operator-(const Mat4& lhs, const Mat4& rhs);
Mat4 operator*(double s, const Mat4& m);

/// u vᵀ
Mat4 outer(const Vec4& u, const Vec4& v);
Mat4 transpose(const Mat4& m);
double trace(const Mat4& m);
double determinant(const Mat4& m);
/// Gauss-Jordan with partial pivoting; throws InvalidArgument when singular.
Mat4 inverse(const Mat4& m);
/// Induced infinity norm (max absolute row sum).
double norm_inf(const Mat4& m);
double max_abs(const Mat4& m);
bool all_finite(const Mat4& m);

double dot(const Vec4& u, const Vec4& v);

struct ComplexEig {
  double re = 0.0;
  double im = 0.0;
  double modulus = 0.0;
};

/// Eigenvalues via balancing, Hessenberg reduction and Francis double-shift
/// QR. Sorted by descending modulus, then descending real part, then
/// descending imaginary part. Throws NoConvergence after 500 QR sweeps.
std::array<ComplexEig, 4> eigenvalues(const Mat4& m);

/// Largest eigenvalue modulus.
double spectral_radius(const Mat4& m);

}  // namespace cartimpact
