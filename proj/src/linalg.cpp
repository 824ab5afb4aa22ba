#include "cartimpact/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cartimpact/error.hpp"

namespace cartimpact {

Mat4 Mat4::identity() {
  Mat4 m;
  for (std::size_t i = 0; i < 4; ++i) m(i, i) = 1.0;
  return m;
}

Mat4 Mat4::diagonal(const Vec4& d) {
  Mat4 m;
  for (std::size_t i = 0; i < 4; ++i) m(i, i) = d[i];
  return m;
}

Mat4 matmul(const Mat4& lhs, const Mat4& rhs) {
  Mat4 out;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 4; ++k) acc += lhs(i, k) * rhs(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

Mat4 operator*(const Mat4& lhs, const Mat4& rhs) { return matmul(lhs, rhs); }

Vec4 operator*(const Mat4& m, const Vec4& v) {
  Vec4 out{};
  for (std::size_t i = 0; i < 4; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < 4; ++k) acc += m(i, k) * v[k];
    out[i] = acc;
  }
  return out;
}

Mat4 operator+(const Mat4& lhs, const Mat4& rhs) {
  Mat4 out;
  for (std::size_t i = 0; i < 16; ++i) out.a[i] = lhs.a[i] + rhs.a[i];
  return out;
}

Mat4 operator-(const Mat4& lhs, const Mat4& rhs) {
  Mat4 out;
  for (std::size_t i = 0; i < 16; ++i) out.a[i] = lhs.a[i] - rhs.a[i];
  return out;
}

Mat4 operator*(double s, const Mat4& m) {
  Mat4 out;
  for (std::size_t i = 0; i < 16; ++i) out.a[i] = s * m.a[i];
  return out;
}

Mat4 outer(const Vec4& u, const Vec4& v) {
  Mat4 out;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) out(i, j) = u[i] * v[j];
  return out;
}

Mat4 transpose(const Mat4& m) {
  Mat4 out;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) out(j, i) = m(i, j);
  return out;
}

double trace(const Mat4& m) { return m(0, 0) + m(1, 1) + m(2, 2) + m(3, 3); }

double determinant(const Mat4& m) {
  // LU with partial pivoting.
  Mat4 w = m;
  double det = 1.0;
  for (std::size_t col = 0; col < 4; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < 4; ++r)
      if (std::abs(w(r, col)) > std::abs(w(piv, col))) piv = r;
    if (w(piv, col) == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t c = 0; c < 4; ++c) std::swap(w(piv, c), w(col, c));
      det = -det;
    }
    det *= w(col, col);
    for (std::size_t r = col + 1; r < 4; ++r) {
      const double f = w(r, col) / w(col, col);
      for (std::size_t c = col; c < 4; ++c) w(r, c) -= f * w(col, c);
    }
  }
  return det;
}

Mat4 inverse(const Mat4& m) {
  Mat4 w = m;
  Mat4 inv = Mat4::identity();
  for (std::size_t col = 0; col < 4; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < 4; ++r)
      if (std::abs(w(r, col)) > std::abs(w(piv, col))) piv = r;
    if (w(piv, col) == 0.0) throw Error(ErrorCode::InvalidArgument, "inverse of singular matrix");
    if (piv != col) {
      for (std::size_t c = 0; c < 4; ++c) {
        std::swap(w(piv, c), w(col, c));
        std::swap(inv(piv, c), inv(col, c));
      }
    }
    const double d = w(col, col);
    for (std::size_t c = 0; c < 4; ++c) {
      w(col, c) /= d;
      inv(col, c) /= d;
    }
    for (std::size_t r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = w(r, col);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < 4; ++c) {
        w(r, c) -= f * w(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

double norm_inf(const Mat4& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 4; ++j) row += std::abs(m(i, j));
    best = std::max(best, row);
  }
  return best;
}

double max_abs(const Mat4& m) {
  double best = 0.0;
  for (double v : m.a) best = std::max(best, std::abs(v));
  return best;
}

bool all_finite(const Mat4& m) {
  return std::all_of(m.a.begin(), m.a.end(), [](double v) { return std::isfinite(v); });
}

double dot(const Vec4& u, const Vec4& v) {
  return u[0] * v[0] + u[1] * v[1] + u[2] * v[2] + u[3] * v[3];
}

namespace {

constexpr int kN = 4;
constexpr int kMaxSweeps = 500;
using Square = std::array<std::array<double, kN>, kN>;

double sign_of(double magnitude, double sign_source) {
  return sign_source >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

// Parlett-Reinsch balancing with radix 2 (exact in binary floating point).
void balance(Square& a) {
  constexpr double radix = 2.0;
  constexpr double radix_sq = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < kN; ++i) {
      double r = 0.0;
      double c = 0.0;
      for (int j = 0; j < kN; ++j) {
        if (j == i) continue;
        c += std::abs(a[j][i]);
        r += std::abs(a[i][j]);
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix_sq;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix_sq;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (int j = 0; j < kN; ++j) a[i][j] *= g;
        for (int j = 0; j < kN; ++j) a[j][i] *= f;
      }
    }
  }
}

// Reduction to upper Hessenberg form by stabilized elementary similarity
// transforms (Gaussian elimination with pivoting).
void to_hessenberg(Square& a) {
  for (int m = 1; m < kN - 1; ++m) {
    double x = 0.0;
    int piv = m;
    for (int j = m; j < kN; ++j) {
      if (std::abs(a[j][m - 1]) > std::abs(x)) {
        x = a[j][m - 1];
        piv = j;
      }
    }
    if (piv != m) {
      for (int j = m - 1; j < kN; ++j) std::swap(a[piv][j], a[m][j]);
      for (int j = 0; j < kN; ++j) std::swap(a[j][piv], a[j][m]);
    }
    if (x == 0.0) continue;
    for (int i = m + 1; i < kN; ++i) {
      double y = a[i][m - 1];
      if (y == 0.0) continue;
      y /= x;
      a[i][m - 1] = y;
      for (int j = m; j < kN; ++j) a[i][j] -= y * a[m][j];
      for (int j = 0; j < kN; ++j) a[j][m] += y * a[j][i];
    }
  }
  for (int i = 2; i < kN; ++i)
    for (int j = 0; j < i - 1; ++j) a[i][j] = 0.0;
}

// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only.
void hessenberg_qr(Square& a, std::array<double, kN>& wr, std::array<double, kN>& wi) {
  double anorm = 0.0;
  for (int i = 0; i < kN; ++i)
    for (int j = std::max(i - 1, 0); j < kN; ++j) anorm += std::abs(a[i][j]);

  int nn = kN - 1;
  double t = 0.0;
  int sweeps = 0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::abs(a[l - 1][l - 1]) + std::abs(a[l][l]);
        if (s == 0.0) s = anorm;
        if (std::abs(a[l][l - 1]) + s == s) {
          a[l][l - 1] = 0.0;
          break;
        }
      }
      double x = a[nn][nn];
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn] = 0.0;
        --nn;
      } else {
        double y = a[nn - 1][nn - 1];
        double w = a[nn][nn - 1] * a[nn - 1][nn];
        if (l == nn - 1) {
          const double p = 0.5 * (y - x);
          const double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = -z;
            wi[nn] = z;
          }
          nn -= 2;
        } else {
          if (++sweeps > kMaxSweeps)
            throw Error(ErrorCode::NoConvergence, "QR iteration exceeded 500 sweeps");
          if (its == 10 || its == 20) {
            // Exceptional shift.
            t += x;
            for (int i = 0; i <= nn; ++i) a[i][i] -= x;
            const double s = std::abs(a[nn][nn - 1]) + std::abs(a[nn - 1][nn - 2]);
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
          for (; m >= l; --m) {
            z = a[m][m];
            r = x - z;
            double s = y - z;
            p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
            q = a[m + 1][m + 1] - z - r - s;
            r = a[m + 2][m + 1];
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a[m][m - 1]) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a[m - 1][m - 1]) + std::abs(z) +
                                            std::abs(a[m + 1][m + 1]));
            if (u + v == v) break;
          }
          for (int i = m; i < nn - 1; ++i) {
            a[i + 2][i] = 0.0;
            if (i != m) a[i + 2][i - 1] = 0.0;
          }
          for (int k = m; k < nn; ++k) {
            if (k != m) {
              p = a[k][k - 1];
              q = a[k + 1][k - 1];
              r = 0.0;
              if (k + 1 != nn) r = a[k + 2][k - 1];
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a[k][k - 1] = -a[k][k - 1];
            } else {
              a[k][k - 1] = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              p = a[k][j] + q * a[k + 1][j];
              if (k + 1 != nn) {
                p += r * a[k + 2][j];
                a[k + 2][j] -= p * z;
              }
              a[k + 1][j] -= p * y;
              a[k][j] -= p * x;
            }
            const int mmin = nn < k + 3 ? nn : k + 3;
            for (int i = l; i <= mmin; ++i) {
              p = x * a[i][k] + y * a[i][k + 1];
              if (k + 1 != nn) {
                p += z * a[i][k + 2];
                a[i][k + 2] -= p * r;
              }
              a[i][k + 1] -= p * q;
              a[i][k] -= p;
            }
          }
        }
      }
    } while (l + 1 < nn);
  }
}

}  // namespace

std::array<ComplexEig, 4> eigenvalues(const Mat4& m) {
  if (!all_finite(m)) throw Error(ErrorCode::InvalidArgument, "eigenvalues of non-finite matrix");
  Square a{};
  for (int i = 0; i < kN; ++i)
    for (int j = 0; j < kN; ++j) a[i][j] = m(i, j);
  balance(a);
  to_hessenberg(a);
  std::array<double, kN> wr{};
  std::array<double, kN> wi{};
  hessenberg_qr(a, wr, wi);

  std::array<ComplexEig, 4> out{};
  for (int i = 0; i < kN; ++i) out[i] = {wr[i], wi[i], std::hypot(wr[i], wi[i])};
  std::sort(out.begin(), out.end(), [](const ComplexEig& lhs, const ComplexEig& rhs) {
    if (lhs.modulus != rhs.modulus) return lhs.modulus > rhs.modulus;
    if (lhs.re != rhs.re) return lhs.re > rhs.re;
    return lhs.im > rhs.im;
  });
  return out;
}

double spectral_radius(const Mat4& m) { return eigenvalues(m)[0].modulus; }

}  // namespace cartimpact
