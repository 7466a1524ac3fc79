#pragma once
// Small dense vectors/matrices for state dimensions up to 4, plus the
// symmetric eigen utilities used by the curvature-matrix analysis.
// Deliberately dependency-free: closed forms at d<=2, Jacobi sweeps above.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace nibec {

inline constexpr int kMaxDim = 4;

struct Vec {
  int n = 0;
  std::array<double, kMaxDim> v{};

  Vec() = default;
  explicit Vec(int n_) : n(n_) {
    if (n_ < 0 || n_ > kMaxDim) throw std::invalid_argument("Vec: bad dim");
  }
  Vec(std::initializer_list<double> xs) : n(static_cast<int>(xs.size())) {
    if (n > kMaxDim) throw std::invalid_argument("Vec: bad dim");
    int i = 0;
    for (double x : xs) v[static_cast<size_t>(i++)] = x;
  }
  double& operator[](int i) { return v[static_cast<size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<size_t>(i)]; }
};

inline Vec operator+(Vec a, const Vec& b) {
  for (int i = 0; i < a.n; ++i) a[i] += b[i];
  return a;
}
inline Vec operator-(Vec a, const Vec& b) {
  for (int i = 0; i < a.n; ++i) a[i] -= b[i];
  return a;
}
inline Vec operator*(double s, Vec a) {
  for (int i = 0; i < a.n; ++i) a[i] *= s;
  return a;
}
inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
  return s;
}
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

struct Mat {
  int rows = 0, cols = 0;
  std::array<double, kMaxDim * kMaxDim> m{};

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c) {
    if (r < 0 || r > kMaxDim || c < 0 || c > kMaxDim)
      throw std::invalid_argument("Mat: bad dims");
  }
  static Mat identity(int n) {
    Mat I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }
  double& operator()(int i, int j) { return m[static_cast<size_t>(i * kMaxDim + j)]; }
  double operator()(int i, int j) const { return m[static_cast<size_t>(i * kMaxDim + j)]; }
};

inline Mat operator+(Mat a, const Mat& b) {
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) a(i, j) += b(i, j);
  return a;
}
inline Mat operator-(Mat a, const Mat& b) {
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) a(i, j) -= b(i, j);
  return a;
}
inline Mat operator*(double s, Mat a) {
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) a(i, j) *= s;
  return a;
}
inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}
inline Vec matvec(const Mat& a, const Vec& x) {
  Vec y(a.rows);
  for (int i = 0; i < a.rows; ++i) {
    double s = 0;
    for (int j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}
inline Mat transpose(const Mat& a) {
  Mat t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}
inline double frobenius_norm(const Mat& a) {
  double s = 0;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}
inline Mat symmetrize(const Mat& a) {
  Mat s(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

// d_m sigma_{l i} stored as t(m, l, i).
struct Tensor3 {
  int n1 = 0, n2 = 0, n3 = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> t{};
  Tensor3() = default;
  Tensor3(int a, int b, int c) : n1(a), n2(b), n3(c) {}
  double& operator()(int i, int j, int k) {
    return t[static_cast<size_t>((i * kMaxDim + j) * kMaxDim + k)];
  }
  double operator()(int i, int j, int k) const {
    return t[static_cast<size_t>((i * kMaxDim + j) * kMaxDim + k)];
  }
};

// d_m d_k sigma_{l i} stored as t(m, k, l, i); symmetric in (m, k).
struct Tensor4 {
  int n1 = 0, n2 = 0, n3 = 0, n4 = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim * kMaxDim> t{};
  Tensor4() = default;
  Tensor4(int a, int b, int c, int d) : n1(a), n2(b), n3(c), n4(d) {}
  double& operator()(int i, int j, int k, int l) {
    return t[static_cast<size_t>(((i * kMaxDim + j) * kMaxDim + k) * kMaxDim + l)];
  }
  double operator()(int i, int j, int k, int l) const {
    return t[static_cast<size_t>(((i * kMaxDim + j) * kMaxDim + k) * kMaxDim + l)];
  }
};

struct SymEigen {
  Vec values;   // ascending
  Mat vectors;  // columns are eigenvectors
};

// Symmetric eigen decomposition: closed form for n<=2, cyclic Jacobi sweeps
// for n in {3,4}.  Input must be symmetric (enforced up to roundoff by the
// caller; we symmetrize defensively).
SymEigen sym_eigen(const Mat& a_in);

double sym_min_eigenvalue(const Mat& a);

// Symmetric positive-definite square root via eigen decomposition.
// Throws std::invalid_argument if an eigenvalue is below `floor`.
Mat sym_sqrt(const Mat& a, double floor = 1e-13);

// Smallest eigenvalue of the pencil (theta, a): min eig of L^{-1} theta L^{-T}
// where L = sym_sqrt(a).  `a` must be symmetric positive definite.
double generalized_min_eigenvalue(const Mat& theta, const Mat& a);

// Solve L y = b where L is symmetric positive definite via its sym sqrt
// factors; helper exposed for tests.
Mat sym_congruence(const Mat& theta, const Mat& a);  // L^{-1} theta L^{-T}

}  // namespace nibec
