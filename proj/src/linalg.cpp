#include "nibec/linalg.hpp"

#include <algorithm>

namespace nibec {

namespace {

SymEigen eigen_1x1(const Mat& a) {
  SymEigen e;
  e.values = Vec(1);
  e.values[0] = a(0, 0);
  e.vectors = Mat::identity(1);
  return e;
}

SymEigen eigen_2x2(const Mat& a) {
  // Stable closed form: rotate by the angle diagonalizing [[p, q], [q, r]].
  const double p = a(0, 0), q = 0.5 * (a(0, 1) + a(1, 0)), r = a(1, 1);
  SymEigen e;
  e.values = Vec(2);
  e.vectors = Mat(2, 2);
  if (q == 0.0) {
    int lo = p <= r ? 0 : 1;
    e.values[0] = std::min(p, r);
    e.values[1] = std::max(p, r);
    e.vectors(0, 0) = lo == 0 ? 1.0 : 0.0;
    e.vectors(1, 0) = lo == 0 ? 0.0 : 1.0;
    e.vectors(0, 1) = lo == 0 ? 0.0 : 1.0;
    e.vectors(1, 1) = lo == 0 ? 1.0 : 0.0;
    return e;
  }
  const double tr = p + r;
  const double diff = p - r;
  const double disc = std::hypot(diff, 2.0 * q);
  double lam_lo = 0.5 * (tr - disc);
  double lam_hi = 0.5 * (tr + disc);
  // Avoid cancellation in the smaller-magnitude root via the determinant.
  const double det = p * r - q * q;
  if (std::abs(lam_hi) > std::abs(lam_lo) && lam_hi != 0.0) lam_lo = det / lam_hi;
  else if (lam_lo != 0.0) lam_hi = det / lam_lo;
  e.values[0] = lam_lo;
  e.values[1] = lam_hi;
  // Eigenvector for lam_hi: (q, lam_hi - p) or (lam_hi - r, q), pick the
  // better-conditioned representation.
  double vx, vy;
  if (std::abs(lam_hi - p) > std::abs(lam_hi - r)) {
    vx = q;
    vy = lam_hi - p;
  } else {
    vx = lam_hi - r;
    vy = q;
  }
  const double nv = std::hypot(vx, vy);
  vx /= nv;
  vy /= nv;
  e.vectors(0, 1) = vx;
  e.vectors(1, 1) = vy;
  e.vectors(0, 0) = -vy;  // orthogonal complement -> lam_lo
  e.vectors(1, 0) = vx;
  return e;
}

SymEigen eigen_jacobi(const Mat& a_in, int n) {
  Mat a = a_in;
  Mat v = Mat::identity(n);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30 * (1.0 + frobenius_norm(a))) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  // Sort ascending.
  std::array<int, kMaxDim> order{};
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.begin() + n,
            [&](int i, int j) { return a(i, i) < a(j, j); });
  SymEigen e;
  e.values = Vec(n);
  e.vectors = Mat(n, n);
  for (int c = 0; c < n; ++c) {
    const int src = order[static_cast<size_t>(c)];
    e.values[c] = a(src, src);
    for (int r = 0; r < n; ++r) e.vectors(r, c) = v(r, src);
  }
  return e;
}

}  // namespace

SymEigen sym_eigen(const Mat& a_in) {
  if (a_in.rows != a_in.cols || a_in.rows < 1)
    throw std::invalid_argument("sym_eigen: square matrix required");
  const Mat a = symmetrize(a_in);
  switch (a.rows) {
    case 1: return eigen_1x1(a);
    case 2: return eigen_2x2(a);
    default: return eigen_jacobi(a, a.rows);
  }
}

double sym_min_eigenvalue(const Mat& a) { return sym_eigen(a).values[0]; }

Mat sym_sqrt(const Mat& a, double floor) {
  const SymEigen e = sym_eigen(a);
  if (e.values[0] < floor)
    throw std::invalid_argument("sym_sqrt: matrix not positive definite (min eig " +
                                std::to_string(e.values[0]) + ")");
  const int n = a.rows;
  Mat s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0;
      for (int k = 0; k < n; ++k)
        acc += e.vectors(i, k) * std::sqrt(e.values[k]) * e.vectors(j, k);
      s(i, j) = acc;
    }
  return s;
}

Mat sym_congruence(const Mat& theta, const Mat& a) {
  if (theta.rows != a.rows || theta.cols != a.cols)
    throw std::invalid_argument("sym_congruence: dimension mismatch");
  const int n = a.rows;
  const Mat l = sym_sqrt(a);
  // Solve L X = theta, then L Y^T = X^T; L is SPD so Gaussian elimination
  // with the symmetric factor is adequate at these sizes.
  auto solve = [&](const Mat& rhs) {
    Mat aug = l;
    Mat x = rhs;
    // Plain LU with partial pivoting on a copy of l.
    std::array<int, kMaxDim> piv{};
    for (int i = 0; i < n; ++i) piv[static_cast<size_t>(i)] = i;
    for (int col = 0; col < n; ++col) {
      int best = col;
      for (int r = col + 1; r < n; ++r)
        if (std::abs(aug(r, col)) > std::abs(aug(best, col))) best = r;
      if (best != col) {
        for (int c = 0; c < n; ++c) std::swap(aug(col, c), aug(best, c));
        for (int c = 0; c < x.cols; ++c) std::swap(x(col, c), x(best, c));
      }
      const double d = aug(col, col);
      if (d == 0.0) throw std::invalid_argument("sym_congruence: singular factor");
      for (int r = col + 1; r < n; ++r) {
        const double f = aug(r, col) / d;
        if (f == 0.0) continue;
        for (int c = col; c < n; ++c) aug(r, c) -= f * aug(col, c);
        for (int c = 0; c < x.cols; ++c) x(r, c) -= f * x(col, c);
      }
    }
    for (int col = n - 1; col >= 0; --col) {
      for (int c = 0; c < x.cols; ++c) {
        double s = x(col, c);
        for (int k = col + 1; k < n; ++k) s -= aug(col, k) * x(k, c);
        x(col, c) = s / aug(col, col);
      }
    }
    return x;
  };
  const Mat x = solve(symmetrize(theta));   // L^{-1} theta
  const Mat y = solve(transpose(x));        // L^{-1} theta L^{-T}, transposed
  return symmetrize(transpose(y));
}

double generalized_min_eigenvalue(const Mat& theta, const Mat& a) {
  return sym_min_eigenvalue(sym_congruence(theta, a));
}

}  // namespace nibec
