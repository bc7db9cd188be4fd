#pragma once

// Dense numeric linear algebra for small matrices: one-sided Jacobi SVD and
// the subspace operations built on it (rank, column space, nullspace, sums,
// intersections, membership).  Everything is deterministic; no external
// dependencies.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace momsec {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;  // row-major

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {
    if (r < 0 || c < 0) throw std::invalid_argument("matrix: negative dimension");
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const {
    return a[static_cast<std::size_t>(i) * cols + j];
  }

  Matrix transposed() const {
    Matrix t(cols, rows);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
    return t;
  }

  std::vector<double> col(int j) const {
    std::vector<double> v(rows);
    for (int i = 0; i < rows; ++i) v[i] = at(i, j);
    return v;
  }

  void set_col(int j, const std::vector<double>& v) {
    for (int i = 0; i < rows; ++i) at(i, j) = v[i];
  }
};

inline Matrix operator*(const Matrix& A, const Matrix& B) {
  if (A.cols != B.rows)
    throw std::invalid_argument("matrix product: inner dimensions differ (" +
                                std::to_string(A.cols) + " vs " +
                                std::to_string(B.rows) + ")");
  Matrix C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      double aik = A.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) C.at(i, j) += aik * B.at(k, j);
    }
  return C;
}

inline std::vector<double> operator*(const Matrix& A,
                                     const std::vector<double>& x) {
  if (A.cols != static_cast<int>(x.size()))
    throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> y(A.rows, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += A.at(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs(const Matrix& m) {
  double r = 0.0;
  for (double x : m.a) r = std::max(r, std::abs(x));
  return r;
}

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD.  A = U diag(sigma) V^T with U m-by-n (columns of the
// rotated A, normalized where sigma > 0), V n-by-n orthogonal, sigma sorted
// descending.  Columns with sigma == 0 in U are zero vectors.

struct Svd {
  Matrix u;                   // m x n
  std::vector<double> sigma;  // n, descending
  Matrix v;                   // n x n
};

inline Svd svd(const Matrix& A) {
  const int m = A.rows, n = A.cols;
  Matrix W = A;
  Matrix V = Matrix::identity(n);
  const double eps = 1e-15;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int i = 0; i < m; ++i) {
          double wp = W.at(i, p), wq = W.at(i, q);
          alpha += wp * wp;
          beta += wq * wq;
          gamma += wp * wq;
        }
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = (zeta >= 0 ? 1.0 : -1.0) /
                   (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (int i = 0; i < m; ++i) {
          double wp = W.at(i, p), wq = W.at(i, q);
          W.at(i, p) = c * wp - s * wq;
          W.at(i, q) = s * wp + c * wq;
        }
        for (int i = 0; i < n; ++i) {
          double vp = V.at(i, p), vq = V.at(i, q);
          V.at(i, p) = c * vp - s * vq;
          V.at(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sigma(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += W.at(i, j) * W.at(i, j);
    sigma[j] = std::sqrt(s);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return sigma[a] > sigma[b]; });
  Svd out;
  out.u = Matrix(m, n);
  out.v = Matrix(n, n);
  out.sigma.resize(n);
  for (int j = 0; j < n; ++j) {
    int src = order[j];
    out.sigma[j] = sigma[src];
    for (int i = 0; i < n; ++i) out.v.at(i, j) = V.at(i, src);
    if (sigma[src] > 0.0)
      for (int i = 0; i < m; ++i) out.u.at(i, j) = W.at(i, src) / sigma[src];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subspaces: orthonormal column bases of an ambient R^n.

struct Subspace {
  int ambient = 0;
  Matrix basis;  // ambient x dim, orthonormal columns

  Subspace() = default;
  Subspace(int amb, Matrix b) : ambient(amb), basis(std::move(b)) {
    if (basis.rows != ambient)
      throw std::invalid_argument("subspace: basis rows != ambient dimension");
  }

  int dim() const { return basis.cols; }

  static Subspace zero(int amb) { return Subspace(amb, Matrix(amb, 0)); }

  static Subspace full(int amb) {
    return Subspace(amb, Matrix::identity(amb));
  }
};

inline int rank(const Matrix& m, double tol = 1e-10) {
  Svd s = svd(m);
  if (s.sigma.empty()) return 0;
  double smax = s.sigma[0];
  if (smax == 0.0) return 0;
  int r = 0;
  for (double sv : s.sigma)
    if (sv > tol * smax) ++r;
  return r;
}

inline Subspace column_space(const Matrix& m, double tol = 1e-10) {
  Svd s = svd(m);
  int r = 0;
  double smax = s.sigma.empty() ? 0.0 : s.sigma[0];
  for (double sv : s.sigma)
    if (smax > 0.0 && sv > tol * smax) ++r;
  Matrix basis(m.rows, r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < m.rows; ++i) basis.at(i, j) = s.u.at(i, j);
  return Subspace(m.rows, std::move(basis));
}

inline Subspace nullspace(const Matrix& m, double tol = 1e-10) {
  Svd s = svd(m);
  double smax = s.sigma.empty() ? 0.0 : s.sigma[0];
  std::vector<int> keep;
  for (int j = 0; j < m.cols; ++j)
    if (smax == 0.0 || s.sigma[j] <= tol * smax) keep.push_back(j);
  Matrix basis(m.cols, static_cast<int>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    for (int i = 0; i < m.cols; ++i) basis.at(i, static_cast<int>(j)) = s.v.at(i, keep[j]);
  return Subspace(m.cols, std::move(basis));
}

inline Subspace subspace_sum(const Subspace& u, const Subspace& v,
                             double tol = 1e-10) {
  if (u.ambient != v.ambient)
    throw std::invalid_argument("subspace_sum: ambient dimensions differ");
  Matrix joint(u.ambient, u.dim() + v.dim());
  for (int j = 0; j < u.dim(); ++j)
    for (int i = 0; i < u.ambient; ++i) joint.at(i, j) = u.basis.at(i, j);
  for (int j = 0; j < v.dim(); ++j)
    for (int i = 0; i < u.ambient; ++i)
      joint.at(i, u.dim() + j) = v.basis.at(i, j);
  if (joint.cols == 0) return Subspace::zero(u.ambient);
  return column_space(joint, tol);
}

// Residual of orthogonal projection: ||w - B B^T w||.  The zero vector is in
// every subspace.
inline double membership_residual(const Subspace& u,
                                  const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != u.ambient)
    throw std::invalid_argument("membership: vector dimension != ambient");
  std::vector<double> r = w;
  for (int j = 0; j < u.dim(); ++j) {
    double c = 0.0;
    for (int i = 0; i < u.ambient; ++i) c += u.basis.at(i, j) * w[i];
    for (int i = 0; i < u.ambient; ++i) r[i] -= c * u.basis.at(i, j);
  }
  return norm2(r);
}

inline bool contains(const Subspace& u, const std::vector<double>& w,
                     double tol = 1e-10) {
  double nw = norm2(w);
  if (nw == 0.0) return true;
  return membership_residual(u, w) <= tol * nw;
}

// Annihilator of a subspace under the standard pairing: covectors xi with
// xi(b) = 0 for all basis vectors b, identified with R^n via components.
inline Subspace annihilator(const Subspace& u, double tol = 1e-10) {
  if (u.dim() == 0) return Subspace::full(u.ambient);
  return nullspace(u.basis.transposed(), tol);
}

inline Subspace intersection(const Subspace& u, const Subspace& v,
                             double tol = 1e-10) {
  if (u.ambient != v.ambient)
    throw std::invalid_argument("intersection: ambient dimensions differ");
  const int n = u.ambient;
  // x in U iff (I - Pu) x = 0; stack both projector complements.
  Matrix stacked(2 * n, n);
  auto write_complement = [&](const Subspace& s, int row0) {
    for (int i = 0; i < n; ++i) stacked.at(row0 + i, i) = 1.0;
    for (int j = 0; j < s.dim(); ++j)
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
          stacked.at(row0 + i, k) -= s.basis.at(i, j) * s.basis.at(k, j);
  };
  write_complement(u, 0);
  write_complement(v, n);
  return nullspace(stacked, tol);
}

// Least-squares solve via SVD pseudo-inverse: returns argmin ||A x - b||.
// rank_deficient is set when the numerical rank is below min(rows, cols).
inline std::vector<double> solve_least_squares(const Matrix& A,
                                               const std::vector<double>& b,
                                               double tol = 1e-12,
                                               bool* rank_deficient = nullptr) {
  Svd s = svd(A);
  double smax = s.sigma.empty() ? 0.0 : s.sigma[0];
  int r = 0;
  for (double sv : s.sigma)
    if (smax > 0.0 && sv > tol * smax) ++r;
  if (rank_deficient) *rank_deficient = r < std::min(A.rows, A.cols);
  std::vector<double> x(A.cols, 0.0);
  for (int j = 0; j < r; ++j) {
    double c = 0.0;
    for (int i = 0; i < A.rows; ++i) c += s.u.at(i, j) * b[i];
    c /= s.sigma[j];
    for (int i = 0; i < A.cols; ++i) x[i] += c * s.v.at(i, j);
  }
  return x;
}

// |det| of a square matrix via the product of singular values.
inline double abs_det(const Matrix& A) {
  if (A.rows != A.cols) throw std::invalid_argument("abs_det: not square");
  Svd s = svd(A);
  double d = 1.0;
  for (double sv : s.sigma) d *= sv;
  return d;
}

inline double smallest_singular_value(const Matrix& A) {
  Svd s = svd(A);
  return s.sigma.empty() ? 0.0 : s.sigma.back();
}

}  // namespace momsec
