#pragma once

// Finite Heisenberg group: clock/shift pair, the sin-algebra basis T_a of Mat(N),
// structure constants and basis (de)composition.

#include <Eigen/Dense>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "elliptic_fn.hpp"

namespace elliptop {

using Matrix = Eigen::MatrixXcd;

inline int mod(long a, int n) {
  const long r = a % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

struct LatticeIndex {
  int n = 1;
  int a1 = 0;
  int a2 = 0;

  LatticeIndex() = default;
  LatticeIndex(int size, long i1, long i2) : n(size), a1(0), a2(0) {
    if (size < 1) throw std::invalid_argument("lattice size must be positive");
    a1 = mod(i1, size);
    a2 = mod(i2, size);
  }
  static LatticeIndex from_flat(int size, int flat) { return {size, flat / size, flat % size}; }

  int flat() const { return a1 * n + a2; }
  bool is_zero() const { return a1 == 0 && a2 == 0; }

  LatticeIndex operator-() const { return {n, -a1, -a2}; }
  friend LatticeIndex operator+(const LatticeIndex& a, const LatticeIndex& b) {
    check_same(a, b);
    return {a.n, a.a1 + b.a1, a.a2 + b.a2};
  }
  friend LatticeIndex operator-(const LatticeIndex& a, const LatticeIndex& b) {
    check_same(a, b);
    return {a.n, a.a1 - b.a1, a.a2 - b.a2};
  }
  friend bool operator==(const LatticeIndex&, const LatticeIndex&) = default;

 private:
  static void check_same(const LatticeIndex& a, const LatticeIndex& b) {
    if (a.n != b.n) throw std::invalid_argument("lattice indices over different Z_N");
  }
};

inline std::vector<LatticeIndex> lattice(int n) {
  std::vector<LatticeIndex> out;
  out.reserve(n * n);
  for (int f = 0; f < n * n; ++f) out.push_back(LatticeIndex::from_flat(n, f));
  return out;
}

// omega_a = (a1 + a2 tau)/N with the canonical representative
inline cplx omega(const LatticeIndex& a, cplx tau) { return (double(a.a1) + double(a.a2) * tau) / double(a.n); }
inline cplx omega_raw(long a1, long a2, int n, cplx tau) { return (double(a1) + double(a2) * tau) / double(n); }

// Q_kk = exp(2 pi i k/N) with k = 1..N
inline Matrix build_Q(int n) {
  Matrix q = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) q(k, k) = std::exp(2.0 * pi * I * double(k + 1) / double(n));
  return q;
}

// Lambda_kl = 1 iff k - l + 1 = 0 mod N
inline Matrix build_Lambda(int n) {
  Matrix l = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      if (mod(k - j + 1, n) == 0) l(k, j) = 1.0;
  return l;
}

// exp(pi i a1 a2/N) Q^a1 Lambda^a2 for an arbitrary integer pair; only sign-periodic mod N
inline Matrix basis_raw(long a1, long a2, int n) {
  const int p1 = mod(a1, n), p2 = mod(a2, n);
  Matrix m = Matrix::Zero(n, n);
  const cplx pref = std::exp(pi * I * double(a1) * double(a2) / double(n));
  // (Q^p1 Lambda^p2)_{k,l} = q_k^p1 [l = k + p2 mod N]
  for (int k = 0; k < n; ++k) {
    const int l = mod(k + p2, n);
    m(k, l) = pref * std::exp(2.0 * pi * I * double(k + 1) * double(p1) / double(n));
  }
  return m;
}

inline Matrix T(const LatticeIndex& a) { return basis_raw(a.a1, a.a2, a.n); }
inline Matrix T_inverse(const LatticeIndex& a) { return basis_raw(-a.a1, -a.a2, a.n); }

// s with basis_raw(a) = s T([a])
inline int wrap_sign(long a1, long a2, int n) {
  const long p = (a1 - mod(a1, n)) / n, q = (a2 - mod(a2, n)) / n;
  const long e = long(mod(a1, n)) * q + long(mod(a2, n)) * p + long(n) * p * q;
  return (e % 2 == 0) ? 1 : -1;
}

// sigma_a defined by T([-a]) = sigma_a T_a^{-1}
inline int reflection_sign(const LatticeIndex& a) { return wrap_sign(-a.a1, -a.a2, a.n); }

inline cplx kappa(const LatticeIndex& a, const LatticeIndex& b) {
  return std::exp(pi * I * double(long(b.a1) * a.a2 - long(b.a2) * a.a1) / double(a.n));
}

inline cplx kappa_sq(const LatticeIndex& a, const LatticeIndex& b) {
  return std::exp(2.0 * pi * I * double(long(b.a1) * a.a2 - long(b.a2) * a.a1) / double(a.n));
}

inline cplx structure_C(const LatticeIndex& a, const LatticeIndex& b) { return kappa(a, b) - kappa(b, a); }

// T_a T_b = product_coefficient(a,b) T_[a+b], with both factors canonical
inline cplx product_coefficient(const LatticeIndex& a, const LatticeIndex& b) {
  return kappa(a, b) * double(wrap_sign(long(a.a1) + b.a1, long(a.a2) + b.a2, a.n));
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Cached canonical basis and inverses for one N.
class TorusBasis {
 public:
  explicit TorusBasis(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("N must be positive");
    for (const auto& a : lattice(n)) {
      t_.push_back(T(a));
      tinv_.push_back(T_inverse(a));
    }
  }
  int n() const { return n_; }
  int size() const { return n_ * n_; }
  const Matrix& t(const LatticeIndex& a) const { return t_[a.flat()]; }
  const Matrix& t(int flat) const { return t_[flat]; }
  const Matrix& inv(const LatticeIndex& a) const { return tinv_[a.flat()]; }
  const Matrix& inv(int flat) const { return tinv_[flat]; }

 private:
  int n_;
  std::vector<Matrix> t_, tinv_;
};

// Lattice-indexed K x K blocks. Z_N^2 fields have m == 1; coupled fields live on
// Z_N^2 x Z_M^2 and are stored at flat(a) * M^2 + flat(ta).
struct CoeffField {
  int n = 1;
  int m = 1;
  int k = 1;
  std::vector<Matrix> values;

  static CoeffField zeros(int n, int m, int k) {
    CoeffField f{n, m, k, {}};
    f.values.assign(std::size_t(n) * n * m * m, Matrix::Zero(k, k));
    return f;
  }
  static CoeffField scalar(const std::vector<cplx>& c, int n) {
    if (c.size() != std::size_t(n) * n) throw std::invalid_argument("scalar field size mismatch");
    CoeffField f = zeros(n, 1, 1);
    for (std::size_t i = 0; i < c.size(); ++i) f.values[i](0, 0) = c[i];
    return f;
  }

  std::size_t size() const { return values.size(); }
  Matrix& operator[](std::size_t i) { return values[i]; }
  const Matrix& operator[](std::size_t i) const { return values[i]; }
  Matrix& at(const LatticeIndex& a) { return values[a.flat()]; }
  const Matrix& at(const LatticeIndex& a) const { return values[a.flat()]; }
  Matrix& at(const LatticeIndex& a, const LatticeIndex& ta) { return values[std::size_t(a.flat()) * m * m + ta.flat()]; }
  const Matrix& at(const LatticeIndex& a, const LatticeIndex& ta) const {
    return values[std::size_t(a.flat()) * m * m + ta.flat()];
  }
  cplx s(const LatticeIndex& a) const { return values[a.flat()](0, 0); }

  bool same_shape(const CoeffField& o) const { return n == o.n && m == o.m && k == o.k; }

  CoeffField& operator+=(const CoeffField& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  CoeffField& operator-=(const CoeffField& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  CoeffField& operator*=(cplx c) {
    for (auto& v : values) v *= c;
    return *this;
  }
  friend CoeffField operator+(CoeffField a, const CoeffField& b) { return a += b; }
  friend CoeffField operator-(CoeffField a, const CoeffField& b) { return a -= b; }
  friend CoeffField operator*(cplx c, CoeffField a) { return a *= c; }

  double norm() const {
    double s = 0.0;
    for (const auto& v : values) s += v.squaredNorm();
    return std::sqrt(s);
  }
};

// sum_a T_a (x) c_a, an NK x NK matrix (Z_N^2 fields only)
inline Matrix reconstruct(const CoeffField& c) {
  if (c.m != 1) throw std::invalid_argument("reconstruct expects a Z_N^2 field");
  const TorusBasis b(c.n);
  Matrix out = Matrix::Zero(c.n * c.k, c.n * c.k);
  for (int f = 0; f < b.size(); ++f) out += kron(b.t(f), c.values[f]);
  return out;
}

// c_a = (1/N) tr_1((T_a^{-1} (x) 1_K) A) for an NK x NK matrix A
inline CoeffField decompose(const Matrix& a, int n, int k = 1) {
  if (a.rows() != n * k || a.cols() != n * k) throw std::invalid_argument("decompose: size mismatch");
  const TorusBasis b(n);
  CoeffField out = CoeffField::zeros(n, 1, k);
  for (int f = 0; f < b.size(); ++f) {
    const Matrix& ti = b.inv(f);
    Matrix acc = Matrix::Zero(k, k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (ti(i, j) != cplx(0.0)) acc += ti(i, j) * a.block(j * k, i * k, k, k);
    out.values[f] = acc / double(n);
  }
  return out;
}

// P = sum_ij e_ij (x) e_ji on C^N (x) C^N
inline Matrix permutation_operator(int n) {
  Matrix p = Matrix::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i * n + j, j * n + i) = 1.0;
  return p;
}

// h = J Lambda^{-1} with J the anti-diagonal reversal; h T_a h^{-1} = T_{-a}
inline Matrix z2_conjugator(int n) {
  Matrix j = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) j(i, n - 1 - i) = 1.0;
  return j * build_Lambda(n).inverse();
}

}  // namespace elliptop
