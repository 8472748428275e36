#pragma once

// Belavin R-matrix, its classical expansion, the symmetric GL_N x GL_M R-matrix and
// checkers for unitarity, the associative Yang-Baxter equation and Fourier swaps.

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "fourier_lattice.hpp"

namespace elliptop {

struct RMatrixValue {
  int N = 1;
  int M = 1;
  Matrix entries;
  cplx z{};
  cplx hbar{};
};

// dst[src]: index map of the leg permutation sending leg i to position perm[i]
inline std::vector<long> leg_permutation_map(const std::vector<int>& dims, const std::vector<int>& perm) {
  const std::size_t k = dims.size();
  std::vector<int> out_dims(k);
  for (std::size_t i = 0; i < k; ++i) out_dims[perm[i]] = dims[i];
  long total = 1;
  for (int d : dims) total *= d;
  std::vector<long> map(total);
  std::vector<int> idx(k, 0), oidx(k, 0);
  for (long src = 0; src < total; ++src) {
    long r = src;
    for (std::size_t i = k; i-- > 0;) {
      idx[i] = int(r % dims[i]);
      r /= dims[i];
    }
    for (std::size_t i = 0; i < k; ++i) oidx[perm[i]] = idx[i];
    long dst = 0;
    for (std::size_t i = 0; i < k; ++i) dst = dst * out_dims[i] + oidx[i];
    map[src] = dst;
  }
  return map;
}

// Permutation matrix on C^{d_0} (x) ... (x) C^{d_{k-1}} sending leg i to position perm[i].
inline Matrix leg_permutation(const std::vector<int>& dims, const std::vector<int>& perm) {
  const std::vector<long> map = leg_permutation_map(dims, perm);
  Matrix p = Matrix::Zero(long(map.size()), long(map.size()));
  for (std::size_t src = 0; src < map.size(); ++src) p(map[src], long(src)) = 1.0;
  return p;
}

// Acting with an operator x on legs `legs` (in that order) of a tensor space with `dims`.
inline Matrix embed_legs(const Matrix& x, const std::vector<int>& dims, const std::vector<int>& legs) {
  const std::size_t k = dims.size();
  std::vector<int> order(legs);  // leg order of x (x) 1_rest
  for (std::size_t i = 0; i < k; ++i)
    if (std::find(legs.begin(), legs.end(), int(i)) == legs.end()) order.push_back(int(i));
  long rest = 1;
  std::vector<int> odims;
  for (int l : order) odims.push_back(dims[l]);
  for (std::size_t i = legs.size(); i < k; ++i) rest *= odims[i];
  const std::vector<long> map = leg_permutation_map(odims, order);
  const long total = long(map.size());
  Matrix out = Matrix::Zero(total, total);
  // (x (x) 1_rest)(i, j) is nonzero only when i and j share the trailing `rest` index
  for (long xi = 0; xi < x.rows(); ++xi)
    for (long xj = 0; xj < x.cols(); ++xj) {
      const cplx v = x(xi, xj);
      if (v == cplx(0.0)) continue;
      for (long r = 0; r < rest; ++r) out(map[xi * rest + r], map[xj * rest + r]) = v;
    }
  return out;
}

inline Matrix partial_trace_2(const Matrix& x, int d1, int d2) {
  Matrix out = Matrix::Zero(d1, d1);
  for (int i = 0; i < d1; ++i)
    for (int j = 0; j < d1; ++j) out(i, j) = x.block(i * d2, j * d2, d2, d2).trace();
  return out;
}

// R^hbar(z) = sum_a T_a (x) T_a^{-1} phi_a(z, hbar + omega_a)
inline RMatrixValue belavin_R(cplx z, cplx hbar, int n, const Elliptic& e) {
  const TorusBasis b(n);
  Matrix r = Matrix::Zero(n * n, n * n);
  for (const auto& a : lattice(n)) r += kron(b.t(a), b.inv(a)) * phi_alpha(z, hbar, a, e);
  return {n, 1, r, z, hbar};
}

struct ClassicalExpansion {
  Matrix r;
  Matrix m;
};

inline ClassicalExpansion classical_expansion(cplx z, int n, const Elliptic& e) {
  const TorusBasis b(n);
  const Matrix one = Matrix::Identity(n * n, n * n);
  const cplx e1 = e.E1(z);
  ClassicalExpansion out{e1 * one, 0.5 * (e1 * e1 - e.wp(z)) * one};
  for (const auto& a : lattice(n)) {
    if (a.is_zero()) continue;
    const Matrix t = kron(b.t(a), b.inv(a));
    out.r += t * phi_alpha(z, 0.0, a, e);
    out.m += t * f_alpha(z, a, e);
  }
  return out;
}

// tr_2(R^eta(z) S_2); equals N times the relativistic-top L
inline Matrix lax_from_R(const CoeffField& s, cplx z, cplx eta, const Elliptic& e) {
  const int n = s.n;
  const Matrix sm = reconstruct(s);
  return partial_trace_2(belavin_R(z, eta, n, e).entries * kron(Matrix::Identity(n, n), sm), n, n);
}

// -tr_2(r(z) S_2)
inline Matrix m_from_r(const CoeffField& s, cplx z, const Elliptic& e) {
  const int n = s.n;
  const Matrix sm = reconstruct(s);
  return -partial_trace_2(classical_expansion(z, n, e).r * kron(Matrix::Identity(n, n), sm), n, n);
}

// 4-leg operators act on (C^N (x) C^M)^{(x)2} with leg order (1, 1~, 2, 2~).
inline Matrix kron4(const Matrix& a1, const Matrix& ta1, const Matrix& a2, const Matrix& ta2) {
  return kron(kron(a1, ta1), kron(a2, ta2));
}

// swap of the N-legs (swap_n) and/or the M-legs in the (1, 1~, 2, 2~) layout
inline Matrix swap_legs(int n, int m, bool swap_n, bool swap_m) {
  return leg_permutation({n, m, n, m}, {swap_n ? 2 : 0, swap_m ? 3 : 1, swap_n ? 0 : 2, swap_m ? 1 : 3});
}

inline RMatrixValue symmetric_R(cplx z, cplx hbar, int n, int m, const Elliptic& e) {
  if (std::gcd(n, m) != 1) throw std::invalid_argument("symmetric_R needs coprime N and M");
  const TorusBasis bn(n), bm(m);
  const int d = n * m;
  Matrix r = Matrix::Zero(d * d, d * d);
  for (const auto& a : lattice(n))
    for (const auto& ta : lattice(m))
      r += Phi(z, hbar, a, ta, e) * kron4(bn.t(a), bm.t(ta), bn.inv(a), bm.inv(ta));
  return {n, m, r, z, hbar};
}

inline RMatrixValue rational_symmetric_R(cplx z, cplx hbar, int n, int m) {
  if (z == cplx(0.0) || hbar == cplx(0.0)) throw std::invalid_argument("rational_symmetric_R needs nonzero z and hbar");
  const Matrix r = double(m) * swap_legs(n, m, false, true) / hbar + double(n) * swap_legs(n, m, true, false) / z;
  return {n, m, r, z, hbar};
}

struct Residual {
  double abs = 0.0;
  double rel = 0.0;
};

inline Residual residual(const Matrix& lhs, const Matrix& rhs) {
  const double a = (lhs - rhs).norm();
  const double s = std::max(lhs.norm(), rhs.norm());
  return {a, s > 0.0 ? a / s : a};
}

// R^h_12(z1-z2) R^eta_23(z2-z3) = R^eta_13(z1-z3) R^{h-eta}_12(z1-z2) + R^{eta-h}_23(z2-z3) R^h_13(z1-z3)
inline Residual check_aybe_belavin(int n, cplx z1, cplx z2, cplx z3, cplx h, cplx eta, const Elliptic& e) {
  const std::vector<int> dims{n, n, n};
  auto r = [&](int a, int b, cplx z, cplx hb) { return embed_legs(belavin_R(z, hb, n, e).entries, dims, {a, b}); };
  const Matrix lhs = r(0, 1, z1 - z2, h) * r(1, 2, z2 - z3, eta);
  const Matrix rhs = r(0, 2, z1 - z3, eta) * r(0, 1, z1 - z2, h - eta) + r(1, 2, z2 - z3, eta - h) * r(0, 2, z1 - z3, h);
  return residual(lhs, rhs);
}

using FourLegBuilder = std::function<Matrix(cplx z, cplx hbar)>;

// R_{12,1~2~} R_{23,3~2~} = R_{13,3~2~} R_{12,1~3~} + R_{23,3~1~} R_{13,1~2~}
// with R_{ab,a~b~} = R(z_a - z_b, h_a~ - h_b~) on legs (a, a~, b, b~)
inline Residual check_aybe_symmetric(int n, int m, const std::array<cplx, 3>& z, const std::array<cplx, 3>& h,
                                     const FourLegBuilder& builder) {
  const std::vector<int> dims{n, m, n, m, n, m};
  auto r = [&](int a, int b, int ta, int tb) {
    const Matrix x = builder(z[a] - z[b], h[ta] - h[tb]);
    return embed_legs(x, dims, {2 * a, 2 * ta + 1, 2 * b, 2 * tb + 1});
  };
  const Matrix lhs = r(0, 1, 0, 1) * r(1, 2, 2, 1);
  const Matrix rhs = r(0, 2, 2, 1) * r(0, 1, 0, 2) + r(1, 2, 2, 0) * r(0, 2, 0, 1);
  return residual(lhs, rhs);
}

// R^h_12(z) R^h_21(-z) against N^2 (wp(N h) - wp(z))
inline Residual check_unitarity_belavin(int n, cplx z, cplx h, const Elliptic& e) {
  const Matrix p = permutation_operator(n);
  const Matrix lhs = belavin_R(z, h, n, e).entries * p * belavin_R(-z, h, n, e).entries * p;
  const Matrix rhs = double(n * n) * (e.wp(double(n) * h) - e.wp(z)) * Matrix::Identity(n * n, n * n);
  return residual(lhs, rhs);
}

// R_{12,1~2~}(z,h) R_{21,1~2~}(-z,h) against N^2 M^2 (wp(N h) - wp(M z))
inline Residual check_unitarity_symmetric(int n, int m, cplx z, cplx h, const Elliptic& e) {
  const Matrix p = swap_legs(n, m, true, false);
  const Matrix lhs = symmetric_R(z, h, n, m, e).entries * p * symmetric_R(-z, h, n, m, e).entries * p;
  const int d = n * m;
  const Matrix rhs = double(d * d) * (e.wp(double(n) * h) - e.wp(double(m) * z)) * Matrix::Identity(d * d, d * d);
  return residual(lhs, rhs);
}

// R^h(z) P = R^{z/N}(N h)
inline Residual check_fourier_swap(int n, cplx z, cplx h, const Elliptic& e) {
  const Matrix lhs = belavin_R(z, h, n, e).entries * permutation_operator(n);
  return residual(lhs, belavin_R(double(n) * h, z / double(n), n, e).entries);
}

inline int mod_inverse(int a, int m) {
  if (m == 1) return 0;
  for (int x = 1; x < m; ++x)
    if (mod(long(a) * x, m) == 1) return x;
  throw std::invalid_argument("no modular inverse");
}

// Belavin R-matrix of size NM realized on C^N (x) C^M through a -> (u a mod N, s a mod M),
// basis X_a = T_{u a} (x) T~_{s a}.
inline Matrix belavin_on_product(cplx z, cplx hbar, int n, int m, int u, int s, const Elliptic& e) {
  const int d = n * m;
  const TorusBasis bn(n), bm(m);
  Matrix r = Matrix::Zero(d * d, d * d);
  for (const auto& a : lattice(d)) {
    const LatticeIndex an(n, long(u) * a.a1, long(u) * a.a2), am(m, long(s) * a.a1, long(s) * a.a2);
    r += phi_alpha(z, hbar, a, e) * kron4(bn.t(an), bm.t(am), bn.inv(an), bm.inv(am));
  }
  return r;
}

// R(z,h) (P_12 (x) 1~ (x) 1~) = R^{z/N}(N h) and R(z,h) (1 (x) 1 (x) P~) = R^{h/M}(M z), size NM.
// The first uses the relabeling (M^{-1} mod N, N^{-1} mod M), the second the plain one.
inline std::pair<Residual, Residual> check_sublattice(int n, int m, cplx z, cplx h, const Elliptic& e) {
  const Matrix r = symmetric_R(z, h, n, m, e).entries;
  const int u = n == 1 ? 1 : mod_inverse(m, n), s = m == 1 ? 1 : mod_inverse(n, m);
  const Residual first = residual(r * swap_legs(n, m, true, false),
                                  belavin_on_product(double(n) * h, z / double(n), n, m, u, s, e));
  const Residual second = residual(r * swap_legs(n, m, false, true),
                                   belavin_on_product(double(m) * z, h / double(m), n, m, 1, 1, e));
  return {first, second};
}

}  // namespace elliptop
