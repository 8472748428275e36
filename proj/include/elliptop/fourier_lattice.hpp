#pragma once

// Dressed Kronecker functions on Z_N^2, the GL_N x GL_M functions Phi, and
// finite Fourier transforms of coefficient fields.

#include <numeric>
#include <stdexcept>

#include "elliptic_fn.hpp"
#include "torus_algebra.hpp"

namespace elliptop {

struct DressedFnParams {
  int N = 1;
  int M = 1;
  EllipticParams elliptic;

  void validate() const {
    if (N < 1 || M < 1) throw std::invalid_argument("N and M must be positive");
    if (M > 1 && std::gcd(N, M) != 1) throw std::invalid_argument("N and M must be coprime");
    elliptic.validate();
  }
};

// exp(2 pi i z a2/n) phi(z, y) for an arbitrary integer pair; y already contains omega
inline cplx dressed_phi(cplx z, cplx y, long a2, int n, const Elliptic& e) {
  return std::exp(2.0 * pi * I * z * (double(a2) / n)) * e.phi(z, y);
}

// phi_a(z, eta + omega_a)
inline cplx phi_alpha(cplx z, cplx eta, const LatticeIndex& a, const Elliptic& e) {
  return dressed_phi(z, eta + omega(a, e.tau()), a.a2, a.n, e);
}

// f_a(z, omega_a), a != 0
inline cplx f_alpha(cplx z, const LatticeIndex& a, const Elliptic& e) {
  if (a.is_zero()) throw std::invalid_argument("f_alpha needs a nonzero index");
  return std::exp(2.0 * pi * I * z * (double(a.a2) / a.n)) * e.f(z, omega(a, e.tau()));
}

// Phi with integer (unreduced) indices
inline cplx Phi_raw(cplx z, cplx eta, int n, int m, long a1, long a2, long ta1, long ta2, const Elliptic& e) {
  if (std::gcd(n, m) != 1) throw std::invalid_argument("Phi needs coprime N and M");
  const cplx tw = omega_raw(ta1, ta2, m, e.tau());
  return std::exp(2.0 * pi * I * eta * (double(n) * ta2 / m)) *
         dressed_phi(z + double(n) * tw, eta + omega_raw(a1, a2, n, e.tau()), a2, n, e);
}

// Phi_{a,ta}(z, eta) = exp(2 pi i eta N ta2/M) phi_a(z + N tomega_ta, eta + omega_a)
inline cplx Phi(cplx z, cplx eta, const LatticeIndex& a, const LatticeIndex& ta, const Elliptic& e) {
  return Phi_raw(z, eta, a.n, ta.n, a.a1, a.a2, ta.a1, ta.a2, e);
}

enum class FtDirection { forward, backward };

// At^b = (1/N) sum_a kappa^2_{b,a} A^a; the transform is an involution so both directions agree
inline CoeffField ft_coeffs(const CoeffField& a, FtDirection = FtDirection::forward) {
  if (a.m != 1) throw std::invalid_argument("ft_coeffs expects a Z_N^2 field");
  if (a.values.size() != std::size_t(a.n) * a.n) throw std::invalid_argument("incomplete coefficient field");
  CoeffField out = CoeffField::zeros(a.n, 1, a.k);
  const auto lat = lattice(a.n);
  for (const auto& b : lat)
    for (const auto& al : lat) out.at(b) += kappa_sq(b, al) * a.at(al);
  for (auto& v : out.values) v /= double(a.n);
  return out;
}

// index a = [alpha + N g] in Z_NM^2
inline LatticeIndex nm_index(const LatticeIndex& alpha, const LatticeIndex& g, int n, int m) {
  return {n * m, alpha.a1 + long(n) * g.a1, alpha.a2 + long(n) * g.a2};
}

// kappa-tilde^2_{a, ta} on Z_M^2, with a reduced mod M
inline cplx kappa_sq_m(const LatticeIndex& a, const LatticeIndex& ta) {
  const int m = ta.n;
  return std::exp(2.0 * pi * I * double(long(ta.a1) * mod(a.a2, m) - long(mod(a.a1, m)) * ta.a2) / double(m));
}

// Coupled field A^{a,ta} -> Z_NM field B^c with
// sum A^{a,ta} Phi_{a,ta}(z, eta) = sum_c B^c phi^{NM}_c(M z, omega_c + eta/M)
inline CoeffField to_nm_field(const CoeffField& a) {
  const int n = a.n, m = a.m;
  CoeffField out = CoeffField::zeros(n * m, 1, a.k);
  const auto ln = lattice(n), lm = lattice(m);
  for (const auto& al : ln)
    for (const auto& g : lm) {
      const LatticeIndex c = nm_index(al, g, n, m);
      Matrix acc = Matrix::Zero(a.k, a.k);
      for (const auto& ta : lm) acc += kappa_sq_m(c, ta) * a.at(al, ta);
      out.at(c) = acc / double(m);
    }
  return out;
}

inline CoeffField from_nm_field(const CoeffField& b, int n, int m) {
  if (b.n != n * m || b.m != 1) throw std::invalid_argument("from_nm_field: size mismatch");
  CoeffField out = CoeffField::zeros(n, m, b.k);
  const auto ln = lattice(n), lm = lattice(m);
  for (const auto& al : ln)
    for (const auto& ta : lm) {
      Matrix acc = Matrix::Zero(b.k, b.k);
      for (const auto& g : lm) {
        const LatticeIndex c = nm_index(al, g, n, m);
        acc += std::conj(kappa_sq_m(c, ta)) * b.at(c);
      }
      out.at(al, ta) = acc / double(m);
    }
  return out;
}

}  // namespace elliptop
