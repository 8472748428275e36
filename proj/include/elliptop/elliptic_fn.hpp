#pragma once

// Odd theta function and the elliptic functions built from it.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace elliptop {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct pole_proximity_error : error {
  std::string argument;
  cplx value;
  double distance;
  pole_proximity_error(std::string arg, cplx v, double d)
      : error(describe(arg, v, d)), argument(std::move(arg)), value(v), distance(d) {}

 private:
  static std::string describe(const std::string& arg, cplx v, double d) {
    std::ostringstream os;
    os.precision(17);
    os << "argument '" << arg << "' = " << v.real() << (v.imag() < 0 ? "" : "+") << v.imag()
       << "i lies within " << d << " of a lattice pole";
    return os.str();
  }
};

struct truncation_error : error {
  int terms;
  double last_term;
  truncation_error(int k, double last)
      : error("theta series did not converge within " + std::to_string(k) +
              " terms (last weighted term " + std::to_string(last) + ")"),
        terms(k), last_term(last) {}
};

struct EllipticParams {
  cplx tau{0.0, 1.0};
  double series_tol = 1e-16;
  int max_terms = 64;
  double pole_guard = 1e-8;

  void validate() const {
    if (!(tau.imag() > 0.0)) throw std::invalid_argument("Im(tau) must be positive");
    if (!(series_tol > 0.0)) throw std::invalid_argument("series_tol must be positive");
    if (max_terms < 8) throw std::invalid_argument("max_terms must be at least 8");
    if (!(pole_guard > 0.0)) throw std::invalid_argument("pole_guard must be positive");
  }
};

struct ThetaConstants {
  cplx theta_d1_at_0;
  cplx theta_d3_at_0;
  cplx ratio_d3_d1;
};

// theta and its first three z-derivatives at one point
struct ThetaJet {
  std::array<cplx, 4> d{};
};

inline ThetaJet theta_jet(cplx z, const EllipticParams& p, int order = 3) {
  ThetaJet out;
  const cplx zs = z + 0.5;
  auto add = [&](int k, std::array<double, 4>& weighted) {
    const double c = k + 0.5;
    const cplx t = std::exp(I * pi * p.tau * (c * c) + 2.0 * pi * I * zs * c);
    const cplx w = 2.0 * pi * I * c;
    cplx f = t;
    for (int j = 0; j <= order; ++j) {
      out.d[j] += f;
      weighted[j] = std::max(weighted[j], std::abs(f));
      f *= w;
    }
  };
  double last = 0.0;
  for (int K = 1; K <= p.max_terms; ++K) {
    std::array<double, 4> weighted{};
    add(K - 1, weighted);
    add(-K, weighted);
    bool done = true;
    last = 0.0;
    for (int j = 0; j <= order; ++j) {
      last = std::max(last, weighted[j]);
      if (weighted[j] >= p.series_tol * (std::abs(out.d[j]) + 1.0)) done = false;
    }
    if (done) return out;
  }
  throw truncation_error(p.max_terms, last);
}

// distance to the nearest point of Z + tau Z
inline double lattice_distance(cplx z, cplx tau) {
  const double v = z.imag() / tau.imag();
  const double u = z.real() - v * tau.real();
  const double n0 = std::round(v), m0 = std::round(u);
  double best = std::abs(z);
  for (int dn = -1; dn <= 1; ++dn)
    for (int dm = -1; dm <= 1; ++dm)
      best = std::min(best, std::abs(z - (m0 + dm) - (n0 + dn) * tau));
  return best;
}

inline void guard_pole(const char* name, cplx z, const EllipticParams& p) {
  const double d = lattice_distance(z, p.tau);
  if (d < p.pole_guard) throw pole_proximity_error(name, z, d);
}

inline cplx theta(cplx z, const EllipticParams& p) { return theta_jet(z, p, 0).d[0]; }

inline ThetaConstants theta_derivatives(const EllipticParams& p) {
  const ThetaJet j = theta_jet(0.0, p, 3);
  return {j.d[1], j.d[3], j.d[3] / j.d[1]};
}

// Elliptic function toolkit bound to one modulus; theta constants computed once.
class Elliptic {
 public:
  explicit Elliptic(EllipticParams p = {}) : p_(p) {
    p_.validate();
    c_ = theta_derivatives(p_);
    if (c_.theta_d1_at_0 == cplx(0.0)) throw error("theta'(0) vanished");
  }

  const EllipticParams& params() const { return p_; }
  const ThetaConstants& constants() const { return c_; }
  cplx tau() const { return p_.tau; }

  cplx theta(cplx z) const { return theta_jet(z, p_, 0).d[0]; }

  cplx E1(cplx z) const {
    guard_pole("z", z, p_);
    const ThetaJet j = theta_jet(z, p_, 1);
    return j.d[1] / j.d[0];
  }

  cplx E2(cplx z) const {
    guard_pole("z", z, p_);
    const ThetaJet j = theta_jet(z, p_, 2);
    const cplx l = j.d[1] / j.d[0];
    return l * l - j.d[2] / j.d[0];
  }

  cplx wp(cplx z) const { return E2(z) + c_.ratio_d3_d1 / 3.0; }

  cplx phi(cplx eta, cplx z) const {
    guard_pole("eta", eta, p_);
    guard_pole("z", z, p_);
    return c_.theta_d1_at_0 * theta(eta + z) / (theta(eta) * theta(z));
  }

  // f(z,u) = d/du phi(z,u)
  cplx f(cplx z, cplx u) const {
    guard_pole("z+u", z + u, p_);
    return phi(z, u) * (E1(z + u) - E1(u));
  }

 private:
  EllipticParams p_;
  ThetaConstants c_;
};

inline cplx eisenstein_E1(cplx z, const EllipticParams& p) { return Elliptic(p).E1(z); }
inline cplx eisenstein_E2(cplx z, const EllipticParams& p) { return Elliptic(p).E2(z); }
inline cplx weierstrass_p(cplx z, const EllipticParams& p) { return Elliptic(p).wp(z); }
inline cplx kronecker_phi(cplx eta, cplx z, const EllipticParams& p) { return Elliptic(p).phi(eta, z); }
inline cplx kronecker_f(cplx z, cplx u, const EllipticParams& p) { return Elliptic(p).f(z, u); }

}  // namespace elliptop
