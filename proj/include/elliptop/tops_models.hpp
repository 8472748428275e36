#pragma once

// Elliptic tops: scalar (non-)relativistic tops, matrix tops, Gaudin-like tops on
// Z_N^2 and the GL_N x GL_M coupled model. Equations of motion, Lax pairs,
// constraint projectors and the relativization map.

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fourier_lattice.hpp"
#include "parallel.hpp"

namespace elliptop {

enum class ModelKind { nonrel_top, rel_top, matrix_top, gaudin_lattice, coupled };
enum class Reduction { none, z2_nonrel, z2_rel, matrix_top, gaudin, coupled };
enum class SpectralRole { z, eta };
enum class ConstraintPolicy { check, ignore };

struct constraint_violation : error {
  double deviation;
  explicit constraint_violation(double d)
      : error("coefficient field violates the model constraints (deviation " + std::to_string(d) + ")"),
        deviation(d) {}
};

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::nonrel_top: return "nonrel-top";
    case ModelKind::rel_top: return "rel-top";
    case ModelKind::matrix_top: return "matrix-top";
    case ModelKind::gaudin_lattice: return "gaudin-lattice";
    case ModelKind::coupled: return "coupled";
  }
  return "?";
}

inline std::string to_string(Reduction r) {
  switch (r) {
    case Reduction::none: return "none";
    case Reduction::z2_nonrel: return "z2-nonrel";
    case Reduction::z2_rel: return "z2-rel";
    case Reduction::matrix_top: return "matrix-top-constraints";
    case Reduction::gaudin: return "gaudin-constraints";
    case Reduction::coupled: return "coupled-constraints";
  }
  return "?";
}

inline ModelKind parse_model(const std::string& s) {
  for (auto k : {ModelKind::nonrel_top, ModelKind::rel_top, ModelKind::matrix_top, ModelKind::gaudin_lattice,
                 ModelKind::coupled})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown model '" + s + "'");
}

inline Reduction parse_reduction(const std::string& s) {
  for (auto r : {Reduction::none, Reduction::z2_nonrel, Reduction::z2_rel, Reduction::matrix_top, Reduction::gaudin,
                 Reduction::coupled})
    if (to_string(r) == s) return r;
  throw std::invalid_argument("unknown reduction '" + s + "'");
}

// the constraint set a model needs for its Lax equation
inline Reduction natural_reduction(ModelKind k) {
  switch (k) {
    case ModelKind::matrix_top: return Reduction::matrix_top;
    case ModelKind::gaudin_lattice: return Reduction::gaudin;
    case ModelKind::coupled: return Reduction::coupled;
    default: return Reduction::none;
  }
}

// N: Z_N^2 lattice. M: block size of the matrix top, or the second lattice of the
// coupled model. K: block size of Gaudin-like and coupled fields. coupling is the
// non-spectral parameter (eta when z is spectral, z when eta is spectral).
struct ModelSpec {
  ModelKind kind = ModelKind::rel_top;
  int N = 2;
  int M = 1;
  int K = 1;
  cplx coupling{0.17, 0.05};
  Reduction reduction = Reduction::none;
  SpectralRole role = SpectralRole::z;

  static ModelSpec make(ModelKind kind, int n, int m, int k, cplx coupling) {
    ModelSpec s;
    s.kind = kind;
    s.N = n;
    s.M = m;
    s.K = k;
    s.coupling = coupling;
    s.reduction = natural_reduction(kind);
    return s;
  }

  // block size of coefficients
  int block() const {
    switch (kind) {
      case ModelKind::nonrel_top:
      case ModelKind::rel_top: return 1;
      case ModelKind::matrix_top: return M;
      default: return K;
    }
  }
  int second_lattice() const { return kind == ModelKind::coupled ? M : 1; }
  int lax_size() const {
    switch (kind) {
      case ModelKind::nonrel_top:
      case ModelKind::rel_top: return N;
      case ModelKind::matrix_top: return N * M;
      default: return K;
    }
  }

  void validate() const {
    if (N < 1 || M < 1 || K < 1) throw std::invalid_argument("model sizes must be positive");
    if (kind == ModelKind::coupled && std::gcd(N, M) != 1) throw std::invalid_argument("N and M must be coprime");
    if (role == SpectralRole::eta && kind != ModelKind::gaudin_lattice && kind != ModelKind::matrix_top)
      throw std::invalid_argument("spectral role eta is only available for gaudin-lattice and matrix-top");
    bool ok = reduction == Reduction::none;
    switch (kind) {
      case ModelKind::nonrel_top: ok = ok || reduction == Reduction::z2_nonrel; break;
      case ModelKind::rel_top: ok = ok || reduction == Reduction::z2_rel; break;
      default: ok = ok || reduction == natural_reduction(kind); break;
    }
    if (!ok) throw std::invalid_argument("reduction " + to_string(reduction) + " does not apply to " + to_string(kind));
  }
};

struct LaxPair {
  std::function<Matrix(cplx)> L;
  std::function<Matrix(cplx)> M;
  SpectralRole role = SpectralRole::z;
  std::vector<cplx> pole_set;
};

struct LaxResidual {
  double max_abs = 0.0;
  double max_rel = 0.0;
};

inline double frobenius(const Matrix& m) { return m.norm(); }

namespace detail {
inline Matrix comm(const Matrix& a, const Matrix& b) { return a * b - b * a; }
}  // namespace detail

class TopModel {
 public:
  TopModel(ModelSpec spec, EllipticParams ep) : spec_(spec), e_(ep), basis_(spec.N) {
    spec_.validate();
    init();
  }
  TopModel(ModelSpec spec, const Elliptic& e) : spec_(spec), e_(e), basis_(spec.N) {
    spec_.validate();
    init();
  }

  const ModelSpec& spec() const { return spec_; }
  const Elliptic& elliptic() const { return e_; }

  CoeffField zeros() const { return CoeffField::zeros(spec_.N, spec_.second_lattice(), spec_.block()); }

  // inverse-inertia coefficients J_a on the lattice the flow lives on
  const std::vector<cplx>& J() const { return j_; }

  // coupled model: constant matrix coefficients c_g multiplying A~^{[N g]} in the M-matrix offset
  const std::vector<cplx>& offset_coefficients() const { return offset_; }

  CoeffField eom(const CoeffField& s, ConstraintPolicy policy = ConstraintPolicy::check) const {
    check_shape(s);
    if (policy == ConstraintPolicy::check && needs_constraints()) {
      const double d = constraint_deviation(s);
      if (d > constraint_tol) throw constraint_violation(d);
    }
    switch (spec_.kind) {
      case ModelKind::nonrel_top:
      case ModelKind::rel_top:
      case ModelKind::matrix_top: return eom_top(s);
      case ModelKind::gaudin_lattice: return eom_gaudin(s, j_);
      case ModelKind::coupled: {
        const CoeffField b = to_nm_field(s);
        CoeffField bd = eom_gaudin(b, j_);
        Matrix c = Matrix::Zero(spec_.K, spec_.K);
        for (const auto& g : lattice(spec_.M))
          if (!g.is_zero()) c += offset_[g.flat()] * b.at(nm_index(LatticeIndex(spec_.N, 0, 0), g, spec_.N, spec_.M));
        for (std::size_t a = 1; a < b.size(); ++a) bd.values[a] += detail::comm(b.values[a], c);
        return from_nm_field(bd, spec_.N, spec_.M);
      }
    }
    return s;
  }

  Matrix lax_L(const CoeffField& s, cplx x) const {
    const cplx c = spec_.coupling;
    const int n = spec_.N;
    switch (spec_.kind) {
      case ModelKind::nonrel_top: {
        Matrix out = Matrix::Zero(n, n);
        for (const auto& a : lattice(n))
          if (!a.is_zero()) out += basis_.t(a) * (s.s(a) * phi_alpha(x, 0.0, a, e_));
        return out;
      }
      case ModelKind::rel_top: {
        Matrix out = Matrix::Zero(n, n);
        for (const auto& a : lattice(n)) out += basis_.t(a) * (s.s(a) * phi_alpha(x, c, a, e_));
        return out;
      }
      case ModelKind::matrix_top: {
        Matrix out = Matrix::Zero(n * spec_.M, n * spec_.M);
        for (const auto& a : lattice(n)) out += kron(basis_.t(a), s.at(a)) * phi_alpha(x, c / double(n), a, e_);
        return out;
      }
      case ModelKind::gaudin_lattice: {
        Matrix out = Matrix::Zero(spec_.K, spec_.K);
        for (const auto& a : lattice(n)) out += s.at(a) * phi_alpha(x, c / double(n), a, e_);
        return out;
      }
      case ModelKind::coupled: {
        Matrix out = Matrix::Zero(spec_.K, spec_.K);
        for (const auto& a : lattice(n))
          for (const auto& ta : lattice(spec_.M)) out += s.at(a, ta) * Phi(x, c, a, ta, e_);
        return out;
      }
    }
    return {};
  }

  Matrix lax_M(const CoeffField& s, cplx x) const {
    const int n = spec_.N;
    switch (spec_.kind) {
      case ModelKind::nonrel_top: {
        Matrix out = Matrix::Zero(n, n);
        for (const auto& a : lattice(n))
          if (!a.is_zero()) out += basis_.t(a) * (s.s(a) * f_alpha(x, a, e_));
        return out;
      }
      case ModelKind::rel_top: {
        Matrix out = Matrix::Zero(n, n);
        for (const auto& a : lattice(n))
          if (!a.is_zero()) out -= basis_.t(a) * (s.s(a) * phi_alpha(x, 0.0, a, e_));
        return out;
      }
      case ModelKind::matrix_top: {
        Matrix out = Matrix::Zero(n * spec_.M, n * spec_.M);
        for (const auto& a : lattice(n))
          if (!a.is_zero()) out -= kron(basis_.t(a), s.at(a)) * phi_alpha(x, 0.0, a, e_);
        return out;
      }
      case ModelKind::gaudin_lattice: {
        Matrix out = Matrix::Zero(spec_.K, spec_.K);
        for (const auto& a : lattice(n))
          if (!a.is_zero()) out -= s.at(a) * phi_alpha(x, 0.0, a, e_);
        return out;
      }
      case ModelKind::coupled: {
        Matrix out = Matrix::Zero(spec_.K, spec_.K);
        const LatticeIndex zero(n, 0, 0);
        for (const auto& a : lattice(n))
          for (const auto& ta : lattice(spec_.M)) {
            if (a.is_zero())
              out -= s.at(a, ta) * e_.E1(x + double(n) * omega(ta, e_.tau()));
            else
              out -= s.at(a, ta) * Phi(x, 0.0, a, ta, e_);
          }
        return out;
      }
    }
    return {};
  }

  std::vector<cplx> pole_set() const {
    if (spec_.kind != ModelKind::coupled) return {cplx(0.0)};
    std::vector<cplx> out;
    for (const auto& ta : lattice(spec_.M)) out.push_back(-double(spec_.N) * omega(ta, e_.tau()));
    return out;
  }

  LaxPair lax_pair(const CoeffField& s) const {
    check_shape(s);
    if (spec_.kind == ModelKind::coupled && spec_.reduction == Reduction::coupled) {
      const double d = zero_mode_deviation(to_nm_field(s));
      if (d > constraint_tol) throw constraint_violation(d);
    }
    LaxPair lp;
    lp.L = [self = *this, s](cplx x) { return self.lax_L(s, x); };
    lp.M = [self = *this, s](cplx x) { return self.lax_M(s, x); };
    lp.role = spec_.role;
    lp.pole_set = pole_set();
    return lp;
  }

  // max over samples of ||Ldot - [L, M]||, absolute and relative to ||[L, M]||
  LaxResidual lax_residual(const CoeffField& s, const std::vector<cplx>& samples,
                           ConstraintPolicy policy = ConstraintPolicy::check) const {
    const CoeffField sd = eom(s, policy);
    std::vector<LaxResidual> per(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
      const cplx x = samples[i];
      const Matrix l = lax_L(s, x);
      const Matrix m = lax_M(s, x);
      const Matrix c = detail::comm(l, m);
      const double a = frobenius(lax_L(sd, x) - c);
      const double cn = frobenius(c);
      per[i] = {a, cn > 0.0 ? a / cn : a};
    });
    LaxResidual out;
    for (const auto& r : per) {
      out.max_abs = std::max(out.max_abs, r.max_abs);
      out.max_rel = std::max(out.max_rel, r.max_rel);
    }
    return out;
  }

  bool needs_constraints() const {
    return spec_.reduction != Reduction::none && spec_.reduction == natural_reduction(spec_.kind);
  }

  CoeffField project(const CoeffField& s) const {
    check_shape(s);
    switch (spec_.reduction) {
      case Reduction::none: return s;
      case Reduction::z2_nonrel:
      case Reduction::z2_rel:
      case Reduction::matrix_top: {
        CoeffField out = symmetrize(s, den_, true);
        if (spec_.reduction == Reduction::matrix_top) scalarize_zero_mode(out);
        return out;
      }
      case Reduction::gaudin: {
        CoeffField out = symmetrize(s, den_, false);
        scalarize_zero_mode(out);
        return out;
      }
      case Reduction::coupled: {
        CoeffField b = symmetrize(to_nm_field(s), den_, false);
        scalarize_zero_mode(b);
        return from_nm_field(b, spec_.N, spec_.M);
      }
    }
    return s;
  }

  // ||S - project(S)|| / max(1, ||S||)
  double constraint_deviation(const CoeffField& s) const {
    if (spec_.reduction == Reduction::none) return 0.0;
    return (s - project(s)).norm() / std::max(1.0, s.norm());
  }

  // i.i.d. complex Gaussian entries scaled by `scale`, projected on the model's constraints
  CoeffField random_field(std::mt19937_64& rng, double scale = 1.0) const {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    CoeffField f = zeros();
    for (auto& v : f.values)
      for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = scale * cplx(g(rng), g(rng));
    return project(f);
  }

  static constexpr double constraint_tol = 1e-8;

 private:
  ModelSpec spec_;
  Elliptic e_;
  TorusBasis basis_;
  std::vector<cplx> j_;
  std::vector<cplx> den_;  // phi_a(eta', omega_a) denominators of the constraint parametrization
  std::vector<int> sigma_;
  std::vector<cplx> offset_;

  void init() {
    const int n = spec_.N;
    const cplx c = spec_.coupling;
    switch (spec_.kind) {
      case ModelKind::nonrel_top:
        j_ = inertia_nonrel(n);
        den_.assign(n * n, 1.0);
        break;
      case ModelKind::rel_top:
        j_ = inertia_rel(n, c);
        den_ = denominators(n, c);
        break;
      case ModelKind::matrix_top:
      case ModelKind::gaudin_lattice:
        j_ = inertia_rel(n, c / double(n));
        den_ = denominators(n, c / double(n));
        break;
      case ModelKind::coupled: {
        const int nm = n * spec_.M;
        j_ = inertia_rel(nm, c / double(spec_.M));
        den_ = denominators(nm, c / double(spec_.M));
        offset_ = coupled_offset();
        break;
      }
    }
    if (spec_.reduction == Reduction::z2_nonrel) den_.assign(n * n, 1.0);
  }

  std::vector<cplx> inertia_nonrel(int n) const {
    std::vector<cplx> j(n * n, 0.0);
    for (const auto& a : lattice(n))
      if (!a.is_zero()) j[a.flat()] = -e_.wp(omega(a, e_.tau()));
    return j;
  }

  std::vector<cplx> inertia_rel(int n, cplx eta) const {
    std::vector<cplx> j(n * n, 0.0);
    for (const auto& a : lattice(n))
      if (!a.is_zero()) j[a.flat()] = e_.E1(eta + omega(a, e_.tau())) - e_.E1(omega(a, e_.tau()));
    return j;
  }

  std::vector<cplx> denominators(int n, cplx eta) const {
    std::vector<cplx> d(n * n, 1.0);
    for (const auto& a : lattice(n))
      if (!a.is_zero()) {
        d[a.flat()] = phi_alpha(eta, 0.0, a, e_);
        if (d[a.flat()] == cplx(0.0)) throw error("vanishing constraint denominator");
      }
    return d;
  }

  // M-matrix of the coupled model minus the Z_NM Gaudin-like M-matrix: constant in z.
  // Evaluated once at a generic reference point.
  std::vector<cplx> coupled_offset() const {
    const int n = spec_.N, m = spec_.M;
    const cplx zr = 0.1234 + 0.2345 * e_.tau();
    std::vector<cplx> c(m * m, 0.0);
    for (const auto& g : lattice(m)) {
      if (g.is_zero()) continue;
      const LatticeIndex a = nm_index(LatticeIndex(n, 0, 0), g, n, m);
      cplx s = 0.0;
      for (const auto& ta : lattice(m)) s += std::conj(kappa_sq_m(a, ta)) * e_.E1(zr + double(n) * omega(ta, e_.tau()));
      c[g.flat()] = -s / double(m) + phi_alpha(double(m) * zr, 0.0, a, e_);
    }
    return c;
  }

  void check_shape(const CoeffField& s) const {
    if (s.n != spec_.N || s.m != spec_.second_lattice() || s.k != spec_.block() ||
        s.values.size() != std::size_t(s.n) * s.n * s.m * s.m)
      throw std::invalid_argument("coefficient field does not match the model");
  }

  // [X, J(X)] with X = sum T_a (x) S_a, decomposed back; zero mode pinned
  CoeffField eom_top(const CoeffField& s) const {
    const int n = spec_.N, k = s.k;
    Matrix x = Matrix::Zero(n * k, n * k), jx = Matrix::Zero(n * k, n * k);
    for (const auto& a : lattice(n)) {
      const Matrix t = kron(basis_.t(a), s.at(a));
      x += t;
      jx += j_[a.flat()] * t;
    }
    CoeffField out = decompose(detail::comm(x, jx), n, k);
    out.values[0].setZero();
    return out;
  }

  // Adot^a = sum_b [A^b, A^{a-b}] J_{a-b}, a != 0
  static CoeffField eom_gaudin(const CoeffField& s, const std::vector<cplx>& j) {
    const int n = s.n;
    CoeffField out = CoeffField::zeros(n, 1, s.k);
    const auto lat = lattice(n);
    for (const auto& a : lat) {
      if (a.is_zero()) continue;
      Matrix acc = Matrix::Zero(s.k, s.k);
      for (const auto& b : lat) {
        const LatticeIndex d = a - b;
        if (d.is_zero() || j[d.flat()] == cplx(0.0)) continue;
        acc += detail::comm(s.at(b), s.at(d)) * j[d.flat()];
      }
      out.at(a) = acc;
    }
    return out;
  }

  // c_a = S_a/den_a symmetrized against c_[-a] (with the wrap sign when `signed_`)
  static CoeffField symmetrize(const CoeffField& s, const std::vector<cplx>& den, bool signed_) {
    CoeffField out = s;
    const int n = s.n;
    for (const auto& a : lattice(n)) {
      if (a.is_zero()) continue;
      const LatticeIndex b = -a;
      if (b.flat() < a.flat()) continue;
      const double sg = signed_ ? reflection_sign(a) : 1.0;
      if (b == a) {
        if (sg < 0) out.at(a).setZero();
        continue;
      }
      const Matrix v = 0.5 * (s.at(a) / den[a.flat()] + sg * s.at(b) / den[b.flat()]);
      out.at(a) = v * den[a.flat()];
      out.at(b) = sg * v * den[b.flat()];
    }
    return out;
  }

  static void scalarize_zero_mode(CoeffField& f) {
    Matrix& z = f.values[0];
    z = (z.trace() / double(f.k)) * Matrix::Identity(f.k, f.k);
  }

  static double zero_mode_deviation(const CoeffField& f) {
    const Matrix& z = f.values[0];
    const Matrix d = z - (z.trace() / double(f.k)) * Matrix::Identity(f.k, f.k);
    return d.norm() / std::max(1.0, f.norm());
  }
};

// (J(S))_a = -wp(omega_a) S_a, a != 0
inline CoeffField J_nonrel(const CoeffField& s, const Elliptic& e) {
  CoeffField out = s;
  for (const auto& a : lattice(s.n))
    out.at(a) = a.is_zero() ? Matrix::Zero(s.k, s.k) : Matrix(-e.wp(omega(a, e.tau())) * s.at(a));
  return out;
}

// (J(S))_a = (E1(eta + omega_a) - E1(omega_a)) S_a, a != 0
inline CoeffField J_rel(const CoeffField& s, cplx eta, const Elliptic& e) {
  CoeffField out = s;
  for (const auto& a : lattice(s.n)) {
    if (a.is_zero()) {
      out.at(a).setZero();
      continue;
    }
    const cplx w = omega(a, e.tau());
    out.at(a) = (e.E1(eta + w) - e.E1(w)) * s.at(a);
  }
  return out;
}

// S_a -> S_a / phi_a(eta, omega_a) for a != 0
inline CoeffField relativize(const CoeffField& s, cplx eta, const Elliptic& e) {
  CoeffField out = s;
  for (const auto& a : lattice(s.n)) {
    if (a.is_zero()) continue;
    const cplx d = phi_alpha(eta, 0.0, a, e);
    if (d == cplx(0.0)) throw error("relativize: vanishing phi_a(eta, omega_a)");
    out.at(a) = s.at(a) / d;
  }
  return out;
}

// L0(z, S) = 1 S_0 + sum' T_a S_a phi_a(z, omega_a)
inline Matrix nonrel_lax_with_zero_mode(const CoeffField& s, cplx z, const Elliptic& e) {
  const int n = s.n;
  Matrix out = s.s(LatticeIndex(n, 0, 0)) * Matrix::Identity(n, n);
  for (const auto& a : lattice(n))
    if (!a.is_zero()) out += T(a) * (s.s(a) * phi_alpha(z, 0.0, a, e));
  return out;
}

// || L^eta(z - eta, L0(eta, S)) - phi(z - eta, eta) L0(z, S) || relative to the second term
inline double check_relativization(const CoeffField& s, cplx eta, cplx z, const Elliptic& e) {
  const int n = s.n;
  const CoeffField sp = decompose(nonrel_lax_with_zero_mode(s, eta, e), n);
  Matrix lhs = Matrix::Zero(n, n);
  for (const auto& a : lattice(n)) lhs += T(a) * (sp.s(a) * phi_alpha(z - eta, eta, a, e));
  const Matrix rhs = e.phi(z - eta, eta) * nonrel_lax_with_zero_mode(s, z, e);
  return (lhs - rhs).norm() / std::max(1e-300, rhs.norm());
}

struct GaudinReduction {
  ModelSpec model;                  // coupled model whose L takes the Gaudin form
  CoeffField field;                 // its coefficient field
  std::vector<cplx> marked_points;  // z_k
  std::vector<Matrix> residues;     // declared residue matrices S^k
};

// Variant 1: s over Z_N^2 x Z_M^2 (scalars s(g, ta)) gives the K=N coupled field
// A^{g,ta} = exp(-2 pi i eta N ta2/M) s(g,ta) T_g with marked points -N tomega_ta.
// Variant 2 is the same construction with N and M exchanged: s(a, tg) gives a
// field over Z_M^2 x Z_N^2 with K=M and marked points -M omega_a.
inline GaudinReduction gaudin_reduce(const CoeffField& s, int variant, cplx eta, const Elliptic& e) {
  if (s.k != 1) throw std::invalid_argument("gaudin_reduce expects scalar parameters");
  if (variant != 1 && variant != 2) throw std::invalid_argument("variant must be 1 or 2");
  const int n = variant == 1 ? s.n : s.m;  // lattice carrying the T basis
  const int m = variant == 1 ? s.m : s.n;  // lattice of marked points
  GaudinReduction out;
  out.model = ModelSpec::make(ModelKind::coupled, n, m, n, eta);
  out.model.reduction = Reduction::none;
  out.field = CoeffField::zeros(n, m, n);
  auto param = [&](const LatticeIndex& g, const LatticeIndex& p) {
    return variant == 1 ? s.at(g, p)(0, 0) : s.at(p, g)(0, 0);
  };
  for (const auto& p : lattice(m)) {
    Matrix res = Matrix::Zero(n, n);
    const cplx phase = std::exp(-2.0 * pi * I * eta * (double(n) * p.a2 / m));
    for (const auto& g : lattice(n)) {
      const Matrix t = T(g);
      out.field.at(g, p) = phase * param(g, p) * t;
      res += param(g, p) * t;
    }
    out.marked_points.push_back(-double(n) * omega(p, e.tau()));
    out.residues.push_back(res);
  }
  return out;
}

// Res_{z=zk} of a matrix function with a simple pole, from the even sequence
// g(eps) = eps (L(zk+eps) - L(zk-eps))/2 and two Richardson steps.
inline Matrix extract_residue(const std::function<Matrix(cplx)>& l, cplx zk, double eps = 1e-2) {
  auto g = [&](double h) { return Matrix(0.5 * h * (l(zk + h) - l(zk - h))); };
  const Matrix g1 = g(eps), g2 = g(eps / 2), g3 = g(eps / 4);
  const Matrix r1 = (4.0 * g2 - g1) / 3.0, r2 = (4.0 * g3 - g2) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

}  // namespace elliptop
