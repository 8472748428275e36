#pragma once

// Registry of exact lattice identities and a sampling verifier.

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fourier_lattice.hpp"
#include "parallel.hpp"

namespace elliptop {

struct IdentityContext {
  const Elliptic& e;
  int N;
  int M;

  LatticeIndex a(int flat) const { return LatticeIndex::from_flat(N, flat); }
  LatticeIndex ta(int flat) const { return LatticeIndex::from_flat(M, flat); }
  cplx om(const LatticeIndex& x) const { return omega(x, e.tau()); }
  // 2 pi i d omega_a / d tau
  cplx dt(const LatticeIndex& x) const { return 2.0 * pi * I * (double(x.a2) / x.n); }
};

using Args = std::vector<cplx>;
using Tuple = std::vector<int>;

struct IdentitySpec {
  std::string id;
  std::string arity;
  int continuous = 0;
  bool mixed = false;  // uses the Z_M^2 lattice as well
  std::function<std::vector<Tuple>(int N, int M)> tuples;
  std::function<cplx(const IdentityContext&, const Args&, const Tuple&)> lhs;
  std::function<cplx(const IdentityContext&, const Args&, const Tuple&)> rhs;
  std::string note;
};

struct unknown_identity : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct VerificationReport {
  std::string id;
  int N = 1;
  int M = 1;
  int samples = 0;
  std::uint64_t seed = 0;
  std::size_t tuples = 0;
  std::size_t evaluations = 0;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string note;
};

namespace detail {

inline std::vector<Tuple> cartesian(const std::vector<int>& sizes, const std::function<bool(const Tuple&)>& keep) {
  std::vector<Tuple> out;
  Tuple t(sizes.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t d) {
    if (d == sizes.size()) {
      if (keep(t)) out.push_back(t);
      return;
    }
    for (int i = 0; i < sizes[d]; ++i) {
      t[d] = i;
      rec(d + 1);
    }
  };
  rec(0);
  return out;
}

inline auto any = [](const Tuple&) { return true; };

// (E1(omega_a + x) + 2 pi i d omega_a)^2 - wp(omega_a + x)
inline cplx second_order(const IdentityContext& c, const LatticeIndex& a, cplx x) {
  const cplx y = c.om(a) + x;
  const cplx e1 = c.e.E1(y) + c.dt(a);
  return e1 * e1 - c.e.wp(y);
}

inline std::vector<IdentitySpec> build_registry() {
  using C = const IdentityContext&;
  using A = const Args&;
  using T = const Tuple&;
  std::vector<IdentitySpec> r;
  auto per_gamma = [](bool nonzero) {
    return [nonzero](int n, int) {
      return cartesian({n * n}, [nonzero](T t) { return !nonzero || t[0] != 0; });
    };
  };
  auto single = [](int, int) { return std::vector<Tuple>{Tuple{}}; };

  r.push_back({"e913", "z, hbar; gamma in Z_N^2", 2, false, per_gamma(false),
               [](C c, A x, T t) {
                 const auto g = c.a(t[0]);
                 cplx s = 0.0;
                 for (const auto& al : lattice(c.N)) s += kappa_sq(al, g) * phi_alpha(double(c.N) * x[1], x[0] / double(c.N), al, c.e);
                 return s / double(c.N);
               },
               [](C c, A x, T t) { return phi_alpha(x[0], x[1], c.a(t[0]), c.e); }});

  r.push_back({"e914", "z, hbar; gamma in Z_N^2", 2, false, per_gamma(false),
               [](C c, A x, T t) {
                 const auto g = c.a(t[0]);
                 cplx s = 0.0;
                 for (const auto& al : lattice(c.N)) s += kappa_sq(al, g) * phi_alpha(x[0], x[1], al, c.e);
                 return s / double(c.N);
               },
               [](C c, A x, T t) { return phi_alpha(double(c.N) * x[1], x[0] / double(c.N), c.a(t[0]), c.e); }});

  r.push_back({"e915", "hbar", 1, false, single,
               [](C c, A x, T) {
                 cplx s = 0.0;
                 for (const auto& al : lattice(c.N)) s += c.e.E1(c.om(al) + x[0]) + c.dt(al);
                 return s / double(c.N);
               },
               [](C c, A x, T) { return c.e.E1(double(c.N) * x[0]); }});

  r.push_back({"e916", "hbar; gamma != 0", 1, false, per_gamma(true),
               [](C c, A x, T t) {
                 const auto g = c.a(t[0]);
                 cplx s = 0.0;
                 for (const auto& al : lattice(c.N)) s += kappa_sq(al, g) * (c.e.E1(c.om(al) + x[0]) + c.dt(al));
                 return s / double(c.N);
               },
               [](C c, A x, T t) { return phi_alpha(double(c.N) * x[0], 0.0, c.a(t[0]), c.e); }});

  r.push_back({"e917", "z; gamma in Z_N^2", 1, false, per_gamma(false),
               [](C c, A x, T t) {
                 const auto g = c.a(t[0]);
                 cplx s = c.e.E1(x[0]);
                 for (const auto& al : lattice(c.N))
                   if (!al.is_zero()) s += kappa_sq(al, g) * phi_alpha(x[0], 0.0, al, c.e);
                 return s / double(c.N);
               },
               [](C c, A x, T t) {
                 const auto g = c.a(t[0]);
                 return c.e.E1(c.om(g) + x[0] / double(c.N)) + c.dt(g);
               }});

  r.push_back({"e918", "none", 0, false, single,
               [](C c, A, T) {
                 cplx s = 0.0;
                 for (const auto& al : lattice(c.N))
                   if (!al.is_zero()) s += c.e.E1(c.om(al)) + c.dt(al);
                 return s / double(c.N);
               },
               [](C, A, T) { return cplx(0.0); }});

  r.push_back({"e919", "gamma != 0", 0, false, per_gamma(true),
               [](C c, A, T t) {
                 const auto g = c.a(t[0]);
                 cplx s = 0.0;
                 for (const auto& al : lattice(c.N))
                   if (!al.is_zero()) s += kappa_sq(al, g) * (c.e.E1(c.om(al)) + c.dt(al));
                 return s / double(c.N);
               },
               [](C c, A, T t) {
                 const auto g = c.a(t[0]);
                 return c.e.E1(c.om(g)) + c.dt(g);
               }});

  r.push_back({"e920", "hbar; form 0 (E2) or 1 (wp)", 1, false,
               [](int, int) { return cartesian({2}, any); },
               [](C c, A x, T t) {
                 cplx s = 0.0;
                 for (const auto& al : lattice(c.N)) {
                   const cplx y = c.om(al) + x[0];
                   s += t[0] == 0 ? c.e.E2(y) : c.e.wp(y);
                 }
                 return s;
               },
               [](C c, A x, T t) {
                 const cplx y = double(c.N) * x[0];
                 return double(c.N * c.N) * (t[0] == 0 ? c.e.E2(y) : c.e.wp(y));
               }});

  r.push_back({"e9202", "hbar; gamma != 0", 1, false, per_gamma(true),
               [](C c, A x, T t) {
                 const auto g = c.a(t[0]);
                 cplx s = 0.0;
                 for (const auto& al : lattice(c.N)) s += kappa_sq(al, g) * c.e.E2(c.om(al) + x[0]);
                 return s;
               },
               [](C c, A x, T t) {
                 const auto g = c.a(t[0]);
                 const cplx y = double(c.N) * x[0];
                 return -double(c.N * c.N) * phi_alpha(y, 0.0, g, c.e) * (c.e.E1(y + c.om(g)) - c.e.E1(y) + c.dt(g));
               },
               "printed form: overall minus sign and N^2 factor confirmed"});

  r.push_back({"e921", "form 0 (wp) or 1 (E2)", 0, false,
               [](int, int) { return cartesian({2}, any); },
               [](C c, A, T t) {
                 cplx s = 0.0;
                 for (const auto& al : lattice(c.N))
                   if (!al.is_zero()) s += t[0] == 0 ? c.e.wp(c.om(al)) : c.e.E2(c.om(al));
                 return s;
               },
               [](C c, A, T t) {
                 if (t[0] == 0) return cplx(0.0);
                 return -double(c.N * c.N - 1) / 3.0 * c.e.constants().ratio_d3_d1;
               }});

  r.push_back({"e922", "z; gamma in Z_N^2", 1, false, per_gamma(false),
               [](C c, A x, T t) {
                 const auto g = c.a(t[0]);
                 const cplx e1 = c.e.E1(x[0]);
                 cplx s = 0.5 * (e1 * e1 - c.e.wp(x[0]));
                 for (const auto& al : lattice(c.N))
                   if (!al.is_zero()) s += kappa_sq(al, g) * f_alpha(x[0], al, c.e);
                 return s;
               },
               [](C c, A x, T t) {
                 return 0.5 * double(c.N * c.N) * second_order(c, c.a(t[0]), x[0] / double(c.N));
               }});

  r.push_back({"e923", "z", 1, false, single,
               [](C c, A x, T) {
                 cplx s = 0.0;
                 for (const auto& al : lattice(c.N)) s += second_order(c, al, x[0] / double(c.N));
                 return s;
               },
               [](C c, A x, T) {
                 const cplx e1 = c.e.E1(x[0]);
                 return e1 * e1 - c.e.wp(x[0]);
               }});

  r.push_back({"e924", "z; gamma != 0", 1, false, per_gamma(true),
               [](C c, A x, T t) {
                 const auto g = c.a(t[0]);
                 cplx s = 0.0;
                 for (const auto& al : lattice(c.N)) s += kappa_sq(al, g) * second_order(c, al, x[0] / double(c.N));
                 return 0.5 * s;
               },
               [](C c, A x, T t) { return f_alpha(x[0], c.a(t[0]), c.e); }});

  r.push_back({"e9051", "gamma in Z_N^2", 0, false, per_gamma(false),
               [](C c, A, T t) {
                 const auto g = c.a(t[0]);
                 cplx s = 0.0;
                 for (const auto& al : lattice(c.N)) s += kappa_sq(al, g);
                 return s;
               },
               [](C c, A, T t) { return cplx(t[0] == 0 ? double(c.N * c.N) : 0.0); }});

  r.push_back({"w52", "z, eta; alpha != 0", 2, false, per_gamma(true),
               [](C c, A x, T t) { return phi_alpha(x[0], x[1], c.a(t[0]), c.e) / c.e.phi(x[0], x[1]); },
               [](C c, A x, T t) {
                 const auto al = c.a(t[0]);
                 return phi_alpha(x[0] + x[1], 0.0, al, c.e) / phi_alpha(x[1], 0.0, al, c.e);
               }});

  r.push_back({"w16", "z, eta; alpha, talpha, shift direction", 2, true,
               [](int n, int m) { return cartesian({n * n, m * m, 4}, any); },
               [](C c, A x, T t) {
                 const auto al = c.a(t[0]);
                 const auto ta = c.ta(t[1]);
                 long a1 = al.a1, a2 = al.a2, b1 = ta.a1, b2 = ta.a2;
                 switch (t[2]) {
                   case 0: a1 += c.N; break;
                   case 1: a2 += c.N; break;
                   case 2: b1 += c.M; break;
                   default: b2 += c.M; break;
                 }
                 return Phi_raw(x[0], x[1], c.N, c.M, a1, a2, b1, b2, c.e);
               },
               [](C c, A x, T t) { return Phi(x[0], x[1], c.a(t[0]), c.ta(t[1]), c.e); }});

  r.push_back({"w33", "z, eta; beta, gamma != 0, tbeta != tgamma", 2, true,
               [](int n, int m) {
                 return cartesian({n * n, n * n, m * m, m * m}, [](T t) { return t[1] != 0 && t[2] != t[3]; });
               },
               [](C c, A x, T t) {
                 return Phi(x[0], x[1], c.a(t[0]), c.ta(t[2]), c.e) * Phi(x[0], 0.0, c.a(t[1]), c.ta(t[3]), c.e);
               },
               [](C c, A x, T t) {
                 const auto b = c.a(t[0]), g = c.a(t[1]);
                 const auto tb = c.ta(t[2]), tg = c.ta(t[3]);
                 return Phi(0.0, x[1], b, tb - tg, c.e) * Phi(x[0], x[1], b + g, tg, c.e) +
                        Phi(0.0, 0.0, g, tg - tb, c.e) * Phi(x[0], x[1], b + g, tb, c.e);
               }});

  r.push_back({"w34", "z, eta; beta, gamma != 0, tbeta", 2, true,
               [](int n, int m) { return cartesian({n * n, n * n, m * m}, [](T t) { return t[1] != 0; }); },
               [](C c, A x, T t) {
                 return Phi(x[0], x[1], c.a(t[0]), c.ta(t[2]), c.e) * Phi(x[0], 0.0, c.a(t[1]), c.ta(t[2]), c.e);
               },
               [](C c, A x, T t) {
                 const auto b = c.a(t[0]), g = c.a(t[1]);
                 const auto tb = c.ta(t[2]);
                 const cplx ntw = double(c.N) * omega(tb, c.e.tau());
                 return Phi(x[0], x[1], b + g, tb, c.e) *
                        (c.e.E1(x[0] + ntw) + c.e.E1(x[1] + c.om(b)) + c.e.E1(c.om(g)) -
                         c.e.E1(x[0] + x[1] + c.om(b) + c.om(g) + ntw));
               }});

  r.push_back({"w331", "z, eta; beta != gamma, tbeta, tgamma != 0", 2, true,
               [](int n, int m) {
                 return cartesian({n * n, n * n, m * m, m * m}, [](T t) { return t[0] != t[1] && t[3] != 0; });
               },
               [](C c, A x, T t) {
                 return Phi(x[0], x[1], c.a(t[0]), c.ta(t[2]), c.e) * Phi(0.0, x[1], c.a(t[1]), c.ta(t[3]), c.e);
               },
               [](C c, A x, T t) {
                 const auto b = c.a(t[0]), g = c.a(t[1]);
                 const auto tb = c.ta(t[2]), tg = c.ta(t[3]);
                 return Phi(x[0], 0.0, b - g, tb, c.e) * Phi(x[0], x[1], g, tb + tg, c.e) +
                        Phi(0.0, 0.0, g - b, tg, c.e) * Phi(x[0], x[1], b, tb + tg, c.e);
               }});

  r.push_back({"w341", "z, eta; beta, tbeta, tgamma != 0", 2, true,
               [](int n, int m) { return cartesian({n * n, m * m, m * m}, [](T t) { return t[2] != 0; }); },
               [](C c, A x, T t) {
                 return Phi(x[0], x[1], c.a(t[0]), c.ta(t[1]), c.e) * Phi(0.0, x[1], c.a(t[0]), c.ta(t[2]), c.e);
               },
               [](C c, A x, T t) {
                 const auto b = c.a(t[0]);
                 const auto tb = c.ta(t[1]), tg = c.ta(t[2]);
                 const cplx nb = double(c.N) * omega(tb, c.e.tau());
                 const cplx ng = double(c.N) * omega(tg, c.e.tau());
                 return Phi(x[0], x[1], b, tb + tg, c.e) *
                        (c.e.E1(x[0] + nb) + c.e.E1(ng) + c.e.E1(x[1] + c.om(b)) -
                         c.e.E1(x[0] + x[1] + nb + ng + c.om(b)));
               }});

  r.push_back({"w85", "z, w, q, u", 4, false, single,
               [](C c, A x, T) { return c.e.phi(x[0], x[2]) * c.e.phi(x[1], x[3]); },
               [](C c, A x, T) {
                 return c.e.phi(x[0] - x[1], x[2]) * c.e.phi(x[1], x[2] + x[3]) +
                        c.e.phi(x[1] - x[0], x[3]) * c.e.phi(x[0], x[2] + x[3]);
               }});

  r.push_back({"w86", "z, w, q", 3, false, single,
               [](C c, A x, T) { return c.e.phi(x[0], x[2]) * c.e.phi(x[1], x[2]); },
               [](C c, A x, T) {
                 return c.e.phi(x[0] + x[1], x[2]) *
                        (c.e.E1(x[0]) + c.e.E1(x[1]) + c.e.E1(x[2]) - c.e.E1(x[0] + x[1] + x[2]));
               }});

  r.push_back({"w87", "z, x, y", 3, false, single,
               [](C c, A x, T) {
                 return c.e.phi(x[0], x[1]) * c.e.f(x[0], x[2]) - c.e.phi(x[0], x[2]) * c.e.f(x[0], x[1]);
               },
               [](C c, A x, T) { return c.e.phi(x[0], x[1] + x[2]) * (c.e.wp(x[1]) - c.e.wp(x[2])); }});

  r.push_back({"w91", "x, y, eta; beta, gamma != 0", 3, false,
               [](int n, int) { return cartesian({n * n, n * n}, [](T t) { return t[1] != 0; }); },
               [](C c, A x, T t) {
                 return phi_alpha(x[0], x[2], c.a(t[0]), c.e) * phi_alpha(x[1], 0.0, c.a(t[1]), c.e);
               },
               [](C c, A x, T t) {
                 const auto b = c.a(t[0]), g = c.a(t[1]);
                 return phi_alpha(x[0] - x[1], x[2], b, c.e) * phi_alpha(x[1], x[2], b + g, c.e) +
                        phi_alpha(x[1] - x[0], 0.0, g, c.e) * phi_alpha(x[0], x[2], b + g, c.e);
               }});

  r.push_back({"w92", "z, eta; beta, gamma != 0", 2, false,
               [](int n, int) { return cartesian({n * n, n * n}, [](T t) { return t[1] != 0; }); },
               [](C c, A x, T t) {
                 return phi_alpha(x[0], x[1], c.a(t[0]), c.e) * phi_alpha(x[0], 0.0, c.a(t[1]), c.e);
               },
               [](C c, A x, T t) {
                 const auto b = c.a(t[0]), g = c.a(t[1]);
                 return phi_alpha(x[0], x[1], b + g, c.e) *
                        (c.e.E1(x[0]) + c.e.E1(x[1] + c.om(b)) + c.e.E1(c.om(g)) -
                         c.e.E1(x[0] + x[1] + c.om(b) + c.om(g)));
               }});

  r.push_back({"w93", "z; beta, gamma != 0, beta + gamma != 0", 1, false,
               [](int n, int) {
                 return cartesian({n * n, n * n}, [n](T t) {
                   return t[0] != 0 && t[1] != 0 && !(LatticeIndex::from_flat(n, t[0]) + LatticeIndex::from_flat(n, t[1])).is_zero();
                 });
               },
               [](C c, A x, T t) {
                 const auto b = c.a(t[0]), g = c.a(t[1]);
                 return phi_alpha(x[0], 0.0, b, c.e) * f_alpha(x[0], g, c.e) - phi_alpha(x[0], 0.0, g, c.e) * f_alpha(x[0], b, c.e);
               },
               [](C c, A x, T t) {
                 const auto b = c.a(t[0]), g = c.a(t[1]);
                 return phi_alpha(x[0], 0.0, b + g, c.e) * (c.e.wp(c.om(b)) - c.e.wp(c.om(g)));
               }});
  return r;
}

}  // namespace detail

inline const std::vector<IdentitySpec>& identity_registry() {
  static const std::vector<IdentitySpec> r = detail::build_registry();
  return r;
}

inline const IdentitySpec& find_identity(const std::string& id) {
  for (const auto& s : identity_registry())
    if (s.id == id) return s;
  throw unknown_identity("unknown identity id '" + id + "'");
}

inline std::vector<std::string> identity_ids() {
  std::vector<std::string> out;
  for (const auto& s : identity_registry()) out.push_back(s.id);
  return out;
}

// Samples stay this far from every lattice pole of every evaluated function.
inline constexpr double sample_guard = 0.01;
inline constexpr int sample_retries = 500;

inline cplx sample_point(std::mt19937_64& rng, cplx tau) {
  std::uniform_real_distribution<double> u(0.05, 0.45);
  const double x = u(rng);
  const double y = u(rng);
  return x + y * tau;
}

inline VerificationReport verify_identity(const std::string& id, const DressedFnParams& p, int samples,
                                          std::uint64_t seed, double tol) {
  const IdentitySpec& spec = find_identity(id);
  p.validate();
  if (samples < 1) throw std::invalid_argument("samples must be positive");
  if (spec.mixed && p.M < 2) throw std::invalid_argument("identity " + id + " is unsatisfiable for M = 1");
  const auto tuples = spec.tuples(p.N, p.M);
  if (tuples.empty()) throw std::invalid_argument("identity " + id + " has no admissible discrete arguments");

  EllipticParams ep = p.elliptic;
  ep.pole_guard = std::max(ep.pole_guard, sample_guard);
  const Elliptic e(ep);
  const IdentityContext ctx{e, p.N, p.M};

  struct Slot {
    double abs = 0.0, rel = 0.0;
  };
  std::vector<Slot> slots(samples);
  parallel_for(std::size_t(samples), [&](std::size_t i) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(i)};
    std::mt19937_64 rng(seq);
    for (int attempt = 0; attempt < sample_retries; ++attempt) {
      Args x(spec.continuous);
      for (auto& v : x) v = sample_point(rng, e.tau());
      try {
        Slot s;
        for (const auto& t : tuples) {
          const cplx l = spec.lhs(ctx, x, t);
          const cplx r = spec.rhs(ctx, x, t);
          const double a = std::abs(l - r);
          const double rel = std::abs(r) < 1.0 ? a : a / std::abs(r);
          if (!(a <= s.abs)) s.abs = a;  // also propagates NaN
          if (!(rel <= s.rel)) s.rel = rel;
        }
        slots[i] = s;
        return;
      } catch (const pole_proximity_error&) {
      }
    }
    throw error("identity " + spec.id + ": pole-guard exhaustion after bounded retries");
  });

  VerificationReport rep;
  rep.id = spec.id;
  rep.N = p.N;
  rep.M = p.M;
  rep.samples = samples;
  rep.seed = seed;
  rep.tuples = tuples.size();
  rep.evaluations = tuples.size() * std::size_t(samples);
  rep.tol = tol;
  rep.note = spec.note;
  for (const auto& s : slots) {
    if (!(s.abs <= rep.max_abs_residual)) rep.max_abs_residual = s.abs;
    if (!(s.rel <= rep.max_rel_residual)) rep.max_rel_residual = s.rel;
  }
  rep.pass = rep.max_rel_residual < tol;
  return rep;
}

}  // namespace elliptop
