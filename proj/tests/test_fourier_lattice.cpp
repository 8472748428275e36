#include <elliptop/fourier_lattice.hpp>
#include <elliptop/identities.hpp>

#include <array>

#include "common.hpp"

using namespace elliptop;
using testing_util::rel;
using testing_util::Sampler;

namespace {

Elliptic ell(cplx tau = testing_util::tau0) { return Elliptic(testing_util::params(tau)); }

CoeffField random_field(int n, int m, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CoeffField f = CoeffField::zeros(n, m, k);
  for (auto& v : f.values)
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) v(i, j) = cplx(g(rng), g(rng));
  return f;
}

}  // namespace

TEST(PhiAlpha, ZeroIndexIsPlainKronecker) {
  const auto e = ell();
  Sampler s(1);
  for (int i = 0; i < 10; ++i) {
    const cplx z = s.point(), eta = s.point();
    EXPECT_LT(rel(phi_alpha(z, eta, LatticeIndex(3, 0, 0), e), e.phi(z, eta)), 1e-14);
  }
}

TEST(PhiAlpha, TranslationRelation) {
  const auto e = ell();
  Sampler s(2);
  for (int n : {2, 3}) {
    for (const auto& a : lattice(n)) {
      if (a.is_zero()) continue;
      for (int i = 0; i < 5; ++i) {
        const cplx z = s.point(), eta = s.point();
        const cplx lhs = phi_alpha(z, eta, a, e) / e.phi(z, eta);
        const cplx rhs = phi_alpha(z + eta, 0.0, a, e) / phi_alpha(eta, 0.0, a, e);
        EXPECT_LT(rel(lhs, rhs), 1e-11) << n << " " << a.a1 << "," << a.a2;
      }
    }
  }
}

TEST(PhiAlpha, ShiftByNInFirstComponent) {
  const auto e = ell();
  Sampler s(3);
  for (int n : {2, 3, 5}) {
    for (int i = 0; i < 5; ++i) {
      const cplx z = s.point(), eta = s.point(0.0, 0.1);
      for (long a1 = 0; a1 < n; ++a1)
        for (long a2 = 0; a2 < n; ++a2) {
          const cplx base = dressed_phi(z, eta + omega_raw(a1, a2, n, e.tau()), a2, n, e);
          const cplx shifted = dressed_phi(z, eta + omega_raw(a1 + n, a2, n, e.tau()), a2, n, e);
          EXPECT_LT(rel(base, shifted), 1e-11);
        }
    }
  }
}

TEST(FAlpha, CentralDifferenceInEta) {
  const auto e = ell();
  Sampler s(4);
  const double h = 1e-5;
  for (const auto& a : lattice(3)) {
    if (a.is_zero()) continue;
    const cplx z = s.point();
    const cplx fd = (phi_alpha(z, h, a, e) - phi_alpha(z, -h, a, e)) / (2.0 * h);
    EXPECT_LT(rel(f_alpha(z, a, e), fd), 1e-8);
  }
  EXPECT_THROW(f_alpha(0.2, LatticeIndex(3, 0, 0), e), std::invalid_argument);
}

// The dressing exp(2 pi i z a2/N) is not 1-periodic, so z -> z + 1 picks up a root of
// unity; z -> z + N is a genuine period.
TEST(FAlpha, PeriodsInZ) {
  const auto e = ell();
  Sampler s(5);
  const int n = 3;
  for (const auto& a : lattice(n)) {
    if (a.is_zero()) continue;
    const cplx z = s.point();
    const cplx mult = std::exp(2.0 * pi * I * double(a.a2) / double(n));
    EXPECT_LT(rel(f_alpha(z + 1.0, a, e), mult * f_alpha(z, a, e)), 1e-11);
    EXPECT_LT(rel(f_alpha(z + double(n), a, e), f_alpha(z, a, e)), 1e-11);
  }
}

TEST(FtCoeffs, DeltaFieldBecomesConstant) {
  for (int n : {2, 3, 4}) {
    CoeffField d = CoeffField::zeros(n, 1, 1);
    d.at(LatticeIndex(n, 0, 0))(0, 0) = cplx(2.0, -1.0);
    const auto t = ft_coeffs(d);
    for (const auto& b : lattice(n)) EXPECT_LT(std::abs(t.s(b) - cplx(2.0, -1.0) / double(n)), 1e-15);
  }
}

TEST(FtCoeffs, Involution) {
  for (int n : {2, 3, 5}) {
    for (int k : {1, 2}) {
      const auto a = random_field(n, 1, k, 10 + n + k);
      const auto back = ft_coeffs(ft_coeffs(a), FtDirection::backward);
      double err = 0.0;
      for (std::size_t i = 0; i < a.values.size(); ++i) err = std::max(err, (back.values[i] - a.values[i]).norm());
      EXPECT_LT(err, 1e-13) << n;
    }
  }
}

TEST(FtCoeffs, TwoByTwoSignMatrix) {
  // rows and columns ordered (0,0), (1,0), (0,1), (1,1)
  const int sign[4][4] = {{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}};
  const LatticeIndex order[4] = {{2, 0, 0}, {2, 1, 0}, {2, 0, 1}, {2, 1, 1}};
  for (int col = 0; col < 4; ++col) {
    CoeffField d = CoeffField::zeros(2, 1, 1);
    d.at(order[col])(0, 0) = 1.0;
    const auto t = ft_coeffs(d);
    for (int row = 0; row < 4; ++row) EXPECT_LT(std::abs(t.s(order[row]) - 0.5 * sign[row][col]), 1e-15);
  }
}

TEST(FtCoeffs, RejectsIncompleteField) {
  CoeffField f = CoeffField::zeros(3, 1, 1);
  f.values.pop_back();
  EXPECT_THROW(ft_coeffs(f), std::invalid_argument);
}

TEST(BigPhi, TrivialSecondLatticeReducesToDressedPhi) {
  const auto e = ell();
  Sampler s(6);
  for (const auto& a : lattice(3)) {
    const cplx z = s.point(), eta = s.point(0.0, 0.1);
    EXPECT_LT(rel(Phi(z, eta, a, LatticeIndex(1, 0, 0), e), phi_alpha(z, eta, a, e)), 1e-14);
  }
}

TEST(BigPhi, PeriodicInSecondIndex) {
  const auto e = ell();
  Sampler s(7);
  for (auto [n, m] : {std::pair{2, 3}, {3, 2}, {3, 4}}) {
    for (int i = 0; i < 3; ++i) {
      const cplx z = s.point(), eta = s.point(0.0, 0.1);
      for (const auto& a : lattice(n))
        for (const auto& ta : lattice(m)) {
          const cplx base = Phi_raw(z, eta, n, m, a.a1, a.a2, ta.a1, ta.a2, e);
          EXPECT_LT(rel(Phi_raw(z, eta, n, m, a.a1, a.a2, ta.a1 + m, ta.a2, e), base), 1e-10);
          EXPECT_LT(rel(Phi_raw(z, eta, n, m, a.a1, a.a2, ta.a1, ta.a2 + m, e), base), 1e-10);
        }
    }
  }
}

TEST(BigPhi, ZeroEta) {
  const auto e = ell();
  Sampler s(8);
  const int n = 2, m = 3;
  const cplx z = s.point();
  for (const auto& a : lattice(n))
    for (const auto& ta : lattice(m)) {
      if (a.is_zero()) continue;
      const cplx expect = phi_alpha(z + double(n) * omega(ta, e.tau()), 0.0, a, e);
      EXPECT_LT(rel(Phi(z, 0.0, a, ta, e), expect), 1e-13);
    }
}

TEST(BigPhi, RejectsNonCoprimeSizes) {
  const auto e = ell();
  EXPECT_THROW(Phi(0.2, 0.1, LatticeIndex(2, 1, 0), LatticeIndex(4, 1, 1), e), std::invalid_argument);
  DressedFnParams p{2, 4, testing_util::params()};
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(NmField, RoundTripAndExpansion) {
  const auto e = ell();
  Sampler s(9);
  for (auto [n, m] : {std::pair{2, 3}, {3, 2}}) {
    const auto a = random_field(n, m, 1, 20 + n);
    const auto b = to_nm_field(a);
    const auto back = from_nm_field(b, n, m);
    for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_LT((back.values[i] - a.values[i]).norm(), 1e-13);

    const cplx z = s.point(), eta = s.point(0.0, 0.1);
    cplx lhs = 0.0, rhs = 0.0;
    for (const auto& al : lattice(n))
      for (const auto& ta : lattice(m)) lhs += a.at(al, ta)(0, 0) * Phi(z, eta, al, ta, e);
    for (const auto& c : lattice(n * m)) rhs += b.at(c)(0, 0) * phi_alpha(double(m) * z, eta / double(m), c, e);
    EXPECT_LT(rel(lhs, rhs), 1e-10);
  }
}

TEST(Identities, KroneckerSymmetryAtNOne) {
  DressedFnParams p{1, 1, testing_util::params()};
  const auto r = verify_identity("e913", p, 8, 3, 1e-12);
  EXPECT_TRUE(r.pass) << r.max_rel_residual;
  EXPECT_LT(r.max_abs_residual, 1e-12);
}

TEST(Identities, KappaSquareSumAtZero) {
  const Elliptic e(testing_util::params());
  const IdentityContext c{e, 3, 1};
  const auto& spec = find_identity("e9051");
  cplx sum = 0.0;
  for (const auto& t : spec.tuples(3, 1))
    if (t[0] == 0) sum = spec.lhs(c, {}, t);
  EXPECT_LT(std::abs(sum - 9.0), 1e-13);
}

TEST(Identities, FourierDualityExample) {
  DressedFnParams p{2, 1, testing_util::params({0.31, 1.27})};
  const auto r = verify_identity("e913", p, 16, 7, 1e-9);
  EXPECT_TRUE(r.pass) << r.max_rel_residual;
  EXPECT_EQ(r.samples, 16);
  EXPECT_EQ(r.tuples, 4u);
}

TEST(Identities, FayDegeneration) {
  DressedFnParams p{1, 1, testing_util::params()};
  const auto r = verify_identity("w86", p, 20, 11, 1e-10);
  EXPECT_TRUE(r.pass) << r.max_rel_residual;
}

TEST(Identities, WholeRegistry) {
  for (int n : {2, 3, 5}) {
    DressedFnParams p{n, 1, testing_util::params()};
    for (const auto& spec : identity_registry()) {
      if (spec.mixed) continue;
      const auto r = verify_identity(spec.id, p, 20, 100 + n, 1e-8);
      EXPECT_TRUE(r.pass) << spec.id << " N=" << n << " rel=" << r.max_rel_residual;
    }
  }
}

TEST(Identities, MixedRegistry) {
  for (auto [n, m] : {std::pair{2, 3}, {3, 2}, {3, 4}}) {
    DressedFnParams p{n, m, testing_util::params()};
    for (const auto& spec : identity_registry()) {
      if (!spec.mixed) continue;
      const auto r = verify_identity(spec.id, p, 20, 200 + n * m, 1e-8);
      EXPECT_TRUE(r.pass) << spec.id << " N=" << n << " M=" << m << " rel=" << r.max_rel_residual;
    }
  }
}

TEST(Identities, SeedDeterminesResiduals) {
  DressedFnParams p{3, 1, testing_util::params()};
  const auto a = verify_identity("w91", p, 10, 5, 1e-8);
  const auto b = verify_identity("w91", p, 10, 5, 1e-8);
  const auto c = verify_identity("w91", p, 10, 6, 1e-8);
  EXPECT_EQ(a.max_abs_residual, b.max_abs_residual);
  EXPECT_EQ(a.max_rel_residual, b.max_rel_residual);
  EXPECT_EQ(a.evaluations, b.evaluations);
  EXPECT_NE(a.max_abs_residual, c.max_abs_residual);
}

// The double-limit sum over nonzero indices is the finite part left over by the
// z -> 0 and hbar -> 0 forms; both limits must land on the same value (zero).
TEST(Identities, DoubleLimitConsistency) {
  const Elliptic e(testing_util::params());
  for (int n : {2, 3, 5}) {
    const IdentityContext c{e, n, 1};
    const auto& e918 = find_identity("e918");
    const cplx direct = e918.lhs(c, {}, {});
    EXPECT_LT(std::abs(direct - e918.rhs(c, {}, {})), 1e-12);

    const auto& e915 = find_identity("e915");
    const auto& e917 = find_identity("e917");
    const Tuple gamma0{0};
    const double nd = n;
    // Both forms with their poles removed are O(h) away from the finite part; one
    // Richardson step cancels that so the comparison is not swamped by truncation.
    auto limits = [&](double h) {
      const cplx pole = e.E1(h) / nd;
      const cplx poles = pole + (nd * nd - 1.0) / (nd * h);
      return std::array<cplx, 4>{e915.lhs(c, {h}, {}) - pole, e915.rhs(c, {h}, {}) - pole,
                                 e917.lhs(c, {h}, gamma0) - poles, e917.rhs(c, {h}, gamma0) - poles};
    };
    const auto coarse = limits(2e-4), fine = limits(1e-4);
    for (int i = 0; i < 4; ++i) EXPECT_LT(std::abs(2.0 * fine[i] - coarse[i] - direct), 1e-5) << n << " form " << i;
  }
}

TEST(Identities, UnknownIdAndEmptyRegistryLookups) {
  DressedFnParams p{2, 1, testing_util::params()};
  EXPECT_THROW(verify_identity("nope", p, 4, 1, 1e-8), unknown_identity);
  EXPECT_EQ(identity_ids().size(), 26u);
}
