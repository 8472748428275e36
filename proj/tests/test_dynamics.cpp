#include <elliptop/dynamics.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "common.hpp"

using namespace elliptop;

namespace {

const cplx eta0{0.17, 0.05};
const std::vector<cplx> probes{{0.21, 0.37}, {0.33, 0.52}};

TopModel model(ModelKind kind, int n, int m = 1, int k = 1, std::optional<Reduction> red = std::nullopt) {
  auto spec = ModelSpec::make(kind, n, m, k, eta0);
  if (red) spec.reduction = *red;
  return TopModel(spec, testing_util::params());
}

CoeffField desk(const TopModel& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return desk_scale_field(m, rng);
}

IntegratorConfig config(double dt = 1e-3, double t_end = 1.0, int every = 50) {
  IntegratorConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.record_every = every;
  c.spectral_probes = probes;
  return c;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::size_t columns(const std::string& line) { return std::size_t(std::count(line.begin(), line.end(), ',')) + 1; }

}  // namespace

TEST(Config, StepsAndValidation) {
  EXPECT_EQ(config(1e-3, 1.0).steps(), 1000);
  EXPECT_EQ(config(0.3, 1.0).steps(), 3);
  IntegratorConfig bad = config();
  bad.dt = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = config();
  bad.record_every = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Integrate, SingleModeIsConstant) {
  const auto m = model(ModelKind::rel_top, 3);
  CoeffField s = m.zeros();
  s.values[4](0, 0) = cplx(0.3, -0.2);
  const auto tr = integrate(m, s, config(1e-2, 1.0, 10));
  for (const auto& x : tr.states) EXPECT_LT((x - s).norm(), 1e-15);
  const auto zero = integrate(m, m.zeros(), config(1e-2, 0.5, 10));
  EXPECT_EQ(zero.states.back().norm(), 0.0);
}

TEST(Integrate, SnapshotsAreAlignedAndMonotone) {
  const auto m = model(ModelKind::rel_top, 2);
  const auto tr = integrate(m, desk(m, 1), config(1e-2, 1.0, 7));
  ASSERT_EQ(tr.times.size(), tr.states.size());
  ASSERT_EQ(tr.times.size(), tr.monitors.size());
  for (std::size_t i = 1; i < tr.times.size(); ++i) EXPECT_GT(tr.times[i], tr.times[i - 1]);
  EXPECT_NEAR(tr.times.back(), 1.0, 1e-2);
}

TEST(Integrate, ScalarTopSpectrumIsConserved) {
  const auto m = model(ModelKind::rel_top, 2);
  const auto tr = integrate(m, desk(m, 2), config());
  const auto d = summarize(m, tr);
  EXPECT_LT(d.eigenvalue, 1e-8);
  EXPECT_LT(d.trace_S, 1e-12);
  EXPECT_GT(tr.states.front().norm(), 0.0);
  EXPECT_GT((tr.states.back() - tr.states.front()).norm(), 1e-4);  // the flow actually moves
}

TEST(Integrate, LaxInvariantsAreConserved) {
  const auto m = model(ModelKind::rel_top, 3);
  const auto tr = integrate(m, desk(m, 3), config());
  const auto d = summarize(m, tr);
  EXPECT_LT(d.trace_power, 1e-6);
  EXPECT_LT(d.charpoly, 1e-6);
  EXPECT_LT(d.eigenvalue, 1e-8);
}

TEST(Integrate, EveryModelAtDeskScale) {
  struct Case {
    ModelKind kind;
    int n, m, k;
  };
  for (const Case c : {Case{ModelKind::nonrel_top, 3, 1, 1}, Case{ModelKind::matrix_top, 2, 2, 2},
                       Case{ModelKind::gaudin_lattice, 3, 1, 2}, Case{ModelKind::coupled, 2, 3, 2}}) {
    const auto m = model(c.kind, c.n, c.m, c.k);
    const auto tr = integrate(m, desk(m, 4), config(1e-3, 1.0, 100));
    const auto d = summarize(m, tr);
    EXPECT_LT(d.trace_power, 1e-6) << to_string(c.kind);
    EXPECT_LT(d.charpoly, 1e-6) << to_string(c.kind);
  }
}

TEST(Integrate, FourthOrderConvergence) {
  const auto m = model(ModelKind::rel_top, 3);
  const auto s0 = desk(m, 5);
  auto endpoint = [&](double dt) {
    auto c = config(dt, 1.0, 1000000);
    c.spectral_probes.clear();
    return integrate(m, s0, c).states.back();
  };
  const std::vector<double> dts{0.04, 0.02, 0.01};
  const auto ref = endpoint(dts.back() / 8);
  std::vector<double> errs;
  for (double dt : dts) errs.push_back((endpoint(dt) - ref).norm());
  const double order = std::log(errs[0] / errs[2]) / std::log(dts[0] / dts[2]);
  EXPECT_NEAR(order, 4.0, 0.2);
  EXPECT_NEAR(errs[0] / errs[1], 16.0, 3.0);
}

TEST(Spectral, FirstTraceOfRelativisticTop) {
  const auto m = model(ModelKind::rel_top, 3);
  const auto s = desk(m, 6);
  const auto tab = spectral_invariants(m, s, probes, 3);
  for (const auto& row : tab.rows) {
    const cplx expect = s.s(LatticeIndex(3, 0, 0)) * 3.0 * m.elliptic().phi(row.probe, eta0);
    EXPECT_LT(std::abs(row.traces[0] - expect), 1e-13 * std::max(1.0, std::abs(expect)));
    ASSERT_EQ(row.charpoly.size(), 3u);
    // charpoly against the eigenvalues of L
    const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Matrix>(m.lax_L(s, row.probe), false).eigenvalues();
    EXPECT_LT(std::abs(row.charpoly[0] + ev.sum()), 1e-12);
    EXPECT_LT(std::abs(row.charpoly[2] + ev.prod()), 1e-12);
  }
  EXPECT_THROW(spectral_invariants(m, s, {cplx(0.0)}, 2), pole_proximity_error);
}

TEST(Spectral, NewtonIdentities) {
  // x^2 - 3x + 2: roots 1, 2; power sums 3, 5
  const auto c = charpoly_from_traces({3.0, 5.0});
  EXPECT_LT(std::abs(c[0] + 3.0), 1e-15);
  EXPECT_LT(std::abs(c[1] - 2.0), 1e-15);
}

// A 1% error in the inertia coefficients (equivalently in M) keeps reconstruct(S)
// isospectral but breaks the Lax invariants at generic probes.
TEST(Spectral, PerturbedFlowIsCaught) {
  const auto m = model(ModelKind::rel_top, 3);
  std::vector<cplx> jp = m.J();
  for (std::size_t i = 1; i < jp.size(); ++i) jp[i] *= 1.0 + 0.01 * double(i % 3 + 1) / 3.0;
  const FlowField f = [&](const CoeffField& s) {
    const Matrix x = reconstruct(s);
    CoeffField js = s;
    for (std::size_t i = 0; i < js.values.size(); ++i) js.values[i] *= jp[i];
    js.values[0].setZero();
    const Matrix jx = reconstruct(js);
    CoeffField out = decompose(x * jx - jx * x, 3);
    out.values[0].setZero();
    return out;
  };
  const auto s0 = desk(m, 7);
  const auto good = summarize(m, integrate(m, s0, config()));
  const auto bad = summarize(m, integrate_flow(m, f, s0, config()));
  EXPECT_LT(good.trace_power, 1e-6);
  EXPECT_GT(bad.trace_power, 1e-3);
  EXPECT_LT(bad.eigenvalue, 1e-8);
}

TEST(Constraints, MatrixTopDrift) {
  const auto m = model(ModelKind::matrix_top, 2, 2, 2);
  const auto tr = integrate(m, desk(m, 8), config());
  const auto drift = constraint_drift(m, tr);
  EXPECT_LT(*std::max_element(drift.begin(), drift.end()), 1e-7);
}

TEST(Constraints, ReflectionOfNonrelativisticTop) {
  const auto m = model(ModelKind::nonrel_top, 2, 1, 1, Reduction::z2_nonrel);
  const auto m3 = model(ModelKind::nonrel_top, 3, 1, 1, Reduction::z2_nonrel);
  for (const auto* mm : {&m, &m3}) {
    const auto tr = integrate(*mm, desk(*mm, 9), config());
    double worst = 0.0;
    for (const auto& s : tr.states)
      for (const auto& a : lattice(s.n)) {
        const double sg = reflection_sign(a);
        worst = std::max(worst, std::abs(s.s(a) - sg * s.s(-a)));
      }
    EXPECT_LT(worst, 1e-8) << mm->spec().N;
  }
}

TEST(Constraints, UnprojectedStartIsReported) {
  const auto m = model(ModelKind::gaudin_lattice, 3, 1, 2);
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g;
  CoeffField s = m.zeros();
  for (auto& v : s.values)
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = 0.05 * cplx(g(rng), g(rng));
  const auto tr = integrate(m, s, config(1e-2, 0.1, 5));
  const auto d = summarize(m, tr);
  EXPECT_GT(d.initial_constraint, 1e-3);
  EXPECT_EQ(d.initial_constraint, m.constraint_deviation(s));
  EXPECT_EQ(constraint_drift(m, tr).front(), d.initial_constraint);
}

TEST(Integrate, NonFiniteStateAborts) {
  const auto m = model(ModelKind::rel_top, 2);
  const auto s0 = desk(m, 11);
  int calls = 0;
  const FlowField f = [&](const CoeffField& s) {
    CoeffField out = s;
    if (++calls > 40) out.values[1](0, 0) = std::numeric_limits<double>::quiet_NaN();
    return out;
  };
  try {
    integrate_flow(m, f, s0, config(1e-2, 1.0, 1));
    FAIL() << "expected integration_error";
  } catch (const integration_error& e) {
    EXPECT_NEAR(e.last_good_time, 0.1, 1e-12);  // ten full steps of four evaluations succeed
    EXPECT_TRUE(finite(e.last_good_state));
  }
}

TEST(Csv, TrajectoryLayout) {
  const auto m = model(ModelKind::gaudin_lattice, 2, 1, 2);
  const auto tr = integrate(m, desk(m, 12), config(1e-2, 0.1, 5));
  const auto ls = lines(trajectory_csv(tr));
  ASSERT_EQ(ls.size(), tr.states.size() + 1);
  EXPECT_EQ(ls[0].rfind("time,re_0_0_0,im_0_0_0,re_0_0_1", 0), 0u);
  const std::size_t cols = 1 + 2 * 4 * 4;
  for (const auto& l : ls) EXPECT_EQ(columns(l), cols);
  EXPECT_EQ(ls[1].rfind("0,", 0), 0u);
}

TEST(Csv, MonitorLayoutAndFiles) {
  const auto m = model(ModelKind::rel_top, 3);
  const auto tr = integrate(m, desk(m, 13), config(1e-2, 0.1, 5));
  const auto ls = lines(monitor_csv(tr, 1));
  ASSERT_EQ(ls.size(), tr.monitors.size() + 1);
  EXPECT_EQ(ls[0], "time,constraint_deviation,re_tr1,im_tr1,re_tr2,im_tr2,re_tr3,im_tr3,re_c1,im_c1,re_c2,im_c2,re_c3,im_c3");
  for (const auto& l : ls) EXPECT_EQ(columns(l), 14u);

  const auto dir = std::filesystem::temp_directory_path() / "elliptop_csv_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "traj.csv").string();
  write_trajectory_csv(tr, path);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), trajectory_csv(tr));
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}
