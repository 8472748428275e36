#pragma once

// Fixed-step RK4 flow of the top models with conserved-quantity monitors and CSV export.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "parallel.hpp"
#include "tops_models.hpp"

namespace elliptop {

struct IntegratorConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  int record_every = 1;
  std::vector<cplx> spectral_probes;
  std::uint64_t seed = 0;

  long steps() const { return std::max(1L, std::lround(t_end / dt)); }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be positive");
    if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  }
};

// Flow aborted: non-finite state. Carries the last state that was still finite.
struct integration_error : error {
  double last_good_time;
  CoeffField last_good_state;
  integration_error(double t, CoeffField s)
      : error("integration produced a non-finite state after t = " + std::to_string(t)),
        last_good_time(t),
        last_good_state(std::move(s)) {}
};

struct ProbeMonitor {
  cplx probe;
  std::vector<cplx> traces;   // tr L(probe)^k, k = 1..kmax
  std::vector<cplx> charpoly;  // det(lambda - L) = lambda^n + c[0] lambda^{n-1} + ... + c[n-1]
};

struct Monitor {
  std::vector<cplx> eigenvalues;  // of reconstruct(S); scalar tops only
  std::vector<ProbeMonitor> probes;
  double constraint_deviation = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<CoeffField> states;
  std::vector<Monitor> monitors;
};

inline bool is_scalar_top(const ModelSpec& s) {
  return s.kind == ModelKind::nonrel_top || s.kind == ModelKind::rel_top;
}

// Largest inverse-inertia (and coupled offset) magnitude: the eom is quadratic with these
// weights, so 1/(rate * ||S||) sets the time scale of the flow.
inline double characteristic_rate(const TopModel& model) {
  double r = 1.0;
  for (const cplx& j : model.J()) r = std::max(r, std::abs(j));
  for (const cplx& c : model.offset_coefficients()) r = std::max(r, std::abs(c));
  return r;
}

// Random admissible field normalized to ||S|| = 1/characteristic_rate, so that unit time
// covers about one characteristic time of the flow.
inline CoeffField desk_scale_field(const TopModel& model, std::mt19937_64& rng) {
  CoeffField s = model.random_field(rng);
  const double nrm = s.norm();
  if (nrm > 0.0) s *= cplx(1.0 / (nrm * characteristic_rate(model)));
  return s;
}

inline bool finite(const CoeffField& s) {
  for (const auto& v : s.values)
    if (!v.allFinite()) return false;
  return true;
}

// Newton identities: power sums p_1..p_n to the characteristic coefficients
inline std::vector<cplx> charpoly_from_traces(const std::vector<cplx>& p) {
  const std::size_t n = p.size();
  std::vector<cplx> e(n + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    cplx acc = 0.0;
    for (std::size_t i = 1; i <= k; ++i) acc += ((i % 2 == 1) ? 1.0 : -1.0) * e[k - i] * p[i - 1];
    e[k] = acc / double(k);
  }
  std::vector<cplx> c(n);
  for (std::size_t k = 1; k <= n; ++k) c[k - 1] = ((k % 2 == 1) ? -1.0 : 1.0) * e[k];
  return c;
}

inline void guard_probes(const TopModel& model, const std::vector<cplx>& probes) {
  const auto& p = model.elliptic().params();
  for (const cplx& z : probes)
    for (const cplx& pole : model.pole_set()) {
      const double d = lattice_distance(z - pole, p.tau);
      if (d < p.pole_guard) throw pole_proximity_error("spectral probe", z, d);
    }
}

struct SpectralTable {
  std::vector<ProbeMonitor> rows;
};

inline SpectralTable spectral_invariants(const TopModel& model, const CoeffField& s, const std::vector<cplx>& probes,
                                         int kmax) {
  guard_probes(model, probes);
  const int n = model.spec().lax_size();
  SpectralTable out;
  out.rows.resize(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Matrix l = model.lax_L(s, probes[i]);
    ProbeMonitor& row = out.rows[i];
    row.probe = probes[i];
    Matrix pw = l;
    std::vector<cplx> power;
    for (int k = 1; k <= std::max(kmax, n); ++k) {
      power.push_back(pw.trace());
      pw = pw * l;
    }
    row.traces.assign(power.begin(), power.begin() + kmax);
    row.charpoly = charpoly_from_traces(std::vector<cplx>(power.begin(), power.begin() + n));
  }
  return out;
}

inline Monitor measure(const TopModel& model, const CoeffField& s, const std::vector<cplx>& probes) {
  Monitor m;
  if (is_scalar_top(model.spec())) {
    Eigen::ComplexEigenSolver<Matrix> es(reconstruct(s), false);
    const auto& ev = es.eigenvalues();
    m.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  }
  m.probes = spectral_invariants(model, s, probes, model.spec().lax_size()).rows;
  m.constraint_deviation = model.constraint_deviation(s);
  return m;
}

using FlowField = std::function<CoeffField(const CoeffField&)>;

// Classical RK4 with real time for an arbitrary vector field; monitors use the model.
inline Trajectory integrate_flow(const TopModel& model, const FlowField& f, const CoeffField& s0,
                                 const IntegratorConfig& cfg) {
  cfg.validate();
  guard_probes(model, cfg.spectral_probes);
  const long steps = cfg.steps();
  const double dt = cfg.dt;

  Trajectory tr;
  tr.times.push_back(0.0);
  tr.states.push_back(s0);
  CoeffField s = s0;
  for (long i = 1; i <= steps; ++i) {
    const CoeffField k1 = f(s);
    const CoeffField k2 = f(s + cplx(0.5 * dt) * k1);
    const CoeffField k3 = f(s + cplx(0.5 * dt) * k2);
    const CoeffField k4 = f(s + cplx(dt) * k3);
    CoeffField next = s + cplx(dt / 6.0) * (k1 + cplx(2.0) * k2 + cplx(2.0) * k3 + k4);
    if (!finite(next)) throw integration_error(double(i - 1) * dt, s);
    s = std::move(next);
    if (i % cfg.record_every == 0 || i == steps) {
      tr.times.push_back(double(i) * dt);
      tr.states.push_back(s);
    }
  }
  tr.monitors.resize(tr.states.size());
  parallel_for(tr.states.size(), [&](std::size_t i) { tr.monitors[i] = measure(model, tr.states[i], cfg.spectral_probes); });
  return tr;
}

// The model's flow. Constraints are not re-projected; their drift is monitored.
inline Trajectory integrate(const TopModel& model, const CoeffField& s0, const IntegratorConfig& cfg) {
  return integrate_flow(
      model, [&](const CoeffField& s) { return model.eom(s, ConstraintPolicy::ignore); }, s0, cfg);
}

inline std::vector<double> constraint_drift(const TopModel& model, const Trajectory& tr) {
  std::vector<double> out(tr.states.size());
  for (std::size_t i = 0; i < tr.states.size(); ++i) out[i] = model.constraint_deviation(tr.states[i]);
  return out;
}

// min over pairings of the max distance between two eigenvalue lists (exhaustive for small sizes)
inline double spectrum_distance(std::vector<cplx> a, const std::vector<cplx>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("spectra of different sizes");
  if (a.empty()) return 0.0;
  if (a.size() <= 8) {
    std::vector<int> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
      double w = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[perm[i]] - b[i]));
      best = std::min(best, w);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  double w = 0.0;
  for (const cplx& y : b) {
    auto it = std::min_element(a.begin(), a.end(), [&](cplx p, cplx q) { return std::abs(p - y) < std::abs(q - y); });
    w = std::max(w, std::abs(*it - y));
    a.erase(it);
  }
  return w;
}

// Drifts are made scale free: eigenvalues by ||reconstruct(S(0))||, tr L^k and the k-th
// characteristic coefficient by ||L(0)||^k at the same probe (a zero scale leaves them absolute).
struct DriftSummary {
  double eigenvalue = 0.0;  // reconstruct(S) spectrum, scalar tops
  double trace_power = 0.0;  // tr L^k over all probes and k
  double charpoly = 0.0;
  double trace_S = 0.0;  // tr reconstruct(S), absolute
  double constraint = 0.0;  // max deviation along the trajectory
  double initial_constraint = 0.0;
};

inline DriftSummary summarize(const TopModel& model, const Trajectory& tr) {
  DriftSummary d;
  if (tr.monitors.empty()) return d;
  auto scaled = [](double x, double scale) { return scale > 0.0 ? x / scale : x; };
  const Monitor& m0 = tr.monitors.front();
  d.initial_constraint = m0.constraint_deviation;
  const bool scalar = is_scalar_top(model.spec());
  const Matrix s0 = scalar ? reconstruct(tr.states.front()) : Matrix();
  const cplx tr0 = scalar ? s0.trace() : cplx(0.0);
  const double eig_scale = scalar ? s0.norm() : 0.0;
  std::vector<double> lnorm0;
  for (const auto& p : m0.probes) lnorm0.push_back(model.lax_L(tr.states.front(), p.probe).norm());
  for (std::size_t i = 0; i < tr.monitors.size(); ++i) {
    const Monitor& m = tr.monitors[i];
    d.constraint = std::max(d.constraint, m.constraint_deviation);
    if (scalar) {
      d.eigenvalue = std::max(d.eigenvalue, scaled(spectrum_distance(m.eigenvalues, m0.eigenvalues), eig_scale));
      d.trace_S = std::max(d.trace_S, std::abs(reconstruct(tr.states[i]).trace() - tr0));
    }
    for (std::size_t p = 0; p < m.probes.size(); ++p) {
      double pw = 1.0;
      for (std::size_t k = 0; k < m.probes[p].traces.size(); ++k) {
        pw *= lnorm0[p];
        d.trace_power = std::max(d.trace_power, scaled(std::abs(m.probes[p].traces[k] - m0.probes[p].traces[k]), pw));
      }
      pw = 1.0;
      for (std::size_t k = 0; k < m.probes[p].charpoly.size(); ++k) {
        pw *= lnorm0[p];
        d.charpoly = std::max(d.charpoly, scaled(std::abs(m.probes[p].charpoly[k] - m0.probes[p].charpoly[k]), pw));
      }
    }
  }
  return d;
}

namespace detail {
inline void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

inline std::string fmt_double(double x) {
  std::ostringstream o;
  o << std::setprecision(17) << x;
  return o.str();
}
}  // namespace detail

// time, then Re/Im of every coefficient: lattice entries in storage order, each K x K block row-major
inline std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream o;
  if (tr.states.empty()) return "time\n";
  const CoeffField& s0 = tr.states.front();
  o << "time";
  for (std::size_t l = 0; l < s0.size(); ++l)
    for (int i = 0; i < s0.k; ++i)
      for (int j = 0; j < s0.k; ++j) o << ",re_" << l << '_' << i << '_' << j << ",im_" << l << '_' << i << '_' << j;
  o << '\n';
  for (std::size_t t = 0; t < tr.states.size(); ++t) {
    o << detail::fmt_double(tr.times[t]);
    for (const auto& v : tr.states[t].values)
      for (int i = 0; i < v.rows(); ++i)
        for (int j = 0; j < v.cols(); ++j)
          o << ',' << detail::fmt_double(v(i, j).real()) << ',' << detail::fmt_double(v(i, j).imag());
    o << '\n';
  }
  return o.str();
}

// one row per snapshot: time, constraint deviation, Re/Im tr L^k, Re/Im characteristic coefficients
inline std::string monitor_csv(const Trajectory& tr, std::size_t probe) {
  std::ostringstream o;
  o << "time,constraint_deviation";
  if (tr.monitors.empty() || probe >= tr.monitors.front().probes.size()) return o.str() + "\n";
  const ProbeMonitor& p0 = tr.monitors.front().probes[probe];
  for (std::size_t k = 0; k < p0.traces.size(); ++k) o << ",re_tr" << k + 1 << ",im_tr" << k + 1;
  for (std::size_t k = 0; k < p0.charpoly.size(); ++k) o << ",re_c" << k + 1 << ",im_c" << k + 1;
  o << '\n';
  for (std::size_t t = 0; t < tr.monitors.size(); ++t) {
    const ProbeMonitor& p = tr.monitors[t].probes[probe];
    o << detail::fmt_double(tr.times[t]) << ',' << detail::fmt_double(tr.monitors[t].constraint_deviation);
    for (const cplx& c : p.traces) o << ',' << detail::fmt_double(c.real()) << ',' << detail::fmt_double(c.imag());
    for (const cplx& c : p.charpoly) o << ',' << detail::fmt_double(c.real()) << ',' << detail::fmt_double(c.imag());
    o << '\n';
  }
  return o.str();
}

inline void write_trajectory_csv(const Trajectory& tr, const std::string& path) {
  detail::write_atomic(path, trajectory_csv(tr));
}

inline void write_monitor_csv(const Trajectory& tr, std::size_t probe, const std::string& path) {
  detail::write_atomic(path, monitor_csv(tr, probe));
}

}  // namespace elliptop
