#pragma once

// Command implementations behind the elliptop executable: each takes a validated RunConfig
// and returns a Report whose payload (everything but "meta") is deterministic.

#include <charconv>
#include <cmath>
#include <ctime>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynamics.hpp"
#include "identities.hpp"
#include "rmatrix.hpp"
#include "tops_models.hpp"

namespace elliptop::cli {

inline constexpr const char* version = "0.1.0";

// Bad flags, sizes or combinations: exit code 2.
struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline cplx parse_complex(const std::string& text) {
  static const std::string num = R"((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)";
  static const std::regex both("^([+-]?" + num + ")([+-]" + num + ")?i$");
  static const std::regex real_only("^([+-]?" + num + ")$");
  static const std::regex imag_only("^([+-]?" + num + ")?i$");
  static const std::regex unit_imag("^([+-]?" + num + ")([+-])i$");
  std::smatch m;
  if (std::regex_match(text, m, real_only)) return {std::stod(m[1]), 0.0};
  if (std::regex_match(text, m, unit_imag)) return {std::stod(m[1]), m[2] == "-" ? -1.0 : 1.0};
  if (std::regex_match(text, m, both) && m[2].matched) return {std::stod(m[1]), std::stod(m[2])};
  if (std::regex_match(text, m, imag_only)) {
    if (!m[1].matched) return {0.0, 1.0};
    const std::string s = m[1];
    if (s == "+" || s == "-") return {0.0, s == "-" ? -1.0 : 1.0};
    return {0.0, std::stod(s)};
  }
  throw usage_error("cannot parse complex number '" + text + "' (expected a+bi)");
}

// shortest round-trip form
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string format_complex(cplx z) {
  std::string im = format_double(z.imag());
  if (im.front() != '-') im = "+" + im;
  return format_double(z.real()) + im + "i";
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct RunConfig {
  int N = 2;
  int M = 1;
  int K = 0;  // 0: model default (2 for gaudin-lattice and coupled)
  std::string tau = "0.3+1.1i";
  std::string model;
  std::string reduction;  // empty: the model's natural one
  std::string role = "z";
  std::string eta = "0.17+0.05i";
  int samples = 0;  // 0: command default
  std::uint64_t seed = 42;
  std::optional<double> tol;
  double dt = 1e-3;
  double t_end = 1.0;
  int record_every = 10;
  std::string probes;  // comma-separated; empty: drawn from the seed
  std::string ids = "all";
  std::string checks = "all";
  std::string initial = "random";
  bool no_constraints = false;
  std::string output;
  std::string config;
  std::string csv;  // evolve: prefix of the trajectory/monitor CSV files

  EllipticParams elliptic() const {
    EllipticParams p;
    p.tau = parse_complex(tau);
    if (!(p.tau.imag() > 0.0)) throw usage_error("tau must have positive imaginary part");
    return p;
  }

  void validate_sizes() const {
    if (N < 1 || M < 1 || K < 0) throw usage_error("N, M must be positive and K non-negative");
    if (std::gcd(N, M) != 1) throw usage_error("N and M must be coprime");
    if (samples < 0) throw usage_error("samples must be non-negative");
  }
};

struct CheckResult {
  std::string check;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
  double tol = 0.0;
  bool pass = false;
  bool expected_fail = false;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

struct Report {
  std::string command;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::vector<CheckResult> results;
  std::string note;

  bool all_pass() const {
    for (const auto& r : results)
      if (!r.pass) return false;
    return true;
  }

  // the deterministic part
  nlohmann::ordered_json payload() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["params"] = params;
    j["seed"] = seed;
    j["results"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
      nlohmann::ordered_json e;
      e["check"] = r.check;
      e["max_abs_residual"] = r.max_abs_residual;
      e["max_rel_residual"] = r.max_rel_residual;
      e["tol"] = r.tol;
      e["pass"] = r.pass;
      e["expected_fail"] = r.expected_fail;
      for (auto it = r.extra.begin(); it != r.extra.end(); ++it) e[it.key()] = it.value();
      j["results"].push_back(e);
    }
    return j;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = payload();
    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    j["meta"] = {{"version", version}, {"timestamp", stamp}};
    if (!note.empty()) j["meta"]["note"] = note;
    return j;
  }
};

inline int exit_code(const Report& r) { return r.all_pass() ? 0 : 1; }

inline void write_report(const Report& r, const std::string& path) {
  elliptop::detail::write_atomic(path, r.to_json().dump(2) + "\n");
}

namespace detail {

inline nlohmann::ordered_json common_params(const RunConfig& c) {
  nlohmann::ordered_json p;
  p["N"] = c.N;
  p["M"] = c.M;
  p["tau"] = format_complex(c.elliptic().tau);
  return p;
}

inline ModelKind model_kind(const std::string& s) {
  try {
    return parse_model(s);
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
}

inline ModelSpec build_spec(const RunConfig& c, const std::string& model, int n, int m, int k, bool constrained) {
  const ModelKind kind = model_kind(model);
  int mm = kind == ModelKind::coupled || kind == ModelKind::matrix_top ? m : 1;
  int kk = k > 0 ? k : 2;
  ModelSpec s = ModelSpec::make(kind, n, mm, kk, parse_complex(c.eta));
  if (!c.reduction.empty()) {
    try {
      s.reduction = parse_reduction(c.reduction);
    } catch (const std::invalid_argument& e) {
      throw usage_error(e.what());
    }
  }
  if (!constrained) s.reduction = Reduction::none;
  if (c.role == "eta")
    s.role = SpectralRole::eta;
  else if (c.role != "z")
    throw usage_error("role must be z or eta");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
  return s;
}

// generic spectral points at least sample_guard away from the model's poles
inline std::vector<cplx> spectral_samples(const TopModel& model, std::mt19937_64& rng, int count) {
  std::vector<cplx> out;
  const cplx tau = model.elliptic().tau();
  for (int tries = 0; int(out.size()) < count; ++tries) {
    if (tries > sample_retries * count) throw error("could not draw spectral points away from the poles");
    const cplx z = sample_point(rng, tau);
    bool ok = true;
    for (const cplx& p : model.pole_set()) ok = ok && lattice_distance(z - p, tau) >= sample_guard;
    if (ok) out.push_back(z);
  }
  return out;
}

inline std::string model_label(const ModelSpec& s) {
  std::string l = to_string(s.kind) + ":N=" + std::to_string(s.N);
  if (s.kind == ModelKind::matrix_top || s.kind == ModelKind::coupled) l += ",M=" + std::to_string(s.M);
  if (s.kind == ModelKind::gaudin_lattice || s.kind == ModelKind::coupled) l += ",K=" + std::to_string(s.K);
  return l + ":" + to_string(s.reduction);
}

}  // namespace detail

// ---- identities -------------------------------------------------------------------------

inline Report run_identities(const RunConfig& c) {
  c.validate_sizes();
  const EllipticParams ep = c.elliptic();
  const int samples = c.samples > 0 ? c.samples : 20;
  const double tol = c.tol.value_or(1e-8);
  std::vector<std::string> ids;
  const bool all = c.ids == "all";
  if (all) {
    for (const auto& s : identity_registry())
      if (!(s.mixed && c.M < 2)) ids.push_back(s.id);
  } else {
    ids = split_list(c.ids);
    for (const auto& id : ids)
      if (std::find(identity_ids().begin(), identity_ids().end(), id) == identity_ids().end())
        throw usage_error("unknown identity id '" + id + "'");
  }
  if (ids.empty()) throw usage_error("no identities selected");

  Report r;
  r.command = "identities";
  r.params = detail::common_params(c);
  r.params["ids"] = ids;
  r.params["samples"] = samples;
  r.params["tol"] = tol;
  r.seed = c.seed;
  DressedFnParams p;
  p.N = c.N;
  p.M = c.M;
  p.elliptic = ep;
  for (const auto& id : ids) {
    VerificationReport v;
    try {
      v = verify_identity(id, p, samples, c.seed, tol);
    } catch (const unknown_identity& e) {
      throw usage_error(e.what());
    } catch (const std::invalid_argument& e) {
      throw usage_error(e.what());
    }
    CheckResult cr{id, v.max_abs_residual, v.max_rel_residual, tol, v.pass, false, {}};
    cr.extra["tuples"] = v.tuples;
    cr.extra["evaluations"] = v.evaluations;
    if (!v.note.empty()) {
      cr.extra["note"] = v.note;
      r.note += (r.note.empty() ? "" : " ") + id + ": " + v.note;
    }
    r.results.push_back(cr);
  }
  return r;
}

// ---- lax-check --------------------------------------------------------------------------

inline constexpr double negative_control_threshold = 1e-3;

inline CheckResult lax_entry(const ModelSpec& spec, const EllipticParams& ep, std::uint64_t seed, int samples,
                             double tol, bool negative) {
  const TopModel model(spec, ep);
  std::mt19937_64 rng(seed);
  const CoeffField s = model.random_field(rng);
  const auto points = detail::spectral_samples(model, rng, samples);
  const LaxResidual res = model.lax_residual(s, points, negative ? ConstraintPolicy::ignore : ConstraintPolicy::check);
  CheckResult cr;
  cr.check = "lax:" + detail::model_label(spec);
  cr.max_abs_residual = res.max_abs;
  cr.max_rel_residual = res.max_rel;
  cr.expected_fail = negative;
  cr.tol = negative ? negative_control_threshold : tol;
  // a negative control passes when the Lax equation visibly fails
  cr.pass = negative ? res.max_rel > negative_control_threshold : res.max_rel < tol;
  cr.extra["spectral_points"] = samples;
  return cr;
}

inline Report run_lax_check(const RunConfig& c) {
  c.validate_sizes();
  const EllipticParams ep = c.elliptic();
  const int samples = c.samples > 0 ? c.samples : 5;
  const double tol = c.tol.value_or(1e-8);
  Report r;
  r.command = "lax-check";
  r.params = detail::common_params(c);
  r.params["K"] = c.K;
  r.params["model"] = c.model.empty() ? "all" : c.model;
  r.params["reduction"] = c.reduction.empty() ? "natural" : c.reduction;
  r.params["role"] = c.role;
  r.params["eta"] = format_complex(parse_complex(c.eta));
  r.params["samples"] = samples;
  r.params["tol"] = tol;
  r.params["no_constraints"] = c.no_constraints;
  r.seed = c.seed;

  if (!c.model.empty()) {
    const ModelSpec spec = detail::build_spec(c, c.model, c.N, c.M, c.K, !c.no_constraints);
    // dropping the constraints of the coupled model is the documented negative control
    const bool negative = c.no_constraints && spec.kind == ModelKind::coupled;
    r.results.push_back(lax_entry(spec, ep, c.seed, samples, tol, negative));
    return r;
  }
  struct Case {
    const char* model;
    int n, m, k;
    bool constrained;
  };
  const Case suite[] = {{"nonrel-top", 2, 1, 1, true},     {"nonrel-top", 3, 1, 1, true},   {"rel-top", 2, 1, 1, true},
                        {"rel-top", 3, 1, 1, true},        {"matrix-top", 2, 3, 1, true},   {"gaudin-lattice", 3, 1, 2, true},
                        {"coupled", 2, 3, 2, true},        {"coupled", 2, 3, 2, false}};
  RunConfig base = c;
  base.reduction.clear();
  for (const auto& cs : suite) {
    const ModelSpec spec = detail::build_spec(base, cs.model, cs.n, cs.m, cs.k, cs.constrained);
    const bool negative = !cs.constrained;
    r.results.push_back(lax_entry(spec, ep, c.seed, samples, tol, negative));
  }
  return r;
}

// ---- evolve -----------------------------------------------------------------------------

struct EvolveOutput {
  Report report;
  Trajectory trajectory;
};

inline EvolveOutput run_evolve(const RunConfig& c) {
  c.validate_sizes();
  const EllipticParams ep = c.elliptic();
  if (c.model.empty()) throw usage_error("evolve needs --model");
  const ModelSpec spec = detail::build_spec(c, c.model, c.N, c.M, c.K, true);
  IntegratorConfig cfg;
  cfg.dt = c.dt;
  cfg.t_end = c.t_end;
  cfg.record_every = c.record_every;
  cfg.seed = c.seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
  const TopModel model(spec, ep);
  std::mt19937_64 rng(c.seed);
  CoeffField s0;
  if (c.initial == "random")
    s0 = desk_scale_field(model, rng);
  else if (c.initial == "zero")
    s0 = model.zeros();
  else
    throw usage_error("initial must be random or zero");
  if (c.probes.empty())
    cfg.spectral_probes = detail::spectral_samples(model, rng, 2);
  else
    for (const auto& p : split_list(c.probes)) cfg.spectral_probes.push_back(parse_complex(p));

  EvolveOutput out;
  out.trajectory = integrate(model, s0, cfg);
  const DriftSummary d = summarize(model, out.trajectory);

  Report& r = out.report;
  r.command = "evolve";
  r.params = detail::common_params(c);
  r.params["model"] = detail::model_label(spec);
  r.params["eta"] = format_complex(spec.coupling);
  r.params["dt"] = cfg.dt;
  r.params["t_end"] = cfg.t_end;
  r.params["steps"] = cfg.steps();
  r.params["record_every"] = cfg.record_every;
  r.params["initial"] = c.initial;
  std::vector<std::string> probes;
  for (const cplx& p : cfg.spectral_probes) probes.push_back(format_complex(p));
  r.params["probes"] = probes;
  r.seed = c.seed;
  auto add = [&](const std::string& name, double v, double tol) {
    r.results.push_back({name, v, v, tol, v < tol, false, {}});
  };
  if (is_scalar_top(spec)) {
    add("eigenvalue_drift", d.eigenvalue, c.tol.value_or(1e-8));
    add("trace_S_drift", d.trace_S, 1e-12);
  }
  add("trace_power_drift", d.trace_power, c.tol.value_or(1e-6));
  add("charpoly_drift", d.charpoly, c.tol.value_or(1e-6));
  if (spec.reduction != Reduction::none) {
    add("constraint_drift", d.constraint, 1e-8);
    r.results.back().extra["initial_deviation"] = d.initial_constraint;
  }
  return out;
}

// ---- rmatrix ----------------------------------------------------------------------------

inline const std::vector<std::string>& rmatrix_check_names() {
  static const std::vector<std::string> names{"aybe",          "unitarity",     "fourier-swap", "classical-limit",
                                              "lax-from-r",    "sym-aybe",      "sym-unitarity", "sublattice",
                                              "rational-aybe"};
  return names;
}

// slope of log ||R^h - 1/h - r - h m|| against log h over h = 2^-3 .. 2^-10
inline double classical_limit_slope(int n, cplx z, const Elliptic& e) {
  std::vector<double> xs, ys;
  const ClassicalExpansion ce = classical_expansion(z, n, e);
  const Matrix one = Matrix::Identity(n * n, n * n);
  for (int k = 3; k <= 10; ++k) {
    const double h = std::ldexp(1.0, -k);
    const Matrix d = belavin_R(z, h, n, e).entries - one / h - ce.r - h * ce.m;
    xs.push_back(std::log(h));
    ys.push_back(std::log(d.norm()));
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

// lax_from_R against N L of the relativistic top, m_from_r against N (M - E1(z) S_0)
inline Residual lax_from_r_residual(const CoeffField& s, cplx z, cplx eta, const Elliptic& e) {
  ModelSpec spec = ModelSpec::make(ModelKind::rel_top, s.n, 1, 1, eta);
  const TopModel model(spec, e);
  const double n = s.n;
  const Residual a = residual(lax_from_R(s, z, eta, e), n * model.lax_L(s, z));
  const Matrix m_ref = n * (model.lax_M(s, z) - e.E1(z) * s.s(LatticeIndex(s.n, 0, 0)) * Matrix::Identity(s.n, s.n));
  const Residual b = residual(m_from_r(s, z, e), m_ref);
  return {std::max(a.abs, b.abs), std::max(a.rel, b.rel)};
}

inline Report run_rmatrix(const RunConfig& c) {
  c.validate_sizes();
  const EllipticParams ep = c.elliptic();
  const int samples = c.samples > 0 ? c.samples : 3;
  std::vector<std::string> checks;
  if (c.checks == "all") {
    checks = {"aybe", "unitarity", "fourier-swap", "classical-limit", "lax-from-r"};
    if (c.M > 1) checks.insert(checks.end(), {"sym-aybe", "sym-unitarity", "sublattice", "rational-aybe"});
  } else {
    checks = split_list(c.checks);
    for (const auto& ch : checks)
      if (std::find(rmatrix_check_names().begin(), rmatrix_check_names().end(), ch) == rmatrix_check_names().end())
        throw usage_error("unknown rmatrix check '" + ch + "'");
  }
  Report r;
  r.command = "rmatrix";
  r.params = detail::common_params(c);
  r.params["checks"] = checks;
  r.params["samples"] = samples;
  r.seed = c.seed;

  EllipticParams guarded = ep;
  guarded.pole_guard = std::max(guarded.pole_guard, sample_guard);
  const Elliptic e(guarded);
  const Elliptic e_small(ep);  // the classical expansion needs hbar far below the sampling guard
  const int n = c.N, m = c.M;
  const std::map<std::string, double> default_tol{{"aybe", 1e-9},        {"unitarity", 1e-9},     {"fourier-swap", 1e-10},
                                                  {"classical-limit", 0.1}, {"lax-from-r", 1e-9}, {"sym-aybe", 1e-8},
                                                  {"sym-unitarity", 1e-8}, {"sublattice", 1e-9},  {"rational-aybe", 1e-8}};
  for (const auto& ch : checks) {
    const double tol = c.tol.value_or(default_tol.at(ch));
    CheckResult cr;
    cr.check = ch;
    cr.tol = tol;
    std::vector<Residual> per(samples);
    // each sample owns its generator, so the result does not depend on scheduling
    parallel_for(std::size_t(samples), [&](std::size_t i) {
      std::seed_seq seq{std::uint32_t(c.seed), std::uint32_t(c.seed >> 32), std::uint32_t(i)};
      std::mt19937_64 rng(seq);
      for (int attempt = 0;; ++attempt) {
        auto pt = [&] { return sample_point(rng, e.tau()); };
        try {
          Residual res;
          if (ch == "aybe") {
            const cplx z1 = pt(), z2 = pt(), z3 = pt(), h = pt(), eta = pt();
            res = check_aybe_belavin(n, z1, z2, z3, h, eta, e);
          } else if (ch == "unitarity") {
            const cplx z = pt(), h = pt();
            res = check_unitarity_belavin(n, z, h, e);
          } else if (ch == "fourier-swap") {
            const cplx z = pt(), h = pt();
            res = check_fourier_swap(n, z, h, e);
          } else if (ch == "classical-limit") {
            const double slope = classical_limit_slope(n, pt(), e_small);
            res = {std::abs(slope - 2.0), std::abs(slope - 2.0)};
          } else if (ch == "lax-from-r") {
            const TopModel top(ModelSpec::make(ModelKind::rel_top, n, 1, 1, 0.1), e);
            const CoeffField s = top.random_field(rng);
            const cplx z = pt(), eta = pt();
            res = lax_from_r_residual(s, z, eta, e);
          } else if (ch == "sym-aybe" || ch == "rational-aybe") {
            const std::array<cplx, 3> zs{pt(), pt(), pt()}, hs{pt(), pt(), pt()};
            FourLegBuilder b;
            if (ch == "sym-aybe")
              b = [&](cplx z, cplx h) { return symmetric_R(z, h, n, m, e).entries; };
            else
              b = [&](cplx z, cplx h) { return rational_symmetric_R(z, h, n, m).entries; };
            res = check_aybe_symmetric(n, m, zs, hs, b);
          } else if (ch == "sym-unitarity") {
            const cplx z = pt(), h = pt();
            res = check_unitarity_symmetric(n, m, z, h, e);
          } else if (ch == "sublattice") {
            const cplx z = pt(), h = pt();
            const auto [a, b] = check_sublattice(n, m, z, h, e);
            res = {std::max(a.abs, b.abs), std::max(a.rel, b.rel)};
          }
          per[i] = res;
          return;
        } catch (const pole_proximity_error&) {
          if (attempt + 1 >= sample_retries) throw;
        }
      }
    });
    for (const auto& p : per) {
      cr.max_abs_residual = std::max(cr.max_abs_residual, p.abs);
      cr.max_rel_residual = std::max(cr.max_rel_residual, p.rel);
    }
    cr.pass = cr.max_rel_residual < tol;
    r.results.push_back(cr);
  }
  return r;
}

}  // namespace elliptop::cli
