#include "ubound/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ubound/errors.hpp"

namespace ubound {

using nlohmann::json;

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::AntiPeriodic: return "antiperiodic";
    case ExperimentKind::Verify: return "verify";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  if (name == "simulate") return ExperimentKind::Simulate;
  if (name == "sweep") return ExperimentKind::Sweep;
  if (name == "antiperiodic") return ExperimentKind::AntiPeriodic;
  if (name == "verify") return ExperimentKind::Verify;
  throw ValidationError("unknown experiment '" + std::string(name) + "'");
}

namespace {

std::string_view to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::Rest: return "rest";
    case InitialKind::Static: return "static";
    case InitialKind::Given: return "given";
  }
  return "?";
}

InitialKind initial_kind_from_string(std::string_view name) {
  if (name == "rest") return InitialKind::Rest;
  if (name == "static") return InitialKind::Static;
  if (name == "given") return InitialKind::Given;
  throw ValidationError("unknown initial state kind '" + std::string(name) + "'");
}

ForcingKind forcing_kind_from_string(std::string_view name) {
  for (ForcingKind k : {ForcingKind::Zero, ForcingKind::ConstantModal, ForcingKind::Sinusoidal, ForcingKind::PowerOfSine,
                        ForcingKind::Sampled, ForcingKind::Sum})
    if (name == to_string(k)) return k;
  throw ValidationError("unknown forcing kind '" + std::string(name) + "'");
}

std::string_view to_string(JacobianMode mode) {
  return mode == JacobianMode::FiniteDifference ? "FiniteDifference" : "PicardOnly";
}

JacobianMode jacobian_mode_from_string(std::string_view name) {
  if (name == "FiniteDifference") return JacobianMode::FiniteDifference;
  if (name == "PicardOnly") return JacobianMode::PicardOnly;
  throw ValidationError("unknown jacobian mode '" + std::string(name) + "'");
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ValidationError(path + ": " + msg); }

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path.empty() ? "config" : path, "expected an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto k : keys) known = known || key == k;
    if (!known) fail(join(path, key), "unknown field");
  }
}

template <class F>
void opt(const json& j, const std::string& path, const char* key, F&& f) {
  if (auto it = j.find(key); it != j.end()) f(*it, join(path, key));
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

ModalVector modal(const json& j, const std::string& path, int n) {
  const auto xs = numbers(j, path);
  if (static_cast<int>(xs.size()) != n) fail(path, "expected " + std::to_string(n) + " coefficients");
  return Eigen::Map<const Eigen::VectorXd>(xs.data(), n);
}

std::vector<double> to_vector(const ModalVector& m) { return {m.data(), m.data() + m.size()}; }

// Parses an enum name, attaching the path to the error.
template <class Parse>
auto enum_of(const json& j, const std::string& path, Parse&& parse) {
  const std::string name = text(j, path);
  try {
    return parse(name);
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

template <class Fn>
void with_path(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

OperatorSpec parse_operator(const json& j) {
  const std::string p = "operator";
  require_object(j, p);
  allow_keys(j, p, {"kind", "num_modes", "length", "lambda", "num_quad"});
  OperatorSpec spec;
  opt(j, p, "kind", [&](const json& x, const std::string& q) { spec.kind = enum_of(x, q, operator_kind_from_string); });
  opt(j, p, "num_modes", [&](const json& x, const std::string& q) {
    spec.num_modes = integer(x, q);
    if (spec.num_modes < 1) fail(q, "must be >= 1");
  });
  opt(j, p, "length", [&](const json& x, const std::string& q) {
    spec.length = number(x, q);
    if (!(spec.length > 0.0)) fail(q, "must be positive");
  });
  opt(j, p, "lambda", [&](const json& x, const std::string& q) {
    if (!x.is_null()) spec.lambda = numbers(x, q);
  });
  opt(j, p, "num_quad", [&](const json& x, const std::string& q) {
    if (!x.is_null()) spec.num_quad = integer(x, q);
  });
  if (spec.kind == OperatorKind::Abstract) {
    if (!spec.lambda) fail("operator.lambda", "required for Abstract operators");
    if (static_cast<int>(spec.lambda->size()) != spec.num_modes)
      fail("operator.lambda", "expected " + std::to_string(spec.num_modes) + " eigenvalues");
  } else if (spec.lambda) {
    fail("operator.lambda", "only allowed for Abstract operators");
  }
  with_path(p, [&] { build_operator(spec); });
  return spec;
}

DampingTerm parse_term(const json& j, const std::string& p) {
  require_object(j, p);
  allow_keys(j, p, {"family", "c", "alpha"});
  DampingTerm t;
  opt(j, p, "family", [&](const json& x, const std::string& q) { t.family = enum_of(x, q, damping_family_from_string); });
  opt(j, p, "c", [&](const json& x, const std::string& q) {
    t.c = number(x, q);
    if (!(t.c > 0.0)) fail(q, "must be positive");
  });
  opt(j, p, "alpha", [&](const json& x, const std::string& q) {
    t.alpha = number(x, q);
    if (!(t.alpha >= 0.0)) fail(q, "must be >= 0");
  });
  if (t.family == DampingFamily::LinearViscous && t.alpha != 0.0) fail(join(p, "alpha"), "LinearViscous needs alpha = 0");
  return t;
}

std::vector<DampingTerm> parse_damping(const json& j) {
  const std::string p = "damping";
  require_object(j, p);
  if (j.contains("terms")) {
    allow_keys(j, p, {"terms"});
    const json& terms = j.at("terms");
    if (!terms.is_array() || terms.empty()) fail("damping.terms", "expected a non-empty array");
    std::vector<DampingTerm> out;
    for (std::size_t i = 0; i < terms.size(); ++i)
      out.push_back(parse_term(terms[i], "damping.terms[" + std::to_string(i) + "]"));
    return out;
  }
  return {parse_term(j, p)};
}

ForcingSpec parse_forcing(const json& j, const std::string& p, const SpectralOperator& op) {
  require_object(j, p);
  allow_keys(j, p, {"kind", "profile", "mode", "amplitude", "omega", "phase", "beta", "antiperiod", "csv", "parts"});
  ForcingSpec spec;
  const int n = op.num_modes();
  opt(j, p, "kind", [&](const json& x, const std::string& q) { spec.kind = enum_of(x, q, forcing_kind_from_string); });
  if (j.contains("profile") && j.contains("mode")) fail(join(p, "mode"), "give either profile or mode");
  spec.profile = op.unit(1);
  opt(j, p, "mode", [&](const json& x, const std::string& q) {
    const int k = integer(x, q);
    if (k < 1 || k > n) fail(q, "must lie in 1.." + std::to_string(n));
    spec.profile = op.unit(k);
  });
  opt(j, p, "profile", [&](const json& x, const std::string& q) { spec.profile = modal(x, q, n); });
  opt(j, p, "amplitude", [&](const json& x, const std::string& q) { spec.amplitude = number(x, q); });
  // Default frequency: sqrt(lambda_1) times the golden ratio, away from every resonance.
  spec.omega = spec.kind == ForcingKind::PowerOfSine ? std::sqrt(op.lambda()[0])
                                                     : std::sqrt(op.lambda()[0]) * std::numbers::phi;
  opt(j, p, "omega", [&](const json& x, const std::string& q) {
    spec.omega = number(x, q);
    if (!(spec.omega > 0.0)) fail(q, "must be positive");
  });
  opt(j, p, "phase", [&](const json& x, const std::string& q) { spec.phase = number(x, q); });
  opt(j, p, "beta", [&](const json& x, const std::string& q) {
    spec.beta = number(x, q);
    if (!(spec.beta >= 0.0)) fail(q, "must be >= 0");
  });
  opt(j, p, "antiperiod", [&](const json& x, const std::string& q) {
    if (x.is_null()) return;
    spec.antiperiod = number(x, q);
    if (!(*spec.antiperiod > 0.0)) fail(q, "must be positive");
  });
  opt(j, p, "csv", [&](const json& x, const std::string& q) { spec.csv = text(x, q); });
  if (spec.kind == ForcingKind::Sampled && spec.csv.empty()) fail(join(p, "csv"), "required for Sampled forcing");
  opt(j, p, "parts", [&](const json& x, const std::string& q) {
    if (!x.is_array()) fail(q, "expected an array");
    for (std::size_t i = 0; i < x.size(); ++i)
      spec.parts.push_back(parse_forcing(x[i], q + "[" + std::to_string(i) + "]", op));
  });
  if (spec.kind == ForcingKind::Sum && spec.parts.empty()) fail(join(p, "parts"), "required for Sum forcing");
  if (spec.kind != ForcingKind::Sum && !spec.parts.empty()) fail(join(p, "parts"), "only allowed for Sum forcing");
  with_path(p, [&] { build_forcing(spec, n); });
  return spec;
}

json forcing_json(const ForcingSpec& s) {
  json j;
  j["kind"] = std::string(to_string(s.kind));
  j["profile"] = to_vector(s.profile);
  j["amplitude"] = s.amplitude;
  j["omega"] = s.omega;
  j["phase"] = s.phase;
  j["beta"] = s.beta;
  j["antiperiod"] = s.antiperiod ? json(*s.antiperiod) : json(nullptr);
  if (s.kind == ForcingKind::Sampled) j["csv"] = s.csv;
  if (s.kind == ForcingKind::Sum) {
    j["parts"] = json::array();
    for (const auto& part : s.parts) j["parts"].push_back(forcing_json(part));
  }
  return j;
}

std::vector<double> geometric(int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(std::ldexp(1.0, i));
  return out;
}

}  // namespace

SpectralOperator build_operator(const OperatorSpec& spec) {
  return SpectralOperator(spec.kind, spec.num_modes, spec.length, spec.lambda, spec.num_quad);
}

DampingOp build_damping(const ExperimentConfig& cfg) { return DampingOp(cfg.damping); }

ForcingSignal build_forcing(const ForcingSpec& spec, int num_modes) {
  ForcingSignal h = ForcingSignal::zero(num_modes);
  switch (spec.kind) {
    case ForcingKind::Zero: break;
    case ForcingKind::ConstantModal: h = ForcingSignal::constant(spec.amplitude * spec.profile); break;
    case ForcingKind::Sinusoidal:
      h = ForcingSignal::sinusoidal(spec.profile, spec.amplitude, spec.omega, spec.phase);
      break;
    case ForcingKind::PowerOfSine:
      h = ForcingSignal::power_of_sine(spec.profile, spec.amplitude, spec.omega, spec.beta);
      break;
    case ForcingKind::Sampled: h = load_sampled_csv(spec.csv, num_modes).scaled(spec.amplitude); break;
    case ForcingKind::Sum: {
      std::vector<ForcingSignal> parts;
      for (const auto& part : spec.parts) parts.push_back(build_forcing(part, num_modes));
      h = ForcingSignal::sum(std::move(parts)).scaled(spec.amplitude);
      break;
    }
  }
  return spec.antiperiod ? h.with_antiperiod(*spec.antiperiod) : h;
}

ExperimentConfig parse_config(const json& j) {
  require_object(j, "");
  allow_keys(j, "", {"experiment", "operator", "damping", "forcing", "oracle_family", "oracle_mode", "initial",
                     "amplitudes", "norm_kind", "check_exponents", "stepper", "bound", "shooting", "simulate",
                     "properties", "seed", "output_dir"});
  ExperimentConfig cfg;
  opt(j, "", "experiment",
      [&](const json& x, const std::string& q) { cfg.experiment = enum_of(x, q, experiment_kind_from_string); });
  opt(j, "", "operator", [&](const json& x, const std::string&) { cfg.op = parse_operator(x); });
  const SpectralOperator op = build_operator(cfg.op);
  const int n = op.num_modes();
  opt(j, "", "damping", [&](const json& x, const std::string&) { cfg.damping = parse_damping(x); });

  if (j.contains("forcing")) {
    cfg.forcing = parse_forcing(j.at("forcing"), "forcing", op);
  } else {
    cfg.forcing.profile = op.unit(1);
    cfg.forcing.omega = std::sqrt(op.lambda()[0]) * std::numbers::phi;
  }
  opt(j, "", "oracle_family", [&](const json& x, const std::string& q) { cfg.oracle_family = boolean(x, q); });
  opt(j, "", "oracle_mode", [&](const json& x, const std::string& q) {
    cfg.oracle_mode = integer(x, q);
    if (cfg.oracle_mode < 1 || cfg.oracle_mode > n) fail(q, "must lie in 1.." + std::to_string(n));
  });

  cfg.initial.u0 = op.zero();
  cfg.initial.v0 = op.zero();
  opt(j, "", "initial", [&](const json& x, const std::string& p) {
    require_object(x, p);
    allow_keys(x, p, {"kind", "u0", "v0"});
    opt(x, p, "kind", [&](const json& y, const std::string& q) { cfg.initial.kind = enum_of(y, q, initial_kind_from_string); });
    opt(x, p, "u0", [&](const json& y, const std::string& q) { cfg.initial.u0 = modal(y, q, n); });
    opt(x, p, "v0", [&](const json& y, const std::string& q) { cfg.initial.v0 = modal(y, q, n); });
  });

  if (cfg.experiment == ExperimentKind::Sweep) cfg.amplitudes = geometric(10);
  if (cfg.experiment == ExperimentKind::AntiPeriodic) cfg.amplitudes = geometric(8);
  opt(j, "", "amplitudes", [&](const json& x, const std::string& q) {
    cfg.amplitudes = numbers(x, q);
    for (std::size_t i = 0; i < cfg.amplitudes.size(); ++i)
      if (!(cfg.amplitudes[i] > 0.0)) fail(q + "[" + std::to_string(i) + "]", "must be positive");
  });
  if ((cfg.experiment == ExperimentKind::Sweep || cfg.experiment == ExperimentKind::AntiPeriodic) &&
      cfg.amplitudes.size() < 4)
    fail("amplitudes", "a sweep needs at least 4 amplitudes");

  cfg.norm_kind = cfg.experiment == ExperimentKind::AntiPeriodic ? NormKind::L2period : NormKind::S2;
  opt(j, "", "norm_kind", [&](const json& x, const std::string& q) { cfg.norm_kind = enum_of(x, q, norm_kind_from_string); });
  if (cfg.experiment == ExperimentKind::AntiPeriodic && cfg.norm_kind == NormKind::S2)
    fail("norm_kind", "anti-periodic sweeps use Linf or L2period");
  opt(j, "", "check_exponents", [&](const json& x, const std::string& q) {
    cfg.check_exponents = numbers(x, q);
    for (std::size_t i = 0; i < cfg.check_exponents.size(); ++i)
      if (!(cfg.check_exponents[i] > 0.0)) fail(q + "[" + std::to_string(i) + "]", "must be positive");
  });

  cfg.stepper.dt = default_dt(op);
  opt(j, "", "stepper", [&](const json& x, const std::string& p) {
    require_object(x, p);
    allow_keys(x, p, {"dt", "scheme", "newton_tol", "newton_max_iter", "fallback"});
    opt(x, p, "dt", [&](const json& y, const std::string& q) { cfg.stepper.dt = number(y, q); });
    opt(x, p, "scheme", [&](const json& y, const std::string& q) { cfg.stepper.scheme = enum_of(y, q, scheme_from_string); });
    opt(x, p, "newton_tol", [&](const json& y, const std::string& q) { cfg.stepper.newton_tol = number(y, q); });
    opt(x, p, "newton_max_iter", [&](const json& y, const std::string& q) { cfg.stepper.newton_max_iter = integer(y, q); });
    opt(x, p, "fallback", [&](const json& y, const std::string& q) { cfg.stepper.fallback = enum_of(y, q, fallback_from_string); });
  });
  cfg.stepper.validate();

  opt(j, "", "bound", [&](const json& x, const std::string& p) {
    require_object(x, p);
    allow_keys(x, p, {"T_total", "burn_in_fraction", "window_count", "window_agreement_tol", "dt_refinement_tol",
                      "absolute_floor", "refine"});
    auto& b = cfg.bound;
    opt(x, p, "T_total", [&](const json& y, const std::string& q) { b.T_total = number(y, q); });
    opt(x, p, "burn_in_fraction", [&](const json& y, const std::string& q) { b.burn_in_fraction = number(y, q); });
    opt(x, p, "window_count", [&](const json& y, const std::string& q) { b.window_count = integer(y, q); });
    opt(x, p, "window_agreement_tol", [&](const json& y, const std::string& q) { b.window_agreement_tol = number(y, q); });
    opt(x, p, "dt_refinement_tol", [&](const json& y, const std::string& q) { b.dt_refinement_tol = number(y, q); });
    opt(x, p, "absolute_floor", [&](const json& y, const std::string& q) { b.absolute_floor = number(y, q); });
    opt(x, p, "refine", [&](const json& y, const std::string& q) { b.refine = boolean(y, q); });
  });
  cfg.bound.validate();

  if (cfg.oracle_family)
    cfg.shooting.tau = std::numbers::pi / std::sqrt(op.lambda()[cfg.oracle_mode - 1]);
  else if (cfg.forcing.antiperiod)
    cfg.shooting.tau = *cfg.forcing.antiperiod;
  opt(j, "", "shooting", [&](const json& x, const std::string& p) {
    require_object(x, p);
    allow_keys(x, p, {"tau", "residual_tol", "max_outer_iter", "jacobian", "fd_eps", "picard_relaxation",
                      "picard_max_iter", "warm_start_periods"});
    auto& s = cfg.shooting;
    opt(x, p, "tau", [&](const json& y, const std::string& q) { s.tau = number(y, q); });
    opt(x, p, "residual_tol", [&](const json& y, const std::string& q) { s.residual_tol = number(y, q); });
    opt(x, p, "max_outer_iter", [&](const json& y, const std::string& q) { s.max_outer_iter = integer(y, q); });
    opt(x, p, "jacobian", [&](const json& y, const std::string& q) { s.jacobian = enum_of(y, q, jacobian_mode_from_string); });
    opt(x, p, "fd_eps", [&](const json& y, const std::string& q) { s.fd_eps = number(y, q); });
    opt(x, p, "picard_relaxation", [&](const json& y, const std::string& q) { s.picard_relaxation = number(y, q); });
    opt(x, p, "picard_max_iter", [&](const json& y, const std::string& q) { s.picard_max_iter = integer(y, q); });
    opt(x, p, "warm_start_periods", [&](const json& y, const std::string& q) { s.warm_start_periods = integer(y, q); });
  });
  cfg.shooting.validate();
  if (cfg.experiment == ExperimentKind::AntiPeriodic && !cfg.oracle_family && !cfg.forcing.antiperiod)
    fail("forcing.antiperiod", "required for anti-periodic experiments unless oracle_family is set");

  opt(j, "", "simulate", [&](const json& x, const std::string& p) {
    require_object(x, p);
    allow_keys(x, p, {"T", "observe_every"});
    opt(x, p, "T", [&](const json& y, const std::string& q) {
      cfg.simulate.T = number(y, q);
      if (!(cfg.simulate.T > 0.0)) fail(q, "must be positive");
    });
    opt(x, p, "observe_every", [&](const json& y, const std::string& q) {
      cfg.simulate.observe_every = integer(y, q);
      if (cfg.simulate.observe_every < 1) fail(q, "must be >= 1");
    });
  });

  opt(j, "", "properties", [&](const json& x, const std::string& p) {
    require_object(x, p);
    allow_keys(x, p, {"monotonicity_pairs", "certificate_samples", "roundtrip_samples", "contraction_pairs",
                      "contraction_T"});
    auto& s = cfg.properties;
    auto count = [](const json& y, const std::string& q) {
      const int k = integer(y, q);
      if (k < 1) fail(q, "must be >= 1");
      return k;
    };
    opt(x, p, "monotonicity_pairs", [&](const json& y, const std::string& q) { s.monotonicity_pairs = count(y, q); });
    opt(x, p, "certificate_samples", [&](const json& y, const std::string& q) { s.certificate_samples = count(y, q); });
    opt(x, p, "roundtrip_samples", [&](const json& y, const std::string& q) { s.roundtrip_samples = count(y, q); });
    opt(x, p, "contraction_pairs", [&](const json& y, const std::string& q) { s.contraction_pairs = count(y, q); });
    opt(x, p, "contraction_T", [&](const json& y, const std::string& q) {
      s.contraction_T = number(y, q);
      if (!(s.contraction_T > 0.0)) fail(q, "must be positive");
    });
  });
  opt(j, "", "seed", [&](const json& x, const std::string& q) {
    if (!x.is_number_unsigned() && !(x.is_number_integer() && x.get<long long>() >= 0)) fail(q, "expected an unsigned integer");
    cfg.properties.seed = x.get<std::uint64_t>();
  });
  opt(j, "", "output_dir", [&](const json& x, const std::string& q) {
    cfg.output_dir = text(x, q);
    if (cfg.output_dir.empty()) fail(q, "must not be empty");
  });
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = std::string(to_string(cfg.experiment));
  j["operator"] = {{"kind", std::string(to_string(cfg.op.kind))},
                   {"num_modes", cfg.op.num_modes},
                   {"length", cfg.op.length},
                   {"lambda", cfg.op.lambda ? json(*cfg.op.lambda) : json(nullptr)},
                   {"num_quad", cfg.op.num_quad ? json(*cfg.op.num_quad) : json(nullptr)}};
  json terms = json::array();
  for (const auto& t : cfg.damping)
    terms.push_back({{"family", std::string(to_string(t.family))}, {"c", t.c}, {"alpha", t.alpha}});
  j["damping"] = {{"terms", terms}};
  j["forcing"] = forcing_json(cfg.forcing);
  j["oracle_family"] = cfg.oracle_family;
  j["oracle_mode"] = cfg.oracle_mode;
  j["initial"] = {{"kind", std::string(to_string(cfg.initial.kind))},
                  {"u0", to_vector(cfg.initial.u0)},
                  {"v0", to_vector(cfg.initial.v0)}};
  j["amplitudes"] = cfg.amplitudes;
  j["norm_kind"] = std::string(to_string(cfg.norm_kind));
  j["check_exponents"] = cfg.check_exponents;
  j["stepper"] = {{"dt", cfg.stepper.dt},
                  {"scheme", std::string(to_string(cfg.stepper.scheme))},
                  {"newton_tol", cfg.stepper.newton_tol},
                  {"newton_max_iter", cfg.stepper.newton_max_iter},
                  {"fallback", std::string(to_string(cfg.stepper.fallback))}};
  j["bound"] = {{"T_total", cfg.bound.T_total},
                {"burn_in_fraction", cfg.bound.burn_in_fraction},
                {"window_count", cfg.bound.window_count},
                {"window_agreement_tol", cfg.bound.window_agreement_tol},
                {"dt_refinement_tol", cfg.bound.dt_refinement_tol},
                {"absolute_floor", cfg.bound.absolute_floor},
                {"refine", cfg.bound.refine}};
  j["shooting"] = {{"tau", cfg.shooting.tau},
                   {"residual_tol", cfg.shooting.residual_tol},
                   {"max_outer_iter", cfg.shooting.max_outer_iter},
                   {"jacobian", std::string(to_string(cfg.shooting.jacobian))},
                   {"fd_eps", cfg.shooting.fd_eps},
                   {"picard_relaxation", cfg.shooting.picard_relaxation},
                   {"picard_max_iter", cfg.shooting.picard_max_iter},
                   {"warm_start_periods", cfg.shooting.warm_start_periods}};
  j["simulate"] = {{"T", cfg.simulate.T}, {"observe_every", cfg.simulate.observe_every}};
  j["properties"] = {{"monotonicity_pairs", cfg.properties.monotonicity_pairs},
                     {"certificate_samples", cfg.properties.certificate_samples},
                     {"roundtrip_samples", cfg.properties.roundtrip_samples},
                     {"contraction_pairs", cfg.properties.contraction_pairs},
                     {"contraction_T", cfg.properties.contraction_T}};
  j["seed"] = cfg.properties.seed;
  j["output_dir"] = cfg.output_dir;
  return j;
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &j;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) throw ValidationError("override key '" + key + "' has an empty segment");
    path.push_back(part);
  }
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::string& seg = path[i];
    const bool last = i + 1 == path.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(seg);
      } catch (const std::exception&) {
        throw ValidationError("override key '" + key + "': '" + seg + "' is not an array index");
      }
      if (idx >= node->size()) throw ValidationError("override key '" + key + "': index " + seg + " out of range");
      node = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ValidationError("override key '" + key + "': '" + seg + "' is not inside an object");
      node = &(*node)[seg];
    }
    if (last) *node = value;
  }
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  return out;
}

void write_ledger(const std::filesystem::path& path, const std::vector<EnergyRecord>& ledger) {
  auto out = open_output(path);
  out << "t,E,Phi,work,dissipation\n";
  for (const auto& r : ledger)
    out << fmt(r.t) << ',' << fmt(r.E) << ',' << fmt(r.Phi) << ',' << fmt(r.work_increment) << ','
        << fmt(r.dissipation_increment) << '\n';
}

State initial_state(const ExperimentConfig& cfg, const SpectralOperator& op, const ForcingSignal& h, double scale) {
  switch (cfg.initial.kind) {
    case InitialKind::Rest: return zero_state(op);
    case InitialKind::Static: {
      const ModalVector h0 = h.eval(0.0);
      return State{ModalVector(h0.array() / op.lambda().array()), op.zero(), 0.0};
    }
    case InitialKind::Given: return State{scale * cfg.initial.u0, scale * cfg.initial.v0, 0.0};
  }
  return zero_state(op);
}

json fit_json(const SweepResult& fit, NormKind kind, const std::vector<double>& exponents) {
  json j;
  j["norm_kind"] = std::string(to_string(kind));
  j["fit_ok"] = fit.fit_ok;
  j["fit_message"] = fit.fit_message;
  j["slope"] = fit.fitted_slope;
  j["intercept"] = fit.fitted_intercept;
  j["r_squared"] = fit.r_squared;
  json checks = json::array();
  for (double e : exponents) {
    const BoundCheck c = check_bound_inequality(fit, e);
    checks.push_back({{"exponent", e},
                      {"K_fit", c.K_fit},
                      {"growth_factor", c.growth_factor},
                      {"drift_slope", c.drift_slope},
                      {"holds", c.holds}});
  }
  j["checks"] = checks;
  return j;
}

void log_fit(std::ostream& log, const json& summary) {
  log << "fit: slope " << fmt(summary["slope"].get<double>()) << ", r^2 " << fmt(summary["r_squared"].get<double>())
      << (summary["fit_ok"].get<bool>() ? "" : " (" + summary["fit_message"].get<std::string>() + ")") << '\n';
  for (const auto& c : summary["checks"])
    log << "bound exponent " << fmt(c["exponent"].get<double>()) << ": K_fit " << fmt(c["K_fit"].get<double>())
        << ", growth " << fmt(c["growth_factor"].get<double>()) << (c["holds"].get<bool>() ? " holds" : " fails")
        << '\n';
}

int run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const auto op = build_operator(cfg.op);
  const auto g = build_damping(cfg);
  const auto h = build_forcing(cfg.forcing, op.num_modes());
  RunOptions options;
  options.observe_every = cfg.simulate.observe_every;
  Trajectory traj;
  try {
    traj = run(op, g, initial_state(cfg, op, h, 1.0), h, cfg.simulate.T, cfg.stepper, options);
  } catch (const RunAborted& e) {
    write_ledger(dir / "ledger.csv", e.partial().ledger);
    throw;
  }
  write_ledger(dir / "ledger.csv", traj.ledger);
  log << "simulated " << traj.ledger.size() << " records to t = " << fmt(traj.final_state.t) << ", final E "
      << fmt(traj.ledger.back().E) << ", max step defect " << fmt(traj.max_step_defect) << '\n';
  return kExitOk;
}

int run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const auto op = build_operator(cfg.op);
  const auto g = build_damping(cfg);
  const auto h = build_forcing(cfg.forcing, op.num_modes());
  const ForcingFamily family = [h](double k) { return h.scaled(k); };
  const StateFamily states = [&](double k) { return initial_state(cfg, op, h.scaled(k), k); };
  const SweepResult sweep = amplitude_sweep(op, g, family, cfg.amplitudes, cfg.norm_kind, cfg.bound, cfg.stepper, states);

  auto out = open_output(dir / "sweep.csv");
  out << "amplitude,norm_kind,forcing_norm,M_hat,status\n";
  for (const auto& r : sweep.rows)
    out << fmt(r.amplitude) << ',' << to_string(r.norm_kind) << ',' << fmt(r.forcing_norm) << ',' << fmt(r.M_hat)
        << ',' << json(r.status).dump() << '\n';
  const json summary = fit_json(sweep, cfg.norm_kind, cfg.check_exponents);
  open_output(dir / "fit_summary.json") << summary.dump(2) << '\n';
  log << sweep.rows.size() << " sweep rows\n";
  log_fit(log, summary);
  return sweep.fit_ok ? kExitOk : kExitNumerical;
}

int run_antiperiodic(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const auto op = build_operator(cfg.op);
  const auto g = build_damping(cfg);
  ForcingFamily family;
  if (cfg.oracle_family) {
    family = eigenmode_oracle_family(op, g, cfg.oracle_mode);
  } else {
    const auto h = build_forcing(cfg.forcing, op.num_modes());
    family = [h](double k) { return h.scaled(k); };
  }
  const AntiPeriodicSweep sweep =
      antiperiodic_exponent_sweep(op, g, family, cfg.amplitudes, cfg.norm_kind, cfg.shooting, cfg.stepper);

  auto out = open_output(dir / "antiperiodic.csv");
  out << "amplitude,linf_norm,l2_period_norm,M_hat,shooting_residual,warm_start_used,status\n";
  for (const auto& r : sweep.rows)
    out << fmt(r.amplitude) << ',' << fmt(r.linf_norm) << ',' << fmt(r.l2_period_norm) << ',' << fmt(r.M_hat) << ','
        << fmt(r.shooting_residual) << ',' << (r.warm_start_used ? "true" : "false") << ','
        << json(r.status).dump() << '\n';

  auto traj_out = open_output(dir / "trajectory.csv");
  traj_out << "amplitude,t,Phi";
  for (int k = 1; k <= op.num_modes(); ++k) traj_out << ",u_" << k;
  for (int k = 1; k <= op.num_modes(); ++k) traj_out << ",v_" << k;
  traj_out << '\n';
  for (const auto& r : sweep.rows) {
    if (!r.ok) continue;
    for (const auto& s : antiperiodic_trajectory(op, g, family(r.amplitude), r.U0, cfg.shooting.tau, cfg.stepper)) {
      traj_out << fmt(r.amplitude) << ',' << fmt(s.t) << ',' << fmt(2.0 * energy(op, s));
      for (int k = 0; k < op.num_modes(); ++k) traj_out << ',' << fmt(s.u[k]);
      for (int k = 0; k < op.num_modes(); ++k) traj_out << ',' << fmt(s.v[k]);
      traj_out << '\n';
    }
  }
  const json summary = fit_json(sweep.fit, cfg.norm_kind, cfg.check_exponents);
  open_output(dir / "fit_summary.json") << summary.dump(2) << '\n';
  log << sweep.rows.size() << " anti-periodic rows\n";
  log_fit(log, summary);
  return sweep.fit.fit_ok ? kExitOk : kExitNumerical;
}

int run_verify(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const auto results = run_property_suite(cfg.properties);
  auto out = open_output(dir / "verify.csv");
  out << "property,checks,violations,worst_slack,status\n";
  bool all = true;
  char line[160];
  std::snprintf(line, sizeof line, "%-46s %8s %10s  %s\n", "property", "checks", "violations", "result");
  log << line;
  for (const auto& r : results) {
    all = all && r.passed();
    out << json(r.name).dump() << ',' << r.checks << ',' << r.violations << ',' << fmt(r.worst) << ','
        << (r.passed() ? "pass" : "FAIL") << '\n';
    std::snprintf(line, sizeof line, "%-46s %8ld %10ld  %s\n", r.name.c_str(), r.checks, r.violations,
                  r.passed() ? "pass" : "FAIL");
    log << line;
    if (!r.detail.empty()) log << "    " << r.detail << '\n';
  }
  log << (all ? "all properties pass\n" : "property suite FAILED\n");
  return all ? kExitOk : kExitPropertyFailure;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  const std::filesystem::path dir = cfg.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("output_dir: cannot create '" + dir.string() + "': " + ec.message());
  open_output(dir / "resolved_config.json") << to_json(cfg).dump(2) << '\n';
  try {
    switch (cfg.experiment) {
      case ExperimentKind::Simulate: return run_simulate(cfg, dir, log);
      case ExperimentKind::Sweep: return run_sweep(cfg, dir, log);
      case ExperimentKind::AntiPeriodic: return run_antiperiodic(cfg, dir, log);
      case ExperimentKind::Verify: return run_verify(cfg, dir, log);
    }
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(to_string(cfg.experiment)) + " experiment: " + e.what());
  }
  return kExitOk;
}

}  // namespace ubound
