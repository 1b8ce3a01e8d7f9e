#include "fve/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "fve/error.hpp"

namespace fve {

using nlohmann::json;

namespace {

const char* const kExperimentNames[] = {"lookdown", "moran", "dual", "spde", "sdsm", "diagnose", "verify"};

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError("config field '" + field + "': " + message);
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> known) {
  if (!j.is_object()) fail(where.empty() ? "<root>" : where, "expected an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) fail(where.empty() ? item.key() : where + "." + item.key(), "unknown key");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(where.empty() ? key : where + "." + key, e.what());
  }
}

void read_count(const json& j, const char* key, std::size_t& out, const std::string& where) {
  if (!j.contains(key)) return;
  long long v = 0;
  read(j, key, v, where);
  if (v < 0) fail(where.empty() ? key : where + "." + key, "must be non-negative");
  out = static_cast<std::size_t>(v);
}

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(where + "." + key, "missing");
  double v = 0.0;
  read(j, key, v, where);
  return v;
}

std::string scheme_name(NoiseScheme s) { return s == NoiseScheme::euler_clip ? "euler_clip" : "feller_split"; }

}  // namespace

std::string to_string(Experiment e) { return kExperimentNames[static_cast<int>(e)]; }

Experiment experiment_from_string(const std::string& name) {
  for (int k = 0; k < 7; ++k) {
    if (name == kExperimentNames[k]) return static_cast<Experiment>(k);
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

KernelSpec KernelSection::build() const {
  if (family == "gaussian") return KernelSpec::gaussian(amplitude, bandwidth, epsilon);
  if (family == "tabulated") return KernelSpec::load_tabulated(table, epsilon);
  throw ConfigError("config field 'kernel.family': expected gaussian or tabulated");
}

json to_json(const InitialLaw& law) {
  return std::visit(
      [](const auto& f) -> json {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, InitialLaw::Point>) {
          return {{"family", "point"}, {"x", f.x}};
        } else if constexpr (std::is_same_v<F, InitialLaw::Uniform>) {
          return {{"family", "uniform"}, {"a", f.a}, {"b", f.b}};
        } else if constexpr (std::is_same_v<F, InitialLaw::Normal>) {
          return {{"family", "normal"}, {"mean", f.mean}, {"sd", f.sd}};
        } else {
          return {{"family", "two_atoms"}, {"x1", f.x1}, {"p", f.p}, {"x2", f.x2}};
        }
      },
      law.form());
}

InitialLaw initial_from_json(const json& j) {
  const std::string w = "initial";
  if (!j.is_object() || !j.contains("family")) fail(w + ".family", "missing");
  std::string family;
  read(j, "family", family, w);
  try {
    if (family == "point") {
      reject_unknown(j, w, {"family", "x"});
      return InitialLaw::point(number(j, "x", w));
    }
    if (family == "uniform") {
      reject_unknown(j, w, {"family", "a", "b"});
      return InitialLaw::uniform(number(j, "a", w), number(j, "b", w));
    }
    if (family == "normal") {
      reject_unknown(j, w, {"family", "mean", "sd"});
      return InitialLaw::normal(number(j, "mean", w), number(j, "sd", w));
    }
    if (family == "two_atoms") {
      reject_unknown(j, w, {"family", "x1", "p", "x2"});
      return InitialLaw::two_atoms(number(j, "x1", w), number(j, "p", w), number(j, "x2", w));
    }
  } catch (const ArgumentError& e) {
    fail(w, e.what());
  }
  fail(w + ".family", "expected point, uniform, normal or two_atoms");
}

json to_json(const TestFunction& phi) {
  if (const auto* p = phi.polynomial_coeffs()) {
    return {{"family", "polynomial"}, {"coefficients", {p->c0, p->c1, p->c2}}};
  }
  const auto* b = phi.bump_params();
  return {{"family", "bump"}, {"amplitude", b->amplitude}, {"center", b->center}, {"width", b->width}};
}

TestFunction test_function_from_json(const json& j) {
  const std::string w = "phi";
  if (!j.is_object() || !j.contains("family")) fail(w + ".family", "missing");
  std::string family;
  read(j, "family", family, w);
  if (family == "polynomial") {
    reject_unknown(j, w, {"family", "coefficients"});
    std::vector<double> c;
    read(j, "coefficients", c, w);
    if (c.empty() || c.size() > 3) fail(w + ".coefficients", "expected 1 to 3 coefficients");
    c.resize(3, 0.0);
    return TestFunction::polynomial(c[0], c[1], c[2]);
  }
  if (family == "bump") {
    reject_unknown(j, w, {"family", "amplitude", "center", "width"});
    try {
      return TestFunction::bump(number(j, "amplitude", w), number(j, "center", w), number(j, "width", w));
    } catch (const ArgumentError& e) {
      fail(w, e.what());
    }
  }
  fail(w + ".family", "expected polynomial or bump");
}

json to_json(const RunConfig& c) {
  json spde = {{"L", c.spde.half_width},
               {"dx", c.spde.dx},
               {"scheme", scheme_name(c.spde.scheme)},
               {"initial_sd", c.spde.initial_sd}};
  if (c.spde.dt) spde["dt"] = *c.spde.dt;
  return {
      {"experiment", to_string(c.experiment)},
      {"kernel",
       {{"family", c.kernel.family},
        {"amplitude", c.kernel.amplitude},
        {"bandwidth", c.kernel.bandwidth},
        {"table", c.kernel.table},
        {"epsilon", c.kernel.epsilon}}},
      {"m", c.m},
      {"gamma", c.gamma},
      {"horizon", c.horizon},
      {"dt_max", c.dt_max},
      {"record_times", c.record_times},
      {"initial", to_json(c.initial)},
      {"phi", to_json(c.phi)},
      {"order", c.order},
      {"spde", spde},
      {"sdsm",
       {{"n0", c.sdsm.n0}, {"delta", c.sdsm.delta}, {"T", c.sdsm.T}, {"exact_conditioning", c.sdsm.exact_conditioning}}},
      {"diagnose", {{"input", c.diagnose.input}, {"eps_grid", c.diagnose.eps_grid}}},
      {"verify", {{"suite", c.verify.suite}, {"scale", c.verify.scale}}},
      {"n_reps", c.n_reps},
      {"master_seed", c.master_seed},
      {"out_dir", c.out_dir},
  };
}

RunConfig config_from_json(const json& j) {
  reject_unknown(j, "", {"experiment", "kernel", "m", "gamma", "horizon", "dt_max", "record_times", "initial", "phi",
                         "order", "spde", "sdsm", "diagnose", "verify", "n_reps", "master_seed", "out_dir"});
  RunConfig c;
  if (j.contains("experiment")) {
    std::string name;
    read(j, "experiment", name, "");
    try {
      c.experiment = experiment_from_string(name);
    } catch (const ConfigError&) {
      fail("experiment", "unknown experiment '" + name + "'");
    }
  }
  if (j.contains("kernel")) {
    const json& k = j.at("kernel");
    reject_unknown(k, "kernel", {"family", "amplitude", "bandwidth", "table", "epsilon"});
    read(k, "family", c.kernel.family, "kernel");
    read(k, "amplitude", c.kernel.amplitude, "kernel");
    read(k, "bandwidth", c.kernel.bandwidth, "kernel");
    read(k, "table", c.kernel.table, "kernel");
    read(k, "epsilon", c.kernel.epsilon, "kernel");
  }
  read_count(j, "m", c.m, "");
  read(j, "gamma", c.gamma, "");
  read(j, "horizon", c.horizon, "");
  read(j, "dt_max", c.dt_max, "");
  read(j, "record_times", c.record_times, "");
  if (j.contains("initial")) c.initial = initial_from_json(j.at("initial"));
  if (j.contains("phi")) c.phi = test_function_from_json(j.at("phi"));
  read(j, "order", c.order, "");
  if (j.contains("spde")) {
    const json& s = j.at("spde");
    reject_unknown(s, "spde", {"L", "dx", "dt", "scheme", "initial_sd"});
    read(s, "L", c.spde.half_width, "spde");
    read(s, "dx", c.spde.dx, "spde");
    if (s.contains("dt") && !s.at("dt").is_null()) {
      double dt = 0.0;
      read(s, "dt", dt, "spde");
      c.spde.dt = dt;
    }
    std::string scheme = scheme_name(c.spde.scheme);
    read(s, "scheme", scheme, "spde");
    if (scheme == "euler_clip") {
      c.spde.scheme = NoiseScheme::euler_clip;
    } else if (scheme == "feller_split") {
      c.spde.scheme = NoiseScheme::feller_split;
    } else {
      fail("spde.scheme", "expected euler_clip or feller_split");
    }
    read(s, "initial_sd", c.spde.initial_sd, "spde");
  }
  if (j.contains("sdsm")) {
    const json& s = j.at("sdsm");
    reject_unknown(s, "sdsm", {"n0", "delta", "T", "exact_conditioning"});
    read_count(s, "n0", c.sdsm.n0, "sdsm");
    read(s, "delta", c.sdsm.delta, "sdsm");
    read(s, "T", c.sdsm.T, "sdsm");
    read(s, "exact_conditioning", c.sdsm.exact_conditioning, "sdsm");
  }
  if (j.contains("diagnose")) {
    const json& d = j.at("diagnose");
    reject_unknown(d, "diagnose", {"input", "eps_grid"});
    read(d, "input", c.diagnose.input, "diagnose");
    read(d, "eps_grid", c.diagnose.eps_grid, "diagnose");
  }
  if (j.contains("verify")) {
    const json& v = j.at("verify");
    reject_unknown(v, "verify", {"suite", "scale"});
    read(v, "suite", c.verify.suite, "verify");
    read(v, "scale", c.verify.scale, "verify");
  }
  read_count(j, "n_reps", c.n_reps, "");
  read(j, "master_seed", c.master_seed, "");
  read(j, "out_dir", c.out_dir, "");
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (kernel.family != "gaussian" && kernel.family != "tabulated") {
    fail("kernel.family", "expected gaussian or tabulated");
  }
  if (kernel.family == "gaussian") {
    if (!(kernel.amplitude >= 0.0)) fail("kernel.amplitude", "must be >= 0");
    if (!(kernel.bandwidth > 0.0)) fail("kernel.bandwidth", "must be > 0");
  } else if (kernel.table.empty()) {
    fail("kernel.table", "required for the tabulated family");
  }
  if (!(kernel.epsilon >= 0.0)) fail("kernel.epsilon", "must be >= 0");
  if (m < 2) fail("m", "must be >= 2");
  if (!(gamma > 0.0)) fail("gamma", "must be > 0");
  if (!(horizon > 0.0)) fail("horizon", "must be > 0");
  if (!(dt_max > 0.0)) fail("dt_max", "must be > 0");
  for (std::size_t k = 0; k < record_times.size(); ++k) {
    if (!(record_times[k] >= 0.0 && record_times[k] <= horizon)) fail("record_times", "must lie in [0, horizon]");
    if (k > 0 && record_times[k] < record_times[k - 1]) fail("record_times", "must be sorted");
  }
  if (order < 1 || order > 3) fail("order", "must be 1, 2 or 3");
  if (!(spde.half_width > 0.0)) fail("spde.L", "must be > 0");
  if (!(spde.dx > 0.0)) fail("spde.dx", "must be > 0");
  if (spde.dt && !(*spde.dt > 0.0)) fail("spde.dt", "must be > 0");
  if (!(spde.initial_sd > 0.0)) fail("spde.initial_sd", "must be > 0");
  if (sdsm.n0 < 2) fail("sdsm.n0", "must be >= 2");
  if (!(sdsm.delta > 0.0)) fail("sdsm.delta", "must be > 0");
  if (!(sdsm.T > 0.0)) fail("sdsm.T", "must be > 0");
  if (experiment == Experiment::sdsm && sdsm.T > horizon) fail("sdsm.T", "must not exceed horizon");
  for (double e : diagnose.eps_grid) {
    if (!(e > 0.0 && e <= 1.0)) fail("diagnose.eps_grid", "entries must lie in (0, 1]");
  }
  if (experiment == Experiment::diagnose && diagnose.input.empty()) fail("diagnose.input", "required");
  if (!(verify.scale > 0.0)) fail("verify.scale", "must be > 0");
  if (n_reps < 1) fail("n_reps", "must be >= 1");
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const RunConfig& config) {
  json j = to_json(config);
  j.erase("out_dir");
  const std::size_t h = std::hash<std::string>{}(j.dump());
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace fve
