#include "vshock/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <toml.hpp>

#include "vshock/errors.hpp"
#include "vshock/io.hpp"
#include "vshock/lemma_lab.hpp"
#include "vshock/shift_tracker.hpp"
#include "vshock/simulate.hpp"

namespace vshock {
namespace {

using Json = nlohmann::json;

struct Field {
  std::string key;
  char kind;
  std::function<Json(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const Json&)> put;
};

void require_kind(const std::string& key, char kind, const Json& v) {
  const bool ok = (kind == 'n' && v.is_number()) ||
                  (kind == 'i' && (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))) ||
                  (kind == 'b' && v.is_boolean()) || (kind == 's' && v.is_string());
  if (!ok) {
    const char* want = kind == 'n' ? "a number" : kind == 'i' ? "a non-negative integer"
                       : kind == 'b' ? "a boolean" : "a string";
    throw ConfigError("config key '" + key + "' must be " + want + ", got " + v.dump());
  }
}

template <class T, class Access>
Field field(std::string key, Access access) {
  Field f;
  f.key = std::move(key);
  if constexpr (std::is_same_v<T, bool>) f.kind = 'b';
  else if constexpr (std::is_integral_v<T>) f.kind = 'i';
  else f.kind = 'n';
  f.get = [access](const ExperimentConfig& c) -> Json {
    const T v = access(const_cast<ExperimentConfig&>(c));
    if constexpr (std::is_floating_point_v<T>) return json_number(v);
    else return Json(v);
  };
  f.put = [access](ExperimentConfig& c, const Json& v) { access(c) = v.get<T>(); };
  return f;
}

Field string_field(std::string key, std::function<std::string(const ExperimentConfig&)> get,
                   std::function<void(ExperimentConfig&, const std::string&)> put) {
  Field f;
  f.key = std::move(key);
  f.kind = 's';
  f.get = [get](const ExperimentConfig& c) -> Json { return get(c); };
  f.put = [put](ExperimentConfig& c, const Json& v) { put(c, v.get<std::string>()); };
  return f;
}

using C = ExperimentConfig;

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      string_field("scenario", [](const C& c) { return to_string(c.scenario); },
                   [](C& c, const std::string& v) { c.scenario = scenario_from_string(v); }),
      field<double>("u_minus", [](C& c) -> double& { return c.u_minus; }),
      field<double>("u_plus", [](C& c) -> double& { return c.u_plus; }),
      field<double>("p", [](C& c) -> double& { return c.p; }),
      string_field("flux", [](const C& c) { return c.flux; },
                   [](C& c, const std::string& v) { c.flux = v; }),
      field<double>("cfl", [](C& c) -> double& { return c.solver.cfl; }),
      field<double>("epsilon", [](C& c) -> double& { return c.solver.epsilon; }),
      string_field("scheme", [](const C& c) { return to_string(c.solver.scheme); },
                   [](C& c, const std::string& v) { c.solver.scheme = scheme_from_string(v); }),
      string_field("frame", [](const C& c) { return to_string(c.solver.frame); },
                   [](C& c, const std::string& v) { c.solver.frame = frame_from_string(v); }),
      field<double>("t_end", [](C& c) -> double& { return c.solver.t_end; }),
      field<double>("output_dt", [](C& c) -> double& { return c.solver.output_dt; }),
      string_field("perturbation", [](const C& c) { return to_string(c.initial.kind); },
                   [](C& c, const std::string& v) { c.initial.kind = perturbation_from_string(v); }),
      field<double>("amplitude", [](C& c) -> double& { return c.initial.amplitude; }),
      field<double>("width", [](C& c) -> double& { return c.initial.width; }),
      field<double>("offset", [](C& c) -> double& { return c.initial.offset; }),
      field<std::uint64_t>("seed", [](C& c) -> std::uint64_t& { return c.initial.seed; }),
      field<int>("modes", [](C& c) -> int& { return c.initial.modes; }),
      field<double>("cutoff", [](C& c) -> double& { return c.initial.cutoff; }),
      field<double>("base_shift", [](C& c) -> double& { return c.initial.base_shift; }),
      field<double>("x_min", [](C& c) -> double& { return c.initial.x_min; }),
      field<double>("x_max", [](C& c) -> double& { return c.initial.x_max; }),
      field<double>("dx", [](C& c) -> double& { return c.initial.dx; }),
      field<double>("c0", [](C& c) -> double& { return c.c0; }),
      field<bool>("zero_mass_shift", [](C& c) -> bool& { return c.zero_mass_shift; }),
      field<bool>("antiderivative", [](C& c) -> bool& { return c.antiderivative; }),
      field<bool>("check_rates", [](C& c) -> bool& { return c.check_rates; }),
      field<double>("fit_t_a", [](C& c) -> double& { return c.fit_t_a; }),
      field<double>("fit_t_b", [](C& c) -> double& { return c.fit_t_b; }),
      field<double>("tolerance_factor", [](C& c) -> double& { return c.tolerance_factor; }),
      field<double>("delta", [](C& c) -> double& { return c.delta; }),
      field<bool>("floor_correction", [](C& c) -> bool& { return c.floor_correction; }),
      field<double>("floor_rel", [](C& c) -> double& { return c.floor_rel; }),
      field<double>("floor_abs", [](C& c) -> double& { return c.floor_abs; }),
      field<double>("floor_stationary_tol", [](C& c) -> double& { return c.floor_stationary_tol; }),
      field<bool>("check_energy", [](C& c) -> bool& { return c.check_energy; }),
      field<double>("dissipation_tol", [](C& c) -> double& { return c.dissipation_tol; }),
      field<double>("l1_factor", [](C& c) -> double& { return c.l1_factor; }),
      field<double>("shift_bound_tol", [](C& c) -> double& { return c.shift_bound_tol; }),
      field<double>("phi_tol", [](C& c) -> double& { return c.phi_tol; }),
      field<std::size_t>("snapshots", [](C& c) -> std::size_t& { return c.snapshots; }),
      field<double>("profile_margin", [](C& c) -> double& { return c.profile_margin; }),
      field<double>("profile_spacing", [](C& c) -> double& { return c.profile_spacing; }),
      string_field("output_dir", [](const C& c) { return c.output_dir.generic_string(); },
                   [](C& c, const std::string& v) { c.output_dir = v; }),
  };
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

void apply(ExperimentConfig& c, const std::string& key, const Json& v) {
  const Field& f = find_field(key);
  require_kind(key, f.kind, v);
  try {
    f.put(c, v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

// Nested tables are flattened: [solver] cfl = 0.5 sets "cfl".
void flatten(const Json& doc, Json& out) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it->is_object()) flatten(*it, out);
    else {
      if (out.contains(it.key())) throw ConfigError("config key '" + it.key() + "' given twice");
      out[it.key()] = *it;
    }
  }
}

Json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    Json obj = Json::object();
    for (const auto& [k, v] : *t) obj[std::string(k.str())] = toml_to_json(v);
    return obj;
  }
  if (const auto* v = node.as_integer()) return Json(v->get());
  if (const auto* v = node.as_floating_point()) return Json(v->get());
  if (const auto* v = node.as_boolean()) return Json(v->get());
  if (const auto* v = node.as_string()) return Json(v->get());
  throw ConfigError("unsupported TOML value type (arrays and dates are not config values)");
}

std::string digest(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

void write_series(const std::filesystem::path& path, const TimeSeries& ts, bool diagnostics) {
  std::ostringstream out;
  if (diagnostics) ts.write_diagnostics_csv(out);
  else ts.write_csv(out);
  write_text_file(path, out.str());
}

CheckResult make_check(std::string name) {
  CheckResult c;
  c.name = std::move(name);
  c.pass = true;
  return c;
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::theorem1: return "theorem1";
    case Scenario::theorem2: return "theorem2";
    case Scenario::theorem3: return "theorem3";
    case Scenario::custom: return "custom";
  }
  return "custom";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "theorem1") return Scenario::theorem1;
  if (s == "theorem2") return Scenario::theorem2;
  if (s == "theorem3") return Scenario::theorem3;
  if (s == "custom") return Scenario::custom;
  throw ConfigError("unknown scenario '" + s + "' (theorem1, theorem2, theorem3, custom)");
}

double p0_threshold() {
  static const double p0 = estimate_p0(1e-10).p0;
  return p0;
}

ExperimentConfig ExperimentConfig::preset(Scenario s) {
  ExperimentConfig c;
  c.scenario = s;
  c.solver.t_end = 2000.0;
  c.solver.output_dt = 1.0;
  c.solver.frame = Frame::co_moving_shift;
  switch (s) {
    case Scenario::theorem1:
    case Scenario::custom: c.p = 1.5; break;
    case Scenario::theorem2: c.p = 1.0; break;
    case Scenario::theorem3:
      c.p = 1.0;
      c.flux = "quartic";
      c.zero_mass_shift = true;
      c.antiderivative = true;
      c.solver.frame = Frame::co_moving_gamma;
      break;
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a table/object");
  Json flat = Json::object();
  flatten(doc, flat);
  Scenario s = Scenario::custom;
  if (flat.contains("scenario")) {
    require_kind("scenario", 's', flat["scenario"]);
    s = scenario_from_string(flat["scenario"].get<std::string>());
  }
  ExperimentConfig c = preset(s);
  for (auto it = flat.begin(); it != flat.end(); ++it) apply(c, it.key(), *it);
  return c;
}

namespace {

Json parse_toml(const std::string& text) {
  toml::table table;
  try {
    table = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML parse error: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }
  return toml_to_json(table);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_toml(const std::string& text) { return from_json(parse_toml(text)); }

Json ExperimentConfig::load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() != ".json") return parse_toml(buf.str());
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("JSON parse error: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return from_json(load_document(path));
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const Field& f = find_field(key);
  Json v;
  switch (f.kind) {
    case 's': v = value; break;
    case 'b':
      if (value == "true" || value == "1") v = true;
      else if (value == "false" || value == "0") v = false;
      else throw ConfigError("config key '" + key + "' expects true/false, got '" + value + "'");
      break;
    case 'i': {
      std::size_t used = 0;
      unsigned long long x = 0;
      try {
        if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
        x = std::stoull(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != value.size() || value.empty())
        throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + value + "'");
      v = static_cast<std::uint64_t>(x);
      break;
    }
    default: {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != value.size() || value.empty())
        throw ConfigError("config key '" + key + "' expects a number, got '" + value + "'");
      v = x;
    }
  }
  apply(*this, key, v);
}

std::vector<std::pair<std::string, char>> ExperimentConfig::keys() {
  std::vector<std::pair<std::string, char>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.kind);
  return out;
}

Json ExperimentConfig::to_json() const {
  Json doc = Json::object();
  for (const auto& f : fields()) doc[f.key] = f.get(*this);
  return doc;
}

ShockParams ExperimentConfig::shock_params() const {
  try {
    return ShockParams::make(u_minus, u_plus, p, FluxSpec::from_name(flux));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void ExperimentConfig::validate() const {
  const ShockParams params = shock_params();
  try {
    params.flux.validate(u_plus, u_minus);
    solver.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  switch (scenario) {
    case Scenario::theorem1:
      if (!(p > 1.0 && p <= p0_threshold()))
        throw ConfigError("theorem1 needs 1 < p <= p0 = " + format_double(p0_threshold()));
      if (!params.is_burgers()) throw ConfigError("theorem1 needs the Burgers flux");
      break;
    case Scenario::theorem2:
      if (p != 1.0) throw ConfigError("theorem2 needs p = 1");
      if (!params.is_burgers()) throw ConfigError("theorem2 needs the Burgers flux");
      break;
    case Scenario::theorem3:
      if (p != 1.0) throw ConfigError("theorem3 needs p = 1");
      if (params.is_burgers()) throw ConfigError("theorem3 needs a non-Burgers convex flux");
      if (!zero_mass_shift) throw ConfigError("theorem3 needs zero_mass_shift = true");
      break;
    case Scenario::custom: break;
  }
  if (zero_mass_shift && solver.frame == Frame::co_moving_shift)
    throw ConfigError("zero_mass_shift needs frame fixed or co-moving-gamma");
  if (!(initial.dx > 0.0) || !(initial.x_max > initial.x_min))
    throw ConfigError("need dx > 0 and x_max > x_min");
  const double cells = (initial.x_max - initial.x_min) / initial.dx;
  if (std::abs(cells - std::round(cells)) > 1e-6 * cells)
    throw ConfigError("domain length must be a multiple of dx");
  const double outs = solver.t_end / solver.output_dt;
  if (std::abs(outs - std::round(outs)) > 1e-9 * outs)
    throw ConfigError("t_end must be a multiple of output_dt");
  if (!(initial.width > 0.0)) throw ConfigError("perturbation width must be positive");
  if (!(c0 >= 0.0)) throw ConfigError("c0 must be >= 0");
  if (!(tolerance_factor >= 1.0)) throw ConfigError("tolerance_factor must be >= 1");
  if (!(delta >= 0.0)) throw ConfigError("delta must be >= 0");
  if (!(floor_rel >= 0.0) || !(floor_abs >= 0.0) || !(floor_stationary_tol >= 0.0))
    throw ConfigError("floor tolerances must be >= 0");
  if (!(dissipation_tol >= 0.0) || !(l1_factor >= 1.0) || !(shift_bound_tol >= 0.0) || !(phi_tol >= 0.0))
    throw ConfigError("check tolerances out of range");
  if (!(profile_margin >= 0.0) || !(profile_spacing > 0.0))
    throw ConfigError("profile_margin must be >= 0 and profile_spacing > 0");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

std::pair<double, double> ExperimentConfig::rate_exponents() const {
  const bool burgers = flux == "burgers";
  if (scenario == Scenario::theorem3 || (scenario == Scenario::custom && !burgers))
    return {0.125 - delta, 1.0 / 6.0 - delta};
  if (scenario == Scenario::theorem2 || p == 1.0) return {0.25, 1.0 / 6.0};
  return {1.0 / (4.0 * p), 1.0 / (2.0 * p * (p + 3.0))};
}

Json CheckResult::to_json() const {
  return {{"name", name},     {"pass", pass},           {"value", json_number(value)},
          {"threshold", json_number(threshold)}, {"at_t", json_number(at_t)}, {"detail", detail}};
}

std::vector<CheckResult> energy_checks(const TimeSeries& ts, const ExperimentConfig& config) {
  std::vector<CheckResult> out;
  const auto& r = ts.records;
  if (r.empty()) return out;
  const double dx2 = config.initial.dx * config.initial.dx;

  // ||v - U||_2^2 between consecutive outputs.
  CheckResult energy = make_check("energy_nonincreasing");
  double worst_excess = -std::numeric_limits<double>::infinity();
  double max_increase = 0.0;
  for (std::size_t k = 1; k < r.size(); ++k) {
    const double inc = r[k].l2 * r[k].l2 - r[k - 1].l2 * r[k - 1].l2;
    const double tol = 1e-8 + 10.0 * dx2 * static_cast<double>(r[k].steps - r[k - 1].steps);
    max_increase = std::max(max_increase, inc);
    if (inc - tol > worst_excess) {
      worst_excess = inc - tol;
      energy.value = inc;
      energy.threshold = tol;
      energy.at_t = r[k].t;
    }
    if (inc > tol) energy.pass = false;
  }
  energy.detail = "largest increase of ||v-U||_2^2 " + format_double(max_increase);
  out.push_back(energy);

  CheckResult diss = make_check("dissipation_nonnegative");
  diss.value = std::numeric_limits<double>::infinity();
  diss.threshold = -config.dissipation_tol;
  for (const auto& rec : r)
    if (rec.dissipation < diss.value) {
      diss.value = rec.dissipation;
      diss.at_t = rec.t;
    }
  diss.pass = diss.value >= diss.threshold;
  diss.detail = "minimum of D(t)";
  out.push_back(diss);

  CheckResult l1 = make_check("l1_contraction");
  l1.threshold = config.l1_factor;
  const double l1_0 = r.front().l1_lab;
  for (const auto& rec : r) {
    const double ratio = l1_0 > 0.0 ? rec.l1_lab / l1_0 : (rec.l1_lab > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    if (ratio > l1.value) {
      l1.value = ratio;
      l1.at_t = rec.t;
    }
  }
  l1.pass = l1.value <= l1.threshold;
  l1.detail = "max ||u(t) - U(. - gamma t)||_1 / ||u0 - U||_1";
  out.push_back(l1);

  CheckResult shift = make_check("shift_bound");
  if (config.zero_mass_shift) {
    shift.detail = "not applicable: X is the zero-mass shift, X' = gamma";
  } else {
    shift.value = -std::numeric_limits<double>::infinity();
    for (const auto& rec : r) {
      const double excess = rec.shift_gap - rec.shift_bound;
      if (excess > shift.value) {
        shift.value = excess;
        shift.at_t = rec.t;
      }
    }
    shift.threshold = config.shift_bound_tol;
    shift.pass = shift.value <= shift.threshold;
    shift.detail = "max of |X' - gamma| - (u- - u+)^(1/p - 1/2) ||v - U||_2";
  }
  out.push_back(shift);

  if (config.p == 1.0) {
    CheckResult mp = make_check("max_principle");
    const double bound = std::max(std::abs(r.front().u_max), std::abs(r.front().u_min));
    for (const auto& rec : r) {
      const double m = std::max(std::abs(rec.u_max), std::abs(rec.u_min));
      if (m > mp.value) {
        mp.value = m;
        mp.at_t = rec.t;
      }
    }
    mp.threshold = bound * (1.0 + 4.0 * std::numeric_limits<double>::epsilon());
    mp.pass = mp.value <= mp.threshold;
    mp.detail = "max_t ||u(t)||_inf against ||u0||_inf";
    out.push_back(mp);
  }

  if (config.antiderivative) {
    CheckResult phi = make_check("phi_nonincreasing");
    const double t_from = config.fit_t_a >= 0.0 ? config.fit_t_a : r.back().t / 10.0;
    phi.threshold = config.phi_tol;
    phi.value = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < r.size(); ++k) {
      if (r[k - 1].t < t_from) continue;
      const double inc = r[k].phi_l2 - r[k - 1].phi_l2;
      if (!(inc <= phi.value) || std::isnan(inc)) {
        phi.value = inc;
        phi.at_t = r[k].t;
      }
    }
    phi.pass = !std::isnan(phi.value) && phi.value <= phi.threshold;
    phi.detail = "largest increase of ||Phi||_2 between outputs after t = " + format_double(t_from);
    out.push_back(phi);
  }
  return out;
}

RunResult run(const ExperimentConfig& config) {
  const auto wall0 = std::chrono::steady_clock::now();
  RunResult res;
  ShockParams params;
  try {
    config.validate();
    params = config.shock_params();
    std::filesystem::create_directories(config.output_dir / "snapshots");
    write_text_file(config.output_dir / ".write_test", "");
    std::filesystem::remove(config.output_dir / ".write_test");
  } catch (const std::exception& e) {
    res.exit_code = kExitConfig;
    res.error = e.what();
    return res;
  }
  const std::filesystem::path dir = config.output_dir;

  Profile profile;
  std::optional<double> zero_mass_y;
  try {
    const double lo = config.initial.x_min - config.profile_margin;
    const double hi = config.initial.x_max + config.profile_margin;
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / config.profile_spacing)) + 1;
    profile = make_profile(params, lo, hi, n);
    if (config.zero_mass_shift)
      zero_mass_y = mass_shift(initial_state(profile, config.initial), profile, params).y;
  } catch (const std::exception& e) {
    res.exit_code = kExitConfig;
    res.error = e.what();
    return res;
  }

  {
    std::ostringstream csv;
    write_profile_csv(profile, csv);
    write_text_file(dir / "profile.csv", csv.str());
    write_json_file(dir / "profile.json", {{"u_minus", json_number(params.u_minus)},
                                           {"u_plus", json_number(params.u_plus)},
                                           {"p", json_number(params.p)},
                                           {"gamma", json_number(params.gamma)},
                                           {"flux", params.flux.name()},
                                           {"x_L", json_number(profile.x_L())},
                                           {"x_R", json_number(profile.x_R())}});
  }

  const auto n_out = static_cast<std::size_t>(std::llround(config.solver.t_end / config.solver.output_dt));
  std::set<std::size_t> snap;
  if (config.snapshots == 0) {
    for (std::size_t k = 0; k <= n_out; ++k) snap.insert(k);
  } else {
    for (std::size_t j = 0; j <= config.snapshots; ++j) snap.insert(j * n_out / config.snapshots);
  }
  Json snapshot_index = Json::array();

  MetricsSchedule schedule;
  schedule.c0 = config.c0;
  schedule.zero_mass_shift = config.zero_mass_shift;
  schedule.antiderivative = config.antiderivative;
  schedule.on_output = [&](const GridState& s, const Record& rec) {
    const auto k = static_cast<std::size_t>(std::llround(rec.t / config.solver.output_dt));
    if (!snap.count(k)) return;
    std::ostringstream name;
    name << "u_" << std::setw(6) << std::setfill('0') << k << ".csv";
    std::ostringstream csv;
    csv << "x,u\n";
    for (std::size_t i = 0; i < s.size(); ++i)
      csv << format_double(s.x(i) + s.frame_offset) << ',' << format_double(s.values[i]) << '\n';
    write_text_file(dir / "snapshots" / name.str(), csv.str());
    snapshot_index.push_back({{"t", json_number(rec.t)}, {"file", "snapshots/" + name.str()}});
  };

  const auto [r2, rinf] = config.rate_exponents();
  try {
    res.series = simulate(profile, config.initial, params, config.solver, schedule);
    if (config.check_rates && config.floor_correction) {
      InitialData quiet = config.initial;
      quiet.kind = PerturbationKind::none;
      quiet.base_shift = zero_mass_y.value_or(0.0);
      MetricsSchedule fs;
      fs.c0 = config.c0;
      fs.zero_mass_shift = config.zero_mass_shift;
      fs.stationary_tol = config.floor_stationary_tol;
      res.floor_series = simulate(profile, quiet, params, config.solver, fs);
    }
  } catch (const BlowUpError& e) {
    res.exit_code = kExitBlowUp;
    res.error = e.what();
  } catch (const std::exception& e) {
    res.exit_code = kExitConfig;
    res.error = e.what();
  }

  if (res.exit_code == kExitOk) {
    write_series(dir / "timeseries.csv", res.series, false);
    write_series(dir / "diagnostics.csv", res.series, true);
    if (!res.floor_series.records.empty()) write_series(dir / "floor_timeseries.csv", res.floor_series, false);

    if (config.check_rates) {
      const auto t = res.series.times();
      for (const auto& [name, r] : {std::pair<std::string, double>{"l2", r2}, {"linf", rinf}}) {
        RateOptions opt;
        opt.t_a = config.fit_t_a;
        opt.t_b = config.fit_t_b;
        opt.tolerance_factor = config.tolerance_factor;
        if (config.floor_correction) {
          opt.floor = res.floor_series.column(name);
          opt.floor_rel = config.floor_rel;
          opt.floor_abs = config.floor_abs;
        }
        CheckResult c = make_check("rate_" + name);
        c.threshold = r;
        try {
          RateFit fit = fit_decay_rate(t, res.series.column(name), r, opt, name);
          c.pass = fit.pass;
          c.value = fit.sup_ratio_last_decade;
          c.detail = "sup ratio last decade " + format_double(fit.sup_ratio_last_decade) +
                     " vs median " + format_double(fit.sup_ratio_median);
          res.rates.push_back(std::move(fit));
        } catch (const Error& e) {
          c.pass = false;
          c.detail = e.what();
        }
        res.checks.push_back(c);
      }
    }
    if (config.check_energy)
      for (auto& c : energy_checks(res.series, config)) res.checks.push_back(std::move(c));
    const bool all = std::all_of(res.checks.begin(), res.checks.end(), [](const CheckResult& c) { return c.pass; });
    res.exit_code = all ? kExitOk : kExitCheckFailed;
  }

  Json rates = Json::array();
  for (const auto& f : res.rates) rates.push_back(f.to_json());
  if (res.exit_code == kExitOk || res.exit_code == kExitCheckFailed) write_json_file(dir / "rates.json", rates);

  Json checks = Json::array();
  for (const auto& c : res.checks) checks.push_back(c.to_json());
  const Json cfg = config.to_json();
  Json summary = {{"config", cfg},
                  {"config_digest", digest(cfg.dump())},
                  {"exit_code", res.exit_code},
                  {"error", res.error},
                  {"pass", res.exit_code == kExitOk},
                  {"shock", {{"gamma", json_number(params.gamma)},
                             {"x_L", json_number(profile.x_L())},
                             {"x_R", json_number(profile.x_R())},
                             {"c0", json_number(config.c0 > 0.0 ? config.c0 : default_c0(params.p))}}},
                  {"theoretical_r", {{"l2", json_number(r2)}, {"linf", json_number(rinf)}}},
                  {"warnings", res.series.warnings},
                  {"rates", rates},
                  {"checks", checks},
                  {"snapshots", snapshot_index},
                  {"timing_file", "timing.json"}};
  if (zero_mass_y) summary["zero_mass_shift_y"] = json_number(*zero_mass_y);
  if (!res.series.records.empty()) {
    const Record& last = res.series.records.back();
    summary["final"] = {{"t", json_number(last.t)},       {"X", json_number(last.X)},
                        {"Xdot", json_number(last.Xdot)}, {"l1", json_number(last.l1)},
                        {"l2", json_number(last.l2)},     {"linf", json_number(last.linf)},
                        {"dissipation", json_number(last.dissipation)},
                        {"mass_residual", json_number(last.mass_residual)},
                        {"steps", last.steps}};
  }
  if (!res.floor_series.records.empty()) {
    const Record& fl = res.floor_series.records.back();
    summary["floor"] = {{"t_stationary", json_number(fl.t)},
                        {"l2", json_number(fl.l2)},
                        {"linf", json_number(fl.linf)}};
  }
  res.summary = summary;
  write_json_file(dir / "run_summary.json", summary);

  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  const std::uint64_t steps = res.series.records.empty() ? 0 : res.series.records.back().steps;
  write_json_file(dir / "timing.json",
                  {{"wall_seconds", res.wall_seconds},
                   {"steps", steps},
                   {"seconds_per_step", steps > 0 ? res.wall_seconds / static_cast<double>(steps) : 0.0}});
  return res;
}

Json SweepReport::to_json() const {
  Json rows = Json::array();
  for (const auto& e : entries) {
    Json rates = Json::array();
    for (const auto& f : e.rates) rates.push_back(f.to_json());
    rows.push_back({{"key", e.key},
                    {"p", json_number(e.p)},
                    {"scenario", e.scenario},
                    {"output_dir", e.output_dir.generic_string()},
                    {"exit_code", e.exit_code},
                    {"error", e.error},
                    {"rates", rates}});
  }
  return {{"entries", rows}, {"exit_code", exit_code}};
}

SweepReport sweep(const std::vector<ExperimentConfig>& configs, std::size_t parallelism) {
  std::set<std::filesystem::path> seen;
  for (const auto& c : configs) {
    const auto key = std::filesystem::weakly_canonical(std::filesystem::absolute(c.output_dir));
    if (!seen.insert(key).second)
      throw ConfigError("duplicate output directory in sweep: " + c.output_dir.string());
  }
  SweepReport report;
  report.entries.resize(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      const ExperimentConfig& c = configs[i];
      SweepEntry& e = report.entries[i];
      e.p = c.p;
      e.scenario = to_string(c.scenario);
      e.key = "p=" + format_double(c.p) + ",scenario=" + e.scenario;
      e.output_dir = c.output_dir;
      try {
        RunResult r = run(c);
        e.exit_code = r.exit_code;
        e.error = r.error;
        e.rates = std::move(r.rates);
      } catch (const std::exception& ex) {
        e.exit_code = kExitConfig;
        e.error = ex.what();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(parallelism, configs.size()));
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k + 1 < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::stable_sort(report.entries.begin(), report.entries.end(), [](const SweepEntry& a, const SweepEntry& b) {
    return std::tie(a.p, a.scenario, a.output_dir) < std::tie(b.p, b.scenario, b.output_dir);
  });
  for (const auto& e : report.entries)
    if (e.exit_code != 0) report.exit_code = kExitCheckFailed;
  return report;
}

}  // namespace vshock
