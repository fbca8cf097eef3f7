// Command line front-end: profile, simulate, rates, lemmas, poincare, sweep.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vshock/errors.hpp"
#include "vshock/experiment.hpp"
#include "vshock/io.hpp"
#include "vshock/lemma_lab.hpp"
#include "vshock/metrics.hpp"
#include "vshock/shock_profile.hpp"

namespace fs = std::filesystem;
using namespace vshock;

namespace {

// Relative paths land under $VSHOCK_OUTPUT_ROOT when it is set.
fs::path resolve_output(const fs::path& p) {
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("VSHOCK_OUTPUT_ROOT"); root && *root) return fs::path(root) / p;
  return p;
}

std::string flag_name(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

struct ConfigFlags {
  std::string config_file;
  std::string scenario;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;  // key -> raw flag value
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.config_file, "TOML or JSON config file");
  cmd->add_option("--set", flags.sets, "key=value override (repeatable)");
  for (const auto& [key, kind] : ExperimentConfig::keys()) {
    if (key == "scenario") {
      cmd->add_option("--scenario", flags.scenario, "theorem1 | theorem2 | theorem3 | custom");
      continue;
    }
    cmd->add_option_function<std::string>(
        flag_name(key), [&flags, key = key](const std::string& v) { flags.values[key] = v; },
        std::string("config key ") + key + (kind == 'b' ? " (true/false)" : ""));
  }
}

ExperimentConfig build_config(const ConfigFlags& flags, const std::string& default_dir) {
  ExperimentConfig c;
  if (!flags.config_file.empty()) {
    nlohmann::json doc = ExperimentConfig::load_document(flags.config_file);
    // A scenario flag picks the preset underneath the file's keys.
    if (!flags.scenario.empty()) {
      if (doc.is_object() && doc.contains("scenario") && doc["scenario"] != flags.scenario)
        throw ConfigError("--scenario conflicts with the config file's scenario");
      if (doc.is_object()) doc["scenario"] = flags.scenario;
    }
    c = ExperimentConfig::from_json(doc);
  } else {
    c = ExperimentConfig::preset(flags.scenario.empty() ? Scenario::custom : scenario_from_string(flags.scenario));
    c.output_dir = default_dir.empty() ? fs::path(to_string(c.scenario)) : fs::path(default_dir);
  }
  for (const auto& [k, v] : flags.values) c.set(k, v);
  for (const auto& s : flags.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    c.set(s.substr(0, eq), s.substr(eq + 1));
  }
  c.output_dir = resolve_output(c.output_dir);
  return c;
}

void print_checks(const RunResult& r) {
  for (const auto& f : r.rates)
    std::cout << "rate " << f.norm << " r=" << format_double(f.theoretical_r) << " slope=" << format_double(f.slope)
              << " (" << f.slope_basis << ") sup_ratio_last=" << format_double(f.sup_ratio_last_decade)
              << " median=" << format_double(f.sup_ratio_median) << (f.pass ? " PASS" : " FAIL") << '\n';
  for (const auto& c : r.checks)
    if (c.name.rfind("rate_", 0) != 0)
      std::cout << "check " << c.name << " value=" << format_double(c.value) << " threshold="
                << format_double(c.threshold) << (c.pass ? " PASS" : " FAIL") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Viscous shock stability experiments"};
  app.require_subcommand(1);

  // profile
  auto* prof = app.add_subcommand("profile", "Tabulate the traveling-wave profile");
  double pp = 1.0, pum = 1.0, pup = -1.0, pxmin = -40.0, pxmax = 40.0;
  std::size_t pn = 8001;
  std::string pflux = "burgers", pout = "profile";
  prof->add_option("--p", pp, "viscosity exponent p >= 1");
  prof->add_option("--u-minus", pum);
  prof->add_option("--u-plus", pup);
  prof->add_option("--flux", pflux, "burgers | quartic | polynomial:c2,c3,...");
  prof->add_option("--xi-min", pxmin);
  prof->add_option("--xi-max", pxmax);
  prof->add_option("--n", pn, "table points");
  prof->add_option("--output", pout, "output directory");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run one scenario and its checks");
  ConfigFlags sim_flags;
  add_config_flags(sim, sim_flags);

  // rates
  auto* rates = app.add_subcommand("rates", "Sup-ratio decay test on a time series CSV");
  std::string r_ts, r_floor, r_norm = "l2", r_out;
  double r_r = 0.25, r_ta = -1.0, r_tb = -1.0, r_tol = 1.1, r_frel = 1e-6, r_fabs = 1e-10;
  rates->add_option("--timeseries", r_ts, "timeseries.csv")->required();
  rates->add_option("--norm", r_norm, "column name, e.g. l2 or linf");
  rates->add_option("--r", r_r, "theoretical exponent");
  rates->add_option("--t-a", r_ta);
  rates->add_option("--t-b", r_tb);
  rates->add_option("--tolerance-factor", r_tol);
  rates->add_option("--floor", r_floor, "floor_timeseries.csv of an unperturbed run");
  rates->add_option("--floor-rel", r_frel);
  rates->add_option("--floor-abs", r_fabs);
  rates->add_option("--output", r_out, "write the rate JSON here");

  // lemmas
  auto* lem = app.add_subcommand("lemmas", "Lemma certificates");
  bool l_p0 = false, l_scans = false, l_ode = false;
  std::string l_out;
  std::size_t l_pairs = 100000, l_theta = 100001;
  std::uint64_t l_seed = 20240531;
  lem->add_flag("--p0", l_p0, "threshold p0 only (with --scans/--ode: those parts)");
  lem->add_flag("--scans", l_scans);
  lem->add_flag("--ode", l_ode);
  lem->add_option("--random-pairs", l_pairs);
  lem->add_option("--theta-points", l_theta);
  lem->add_option("--seed", l_seed);
  lem->add_option("--output", l_out, "write the certificate JSON here");

  // poincare
  auto* poi = app.add_subcommand("poincare", "Weighted Poincare checks on random trigonometric polynomials");
  std::size_t q_trials = 200;
  std::uint64_t q_seed = 7;
  int q_degree = 6;
  double q_um = 1.0, q_up = -1.0;
  std::string q_out;
  poi->add_option("--trials", q_trials);
  poi->add_option("--seed", q_seed);
  poi->add_option("--degree", q_degree);
  poi->add_option("--u-minus", q_um);
  poi->add_option("--u-plus", q_up);
  poi->add_option("--output", q_out);

  // sweep
  auto* swp = app.add_subcommand("sweep", "Run several configs and merge their rate reports");
  std::vector<std::string> s_configs;
  std::vector<double> s_ps;
  std::string s_scenario = "theorem1", s_root = "sweep";
  std::vector<std::string> s_sets;
  std::size_t s_par = 1;
  swp->add_option("--configs", s_configs, "config files");
  swp->add_option("--p", s_ps, "values of p for the --scenario preset");
  swp->add_option("--scenario", s_scenario);
  swp->add_option("--set", s_sets, "key=value applied to every child");
  swp->add_option("--parallel", s_par);
  swp->add_option("--output", s_root, "sweep root directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; malformed arguments count as config errors.
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*prof) {
      const ShockParams params = ShockParams::make(pum, pup, pp, FluxSpec::from_name(pflux));
      if (pp > 2.0) std::cerr << "warning: p > 2 is outside the range covered by the stability theory\n";
      const Profile profile = make_profile(params, pxmin, pxmax, pn);
      const fs::path dir = resolve_output(pout);
      std::ostringstream csv;
      write_profile_csv(profile, csv);
      write_text_file(dir / "profile.csv", csv.str());
      const nlohmann::json meta = {{"u_minus", json_number(params.u_minus)}, {"u_plus", json_number(params.u_plus)},
                                   {"p", json_number(params.p)},             {"gamma", json_number(params.gamma)},
                                   {"flux", params.flux.name()},             {"x_L", json_number(profile.x_L())},
                                   {"x_R", json_number(profile.x_R())}};
      write_json_file(dir / "profile.json", meta);
      std::cout << meta.dump(2) << '\n';
      return kExitOk;
    }

    if (*sim) {
      const ExperimentConfig cfg = build_config(sim_flags, "");
      if (cfg.p > 2.0) std::cerr << "warning: p > 2 is outside the range covered by the stability theory\n";
      const RunResult r = run(cfg);
      if (!r.error.empty()) std::cerr << "error: " << r.error << '\n';
      for (const auto& w : r.series.warnings) std::cerr << "warning: " << w << '\n';
      print_checks(r);
      std::cout << "output: " << cfg.output_dir.string() << "\nexit: " << r.exit_code << '\n';
      return r.exit_code;
    }

    if (*rates) {
      const CsvTable ts = read_csv(r_ts);
      RateOptions opt;
      opt.t_a = r_ta;
      opt.t_b = r_tb;
      opt.tolerance_factor = r_tol;
      if (!r_floor.empty()) {
        opt.floor = read_csv(r_floor).column(r_norm);
        opt.floor_rel = r_frel;
        opt.floor_abs = r_fabs;
      }
      const RateFit fit = fit_decay_rate(ts.column("t"), ts.column(r_norm), r_r, opt, r_norm);
      if (!r_out.empty()) write_json_file(resolve_output(r_out), fit.to_json());
      std::cout << fit.to_json().dump(2) << '\n';
      return fit.pass ? kExitOk : kExitCheckFailed;
    }

    if (*lem) {
      CertificateOptions opt;
      const bool any = l_p0 || l_scans || l_ode;
      opt.p0 = !any || l_p0;
      opt.scans = !any || l_scans;
      opt.ode = !any || l_ode;
      opt.scan.random_pairs = l_pairs;
      opt.scan.theta_points = l_theta;
      opt.scan.seed = l_seed;
      const LemmaCertificate cert = lemma_certificate(opt);
      if (!l_out.empty()) write_json_file(resolve_output(l_out), cert.doc);
      std::cout << cert.doc.dump(2) << '\n';
      return cert.pass() ? kExitOk : kExitCheckFailed;
    }

    if (*poi) {
      nlohmann::json trials = nlohmann::json::array();
      bool all = true;
      const PoincareResult lin = weighted_poincare_check([](double y) { return y; }, q_up, q_um,
                                                         [](double) { return 1.0; });
      for (std::size_t k = 0; k < q_trials; ++k) {
        const TrigPolynomial w(q_seed + k, q_up, q_um, q_degree);
        const PoincareResult res = weighted_poincare_check(
            [&w](double y) { return w(y); }, q_up, q_um, [&w](double y) { return w.derivative(y); });
        all = all && res.pass;
        trials.push_back({{"seed", q_seed + k},
                          {"lhs", json_number(res.lhs)},
                          {"rhs", json_number(res.rhs)},
                          {"rhs_classical", json_number(res.rhs_classical)},
                          {"pass", res.pass}});
      }
      const nlohmann::json doc = {{"linear", {{"lhs", json_number(lin.lhs)},
                                              {"rhs", json_number(lin.rhs)},
                                              {"rhs_classical", json_number(lin.rhs_classical)},
                                              {"pass", lin.pass}}},
                                  {"trials", trials},
                                  {"pass", all && lin.pass}};
      if (!q_out.empty()) write_json_file(resolve_output(q_out), doc);
      std::cout << doc.dump(2) << '\n';
      return all && lin.pass ? kExitOk : kExitCheckFailed;
    }

    if (*swp) {
      const fs::path root = resolve_output(s_root);
      std::vector<ExperimentConfig> configs;
      for (const auto& f : s_configs) {
        ExperimentConfig c = ExperimentConfig::load(f);
        if (c.output_dir.is_relative()) c.output_dir = root / c.output_dir;
        configs.push_back(c);
      }
      for (double p : s_ps) {
        ExperimentConfig c = ExperimentConfig::preset(scenario_from_string(s_scenario));
        c.p = p;
        c.output_dir = root / (s_scenario + "_p" + format_double(p));
        configs.push_back(c);
      }
      for (auto& c : configs)
        for (const auto& s : s_sets) {
          const auto eq = s.find('=');
          if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
          c.set(s.substr(0, eq), s.substr(eq + 1));
        }
      const SweepReport rep = sweep(configs, s_par);
      write_json_file(root / "sweep_report.json", rep.to_json());
      std::cout << rep.to_json().dump(2) << '\n';
      return rep.exit_code;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << '\n';
    return kExitBlowUp;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
