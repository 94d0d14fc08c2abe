/*
   Copyright 2026 The warptube Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// warptube command-line tool.
//
// Exit codes: classify 0 Recurrent, 1 Transient, 2 Inapplicable;
// lyapunov-verify 0 pass, 1 a check failed; other commands 0 on success.
// 64 configuration or usage error, 70 runtime error.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11/CLI11.hpp>

#include "warptube/warptube.hpp"

namespace fs = std::filesystem;
using namespace warptube;

namespace {

constexpr int kExitConfig = 64;
constexpr int kExitRuntime = 70;

// Shortest round-trip text for CSV cells.
struct Num {
  double v;
  friend std::ostream& operator<<(std::ostream& os, Num n) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, n.v);
    return os.write(buf, res.ptr - buf);
  }
};

const char* kFooter = R"(CSV outputs (when enabled):
  classify, audit   pointwise.csv  id,s,value
                    windows.csv    check,k,log_window,ratio
  lyapunov-verify   lyapunov.csv   s,gamma_minus,gamma_plus,psi_plus,psi_minus
  simulate          paths.csv      path_index,exit_side,exit_time   (sim.records)
                    scan.csv       b,p_hit_b_first,stderr,n_censored (sim.b_list)
  scan              scan.csv       alpha,verdict,I_kind,audit
  profile-build     profile.csv    s,radius,theta,phi
Each CSV comes with a plot_<name>.py stub (pandas + matplotlib).
Exit codes: classify 0 Recurrent / 1 Transient / 2 Inapplicable; lyapunov-verify
0 pass / 1 fail; 64 configuration error; 70 runtime error.)";

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool json = false;
};

class Output {
 public:
  Output(const RunConfig& cfg, const Globals& g) : cfg_(cfg), g_(g) {
    dir_ = g.out.empty() ? fs::path(cfg.output.dir) : fs::path(g.out);
    fs::create_directories(dir_);
  }

  void report(const std::string& name, const Json& j) const {
    if (cfg_.output.json) {
      std::ofstream f(dir_ / (name + ".json"));
      f << j.dump(2) << '\n';
    }
    if (g_.json) std::cout << j.dump(2) << '\n';
  }

  bool csv_enabled() const { return cfg_.output.csv; }

  std::ofstream csv(const std::string& name, const std::string& header, const std::string& x,
                    const std::string& ys, bool logx) const {
    std::ofstream stub(dir_ / ("plot_" + name + ".py"));
    stub << "# Plot stub written by warptube. Needs pandas and matplotlib.\n"
         << "import pandas as pd\nimport matplotlib.pyplot as plt\n\n"
         << "df = pd.read_csv(\"" << name << ".csv\")\n"
         << "ax = df.plot(x=\"" << x << "\", y=[" << ys << "], logx=" << (logx ? "True" : "False")
         << ")\n"
         << "ax.figure.savefig(\"" << name << ".png\", dpi=150)\n";
    std::ofstream f(dir_ / (name + ".csv"));
    f << header << '\n';
    return f;
  }

 private:
  const RunConfig& cfg_;
  const Globals& g_;
  fs::path dir_;
};

ClassifierOptions classifier_options(const RunConfig& cfg) {
  ClassifierOptions o;
  if (cfg.classifier.s0) o.s0 = *cfg.classifier.s0;
  if (cfg.classifier.horizon) o.horizon = *cfg.classifier.horizon;
  o.thresholds = cfg.classifier.thresholds;
  return o;
}

void write_audit_csv(const Output& out, const HypothesisAudit& a) {
  if (!out.csv_enabled()) return;
  {
    auto f = out.csv("pointwise", "id,s,value", "s", "\"value\"", true);
    for (const auto& e : a.pointwise) {
      for (std::size_t i = 0; i < e.s.size(); ++i) f << e.id << ',' << Num{e.s[i]} << ',' << Num{e.values[i]} << '\n';
    }
  }
  auto f = out.csv("windows", "check,k,log_window,ratio", "k", "\"ratio\"", false);
  for (const auto& e : a.integral) {
    const auto& v = e.verdict;
    for (std::size_t k = 0; k < v.log_windows.size(); ++k) {
      f << e.id << ',' << k << ',' << Num{v.log_windows[k]} << ',';
      if (k > 0 && k - 1 < v.window_ratios.size()) f << Num{v.window_ratios[k - 1]};
      f << '\n';
    }
  }
}

int cmd_classify(const RunConfig& cfg, const Output& out) {
  const auto dom = make_domain(cfg.domain);
  const auto rep = classify(dom, classifier_options(cfg));
  out.report("classification", classification_json(dom, rep));
  write_audit_csv(out, rep.audit);
  switch (rep.verdict) {
    case Verdict::Recurrent: return 0;
    case Verdict::Transient: return 1;
    default: return 2;
  }
}

int cmd_audit(const RunConfig& cfg, const Output& out) {
  const auto dom = make_domain(cfg.domain);
  const auto w = resolve_window(dom, classifier_options(cfg));
  const auto a = hypothesis_audit(dom, w.s0, w.horizon, cfg.classifier.thresholds);
  out.report("audit", audit_json(dom, a));
  write_audit_csv(out, a);
  return 0;
}

int cmd_lyapunov(const RunConfig& cfg, const Output& out) {
  const auto dom = make_domain(cfg.domain);
  const auto& lc = cfg.lyapunov;
  const double lo = lc.s0.value_or(dom.s_start + 1.0);
  const double limit = representable_limit(dom, lo, std::max(lo * 1e6, 1e6));
  const double s0 = chart_s0(dom, lo, std::max(lo, limit / 2.0), lc.r_points);
  double s_max = lc.s_max.value_or(std::min(256.0 * s0, limit));
  if (!(s_max > s0)) throw DomainError("lyapunov s_max must exceed the chart start " + std::to_string(s0));
  LyapunovOptions opts;
  opts.r_points = lc.r_points;
  const auto table = psi_pair(dom, s0, s_max, opts);
  const auto grid = geometric_grid(s0, s_max, std::pow(s_max / s0, 1.0 / (lc.s_points - 1)));
  LyapunovVerifyResult r;
  r.s0 = s0;
  r.s_max = s_max;
  r.s_points = static_cast<int>(grid.size());
  r.r_points = lc.r_points;
  r.sandwich = verify_sandwich(dom, grid, lc.r_points, std::nullopt, lc.tolerance);
  r.sign = verify_sign(dom, table, grid, lc.r_points, lc.tolerance);
  r.asymptotic = asymptotic_match(dom, table);
  r.table_K = table.K();
  out.report("lyapunov", lyapunov_json(dom, r));
  if (out.csv_enabled()) {
    auto f = out.csv("lyapunov", "s,gamma_minus,gamma_plus,psi_plus,psi_minus", "s",
                     "\"psi_plus\", \"psi_minus\"", true);
    const auto& s = table.s_grid();
    for (std::size_t k = 0; k < s.size(); ++k) {
      f << Num{s[k]} << ',' << Num{table.gamma(Side::Minus)[2 * k]} << ','
        << Num{table.gamma(Side::Plus)[2 * k]}
        << ',' << Num{std::exp(table.log_psi_nodes(Side::Plus)[k])} << ','
        << Num{std::exp(table.log_psi_nodes(Side::Minus)[k])} << '\n';
    }
  }
  return r.sandwich.passed && r.sign.passed ? 0 : 1;
}

const char* side_name(ExitSide s) {
  switch (s) {
    case ExitSide::Lower: return "a";
    case ExitSide::Upper: return "b";
    default: return "censored";
  }
}

int cmd_simulate(const RunConfig& cfg, const Output& out, const Globals& g) {
  const auto dom = make_domain(cfg.domain);
  auto sc = cfg.sim;
  if (g.seed) sc.sim.master_seed = *g.seed;
  if (!sc.b_list.empty()) {
    const auto scan = recurrence_scan(dom, sc.s0, sc.r0, sc.a, sc.b_list, sc.sim);
    out.report("recurrence_scan", recurrence_scan_json(dom, scan));
    if (out.csv_enabled()) {
      auto f = out.csv("scan", "b,p_hit_b_first,stderr,n_censored", "b", "\"p_hit_b_first\"", true);
      for (const auto& row : scan.rows) {
        f << Num{row.b} << ',' << Num{row.stats.p_hit_b_first} << ',' << Num{row.stats.stderr} << ','
          << row.stats.n_censored << '\n';
      }
    }
    return 0;
  }
  std::vector<PathRecord> recs;
  const auto st = exit_probability(dom, sc.s0, sc.r0, sc.a, sc.b, sc.sim, sc.records ? &recs : nullptr);
  std::optional<ExitBounds> bounds;
  if (sc.bounds) {
    const double cs = chart_s0(dom, std::min(sc.a, dom.s_start + 1.0), sc.a);
    const auto table = psi_pair(dom, cs, sc.b);
    bounds = lyapunov_exit_bounds(dom, table, sc.s0, sc.a, sc.b);
  }
  out.report("simulation", simulation_json(dom, st, sc.sim.master_seed, bounds ? &*bounds : nullptr));
  if (sc.records && out.csv_enabled()) {
    auto f = out.csv("paths", "path_index,exit_side,exit_time", "path_index", "\"exit_time\"", false);
    for (const auto& r : recs) f << r.path_index << ',' << side_name(r.exit_side) << ',' << Num{r.exit_time} << '\n';
  }
  return 0;
}

int cmd_scan(const RunConfig& cfg, const Output& out) {
  const auto& sc = cfg.scan;
  std::vector<double> alphas;
  const int n = static_cast<int>(std::floor((sc.alpha_max - sc.alpha_min) / sc.alpha_step + 1e-9));
  for (int i = 0; i <= n; ++i) alphas.push_back(std::round((sc.alpha_min + i * sc.alpha_step) * 1e12) / 1e12);
  auto family = [&](double alpha) {
    auto dc = cfg.domain;
    std::ostringstream id;
    id << sc.f_family << '(' << std::setprecision(12) << alpha << ')';
    dc.f = id.str();
    return make_domain(dc);
  };
  const auto res = threshold_scan(family, alphas, classifier_options(cfg));
  out.report("scan", scan_json(sc.f_family, res));
  if (out.csv_enabled()) {
    auto f = out.csv("scan", "alpha,verdict,I_kind,audit", "alpha", "\"alpha\"", false);
    for (const auto& r : res.rows) {
      f << Num{r.alpha} << ',' << to_string(r.verdict) << ',' << to_string(r.I_kind) << ','
        << to_string(r.audit) << '\n';
    }
  }
  return 0;
}

int cmd_profile_build(const RunConfig& cfg, const Output& out) {
  const auto& pc = cfg.profile_build;
  const auto pair = schwarzschild_build(pc.m, pc.eps, pc.p, pc.s_max);
  Json j = {{"schema_version", kSchemaVersion}, {"kind", "profile"}, {"m", pc.m}, {"eps", pc.eps},
            {"p", pc.p}, {"s_max", pc.s_max}, {"horizon_radius", pair.horizon_radius}};
  Json s = Json::array(), radius = Json::array(), theta = Json::array(), phi = Json::array();
  for (int i = 0; i < pc.points; ++i) {
    const double t = pc.s_max * i / (pc.points - 1);
    s.push_back(t);
    radius.push_back(pair.table->radius(t));
    theta.push_back(pair.theta(t));
    phi.push_back(pair.phi(t));
  }
  j["table"] = {{"s", s}, {"radius", radius}, {"theta", theta}, {"phi", phi}};
  out.report("profile", j);
  if (out.csv_enabled()) {
    auto f = out.csv("profile", "s,radius,theta,phi", "s", "\"theta\", \"phi\"", false);
    for (std::size_t i = 0; i < s.size(); ++i) {
      f << Num{s[i].get<double>()} << ',' << Num{radius[i].get<double>()} << ','
        << Num{theta[i].get<double>()} << ',' << Num{phi[i].get<double>()} << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrence and transience of reflected Brownian motion in warped tubes"};
  app.footer(kFooter);
  app.require_subcommand(1, 1);
  Globals g;
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory (overrides output.dir)");
  app.add_option("--seed", g.seed, "master seed (overrides sim.master_seed)");
  app.add_flag("--json", g.json, "also print the JSON report to stdout");
  auto* classify_cmd = app.add_subcommand("classify", "integral test with hypothesis audit");
  auto* audit_cmd = app.add_subcommand("audit", "hypothesis audit only");
  auto* lyap_cmd = app.add_subcommand("lyapunov-verify", "Lyapunov sandwich, sign and asymptotic checks");
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo exit probabilities");
  auto* scan_cmd = app.add_subcommand("scan", "threshold scan over an f family");
  auto* prof_cmd = app.add_subcommand("profile-build", "tabulate the Schwarzschild-type profiles");
  for (auto* c : {classify_cmd, audit_cmd, lyap_cmd, sim_cmd, scan_cmd, prof_cmd}) c->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  try {
    const RunConfig cfg = g.config.empty() ? RunConfig{} : load_config(g.config);
    const Output out(cfg, g);
    if (*classify_cmd) return cmd_classify(cfg, out);
    if (*audit_cmd) return cmd_audit(cfg, out);
    if (*lyap_cmd) return cmd_lyapunov(cfg, out);
    if (*sim_cmd) return cmd_simulate(cfg, out, g);
    if (*scan_cmd) return cmd_scan(cfg, out);
    if (*prof_cmd) return cmd_profile_build(cfg, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
