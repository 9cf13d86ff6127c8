#include "curvflow/cli.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <type_traits>

#include <CLI11.hpp>

#include "curvflow/alexandrov.hpp"
#include "curvflow/error.hpp"
#include "curvflow/io.hpp"
#include "curvflow/mesh.hpp"
#include "curvflow/mullins.hpp"
#include "curvflow/vpmcf.hpp"

namespace curvflow::cli {

namespace {

using nlohmann::json;
using surface::RadialSurface;
using surface::Vec3;

constexpr const char* kVersion = "curvflow 1.0.0";

// Options of one subcommand. Values come from the flag when given, else from
// the --config file, else from the default.
class Params {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& name, T& var, const std::string& help) {
    CLI::Option* o = nullptr;
    if constexpr (std::is_same_v<T, bool>) o = app->add_flag("--" + name, var, help);
    else o = app->add_option("--" + name, var, help)->capture_default_str();
    entries_.push_back({name, o, [&var](const json& j) { var = j.get<T>(); }, [&var] { return json(var); }});
  }

  void merge(const json& cfg) {
    if (!cfg.is_object()) throw ValidationError("config file must hold a JSON object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
      bool known = false;
      for (const auto& e : entries_) known = known || e.name == it.key();
      if (!known) throw ValidationError("unknown config key " + it.key());
    }
    for (auto& e : entries_) {
      if (e.option->count() == 0 && cfg.contains(e.name)) {
        try {
          e.set(cfg[e.name]);
        } catch (const json::exception&) {
          throw ValidationError("config key " + e.name + " has the wrong type");
        }
      }
    }
  }

  json snapshot() const {
    json j = json::object();
    for (const auto& e : entries_) j[e.name] = e.get();
    return j;
  }

 private:
  struct Entry {
    std::string name;
    CLI::Option* option;
    std::function<void(const json&)> set;
    std::function<json()> get;
  };
  std::vector<Entry> entries_;
};

struct Command {
  CLI::App* app = nullptr;
  Params params;
  std::string config;
  std::string out;
  std::function<std::vector<std::string>()> run;
  const std::uint64_t* seed = nullptr;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("not a number: " + s);
}

int to_int(const std::string& s) {
  const double v = to_double(s);
  if (v != std::floor(v)) throw ValidationError("not an integer: " + s);
  return static_cast<int>(v);
}

std::vector<double> doubles(const std::string& s) {
  std::vector<double> v;
  for (const auto& p : split(s, ',')) v.push_back(to_double(p));
  return v;
}

std::pair<int, int> mode_pair(const std::string& s) {
  const auto p = split(s, ',');
  if (p.size() != 2) throw ValidationError("mode must be l,m");
  return {to_int(p[0]), to_int(p[1])};
}

// ball | mode:l,m:amp | random:seed:lmin:lmax:amp, normalized to |B_1|.
RadialSurface parse_surface(const std::string& desc, int L) {
  const auto p = split(desc, ':');
  if (p.empty()) throw ValidationError("empty initial surface");
  RadialSurface s;
  if (p[0] == "ball" && p.size() == 1) {
    s = RadialSurface::ball(L);
  } else if (p[0] == "mode" && p.size() == 3) {
    const auto [l, m] = mode_pair(p[1]);
    s = RadialSurface::mode(L, l, m, to_double(p[2]));
  } else if (p[0] == "random" && p.size() == 5) {
    s.w = s2::random_band_limited(static_cast<std::uint64_t>(to_int(p[1])), to_int(p[2]), to_int(p[3]),
                                  to_double(p[4]), L);
  } else {
    throw ValidationError("unrecognized initial surface: " + desc);
  }
  return surface::normalize(s);
}

// As parse_surface, plus balls:N:gap (N equal balls of total volume |B_1|
// on a line, gap between neighbours); centered in the torus.
std::vector<RadialSurface> parse_components(const std::string& desc, int L, double R) {
  const Vec3 mid = Vec3::Constant(R / 2);
  const auto p = split(desc, ':');
  if (!p.empty() && p[0] == "balls") {
    if (p.size() != 3) throw ValidationError("balls must be given as balls:N:gap");
    const int n = to_int(p[1]);
    const double gap = to_double(p[2]);
    if (n < 1 || !(gap > 0.0)) throw ValidationError("balls need N >= 1 and a positive gap");
    const double r = std::cbrt(1.0 / n), step = 2 * r + gap;
    std::vector<RadialSurface> out;
    for (int i = 0; i < n; ++i) out.push_back(RadialSurface::ball(L, r, mid + Vec3((i - 0.5 * (n - 1)) * step, 0, 0)));
    return out;
  }
  return {parse_surface(desc, L).translated(mid)};
}

json report_json(const surface::GeometricReport& r) {
  return {{"perimeter", r.perimeter},
          {"volume", r.volume},
          {"volume_divergence", r.volume_divergence},
          {"mean_curvature_avg", r.mean_curvature_avg},
          {"oscillation", r.oscillation},
          {"traceless_energy", r.traceless_energy},
          {"willmore", r.willmore},
          {"mean_curvature_sq", r.mean_curvature_sq},
          {"total_gauss_curvature", r.total_gauss_curvature},
          {"barycenter", {r.barycenter.x(), r.barycenter.y(), r.barycenter.z()}},
          {"diameter", r.diameter}};
}

json topology_json(const mesh::Topology& t) {
  return {{"vertices", t.vertices}, {"edges", t.edges}, {"faces", t.faces}, {"euler", t.euler}, {"genus", t.genus}};
}

// Union-wide Hbar and oscillation from per-component reports.
struct UnionStats {
  double perimeter = 0, volume = 0, hbar = 0, osc = 0;
};
UnionStats union_stats(const std::vector<RadialSurface>& comps) {
  UnionStats u;
  std::vector<surface::GeometricReport> reps;
  double ih = 0.0;
  for (const auto& s : comps) {
    reps.push_back(surface::report(s));
    u.perimeter += reps.back().perimeter;
    u.volume += reps.back().volume;
    ih += reps.back().mean_curvature_avg * reps.back().perimeter;
  }
  u.hbar = ih / u.perimeter;
  for (const auto& r : reps) u.osc += r.oscillation + r.perimeter * std::pow(r.mean_curvature_avg - u.hbar, 2);
  return u;
}

void write_manifest(const Command& c, const std::vector<std::string>& args, double seconds,
                    const std::vector<std::string>& outputs) {
  std::string line = "curvflow";
  for (const auto& a : args) line += " " + a;
  json m = {{"command_line", line},
            {"config", c.params.snapshot()},
            {"seed", c.seed ? json(*c.seed) : json(nullptr)},
            {"version", kVersion},
            {"wall_clock_seconds", seconds},
            {"outputs", outputs}};
  io::write_json(c.out + ".manifest.json", m);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Curvature flows on nearly spherical sets", "curvflow"};
  app.require_subcommand(1);
  // Single-letter long options such as --h would clash with -h.
  app.set_help_flag("--help", "print this help and exit");
  app.set_version_flag("--version", kVersion);
  std::vector<std::unique_ptr<Command>> commands;

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, const std::string& out_default) {
    auto c = std::make_unique<Command>();
    c->app = parent->add_subcommand(name, help);
    c->out = out_default;
    c->app->add_option("--config", c->config, "JSON file with option values (flags win)");
    c->app->add_option("--out", c->out, "output path")->capture_default_str();
    commands.push_back(std::move(c));
    return commands.back().get();
  };

  // geom report
  auto* geom = app.add_subcommand("geom", "radial-graph geometry");
  geom->require_subcommand(1);
  std::string g_mode = "2,0";
  double g_amp = 0.1;
  int g_L = 16;
  bool g_normalize = false;
  {
    Command* c = leaf(geom, "report", "geometric report of 1 + amp Y_lm", "report.json");
    c->params.add(c->app, "mode", g_mode, "l,m");
    c->params.add(c->app, "amp", g_amp, "amplitude");
    c->params.add(c->app, "L", g_L, "band limit");
    c->params.add(c->app, "normalize", g_normalize, "rescale to |B_1| about the barycenter");
    c->run = [&, c] {
      const auto [l, m] = mode_pair(g_mode);
      RadialSurface s = RadialSurface::mode(g_L, l, m, g_amp);
      if (g_normalize) s = surface::normalize(s);
      const auto f = surface::curvature_fields(s);
      const auto r = surface::report(s, f);
      const auto d = surface::cmc_deficit(s, f, r);
      json j = report_json(r);
      j["cmc_h0"] = d.h0;
      j["cmc_deficit"] = d.deficit;
      io::write_json(c->out, j);
      return std::vector<std::string>{c->out};
    };
  }

  // mesh report | icosphere | torus
  auto* meshc = app.add_subcommand("mesh", "triangle meshes");
  meshc->require_subcommand(1);
  std::string m_in;
  int m_subdiv = 4, m_n_major = 64, m_n_minor = 32;
  double m_major = 2.0, m_minor = 0.5;
  {
    Command* c = leaf(meshc, "report", "topology and curvature report of an OFF mesh", "mesh_report.json");
    c->params.add(c->app, "in", m_in, "OFF file");
    c->run = [&, c] {
      if (m_in.empty()) throw ValidationError("--in is required");
      const auto m = io::load_mesh(m_in);
      json j = {{"topology", topology_json(mesh::validate(m))},
                {"angle_deficit_sum", mesh::angle_deficit_sum(m)},
                {"report", report_json(mesh::mesh_report(m))}};
      io::write_json(c->out, j);
      return std::vector<std::string>{c->out};
    };
    Command* ico = leaf(meshc, "icosphere", "write a unit icosphere", "icosphere.off");
    ico->params.add(ico->app, "subdiv", m_subdiv, "subdivision level");
    ico->run = [&, ico] {
      io::save_mesh(mesh::icosphere(m_subdiv), ico->out);
      return std::vector<std::string>{ico->out};
    };
    Command* tor = leaf(meshc, "torus", "write a torus of revolution", "torus.off");
    tor->params.add(tor->app, "major", m_major, "major radius");
    tor->params.add(tor->app, "minor", m_minor, "minor radius");
    tor->params.add(tor->app, "n-major", m_n_major, "segments around the axis");
    tor->params.add(tor->app, "n-minor", m_n_minor, "segments around the tube");
    tor->run = [&, tor] {
      io::save_mesh(mesh::torus(m_major, m_minor, m_n_major, m_n_minor), tor->out);
      return std::vector<std::string>{tor->out};
    };
  }

  // alexandrov sweep | sharpness | multiball
  auto* alex = app.add_subcommand("alexandrov", "quantitative Alexandrov inequality");
  alex->require_subcommand(1);
  alexandrov::SweepConfig sw;
  std::string a_mode = "2,0", a_eps = "0.1,0.05,0.025";
  double a_p = 1.25, a_delta1 = 0.5, a_gap = 1.0, a_amp = 0.0;
  int a_L = 24, a_count = 2;
  std::uint64_t a_seed = 1;
  {
    Command* c = leaf(alex, "sweep", "random sweep of both sides", "sweep.csv");
    c->params.add(c->app, "n", sw.n_samples, "number of samples");
    c->params.add(c->app, "seed", sw.seed, "base seed");
    c->params.add(c->app, "lmin", sw.l_min, "lowest degree");
    c->params.add(c->app, "lmax", sw.l_max, "highest degree");
    c->params.add(c->app, "amp", sw.amplitude, "sup-norm bound of the perturbation");
    c->params.add(c->app, "delta0", sw.delta0, "perimeter threshold margin");
    c->params.add(c->app, "L", sw.band_limit, "band limit");
    c->seed = &sw.seed;
    c->run = [&, c] {
      const auto res = alexandrov::sweep(sw);
      io::CsvWriter csv(c->out, {"seed", "l_min", "l_max", "amplitude", "perimeter", "lhs", "rhs", "ratio", "admissible"});
      for (const auto& r : res.records) {
        csv.row({static_cast<double>(r.seed), double(r.l_min), double(r.l_max), r.amplitude, r.perimeter, r.lhs, r.rhs,
                 r.ratio, r.admissible ? 1.0 : 0.0});
      }
      // Summary rows: the ratio column holds the extreme ratio over admissible
      // samples and the admissible column the admissible count.
      const auto& s = res.summary;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      for (const auto& [label, ratio] : {std::pair{"summary_max", s.max_ratio}, std::pair{"summary_min", s.min_ratio}}) {
        csv.row(label, {double(sw.l_min), double(sw.l_max), sw.amplitude, nan, nan, nan, ratio, double(s.admissible)});
      }
      return std::vector<std::string>{c->out};
    };
    Command* sh = leaf(alex, "sharpness", "exponent probe along one mode", "sharpness.csv");
    sh->params.add(sh->app, "mode", a_mode, "l,m");
    sh->params.add(sh->app, "eps", a_eps, "comma-separated amplitudes");
    sh->params.add(sh->app, "p", a_p, "trial exponent");
    sh->params.add(sh->app, "L", a_L, "band limit");
    sh->run = [&, sh] {
      const auto [l, m] = mode_pair(a_mode);
      const auto t = alexandrov::sharpness_probe(l, m, doubles(a_eps), a_p, a_L);
      io::CsvWriter csv(sh->out, {"amplitude", "lhs", "rhs", "ratio", "ratio_p"});
      for (const auto& r : t.rows) csv.row({r.amplitude, r.lhs, r.rhs, r.ratio, r.ratio_p});
      return std::vector<std::string>{sh->out};
    };
    Command* mb = leaf(alex, "multiball", "multi-ball inequality on equal balls in a row", "multiball.json");
    mb->params.add(mb->app, "count", a_count, "number of balls");
    mb->params.add(mb->app, "gap", a_gap, "gap between neighbouring balls");
    mb->params.add(mb->app, "delta1", a_delta1, "required separation margin");
    mb->params.add(mb->app, "amp", a_amp, "random perturbation of each ball");
    mb->params.add(mb->app, "seed", a_seed, "perturbation seed");
    mb->params.add(mb->app, "L", a_L, "band limit");
    mb->seed = &a_seed;
    mb->run = [&, mb] {
      if (a_count < 1) throw ValidationError("count must be positive");
      const double r = std::cbrt(1.0 / a_count);
      std::vector<RadialSurface> comps;
      for (int i = 0; i < a_count; ++i) {
        RadialSurface s = RadialSurface::ball(a_L, r, Vec3((i - 0.5 * (a_count - 1)) * (2 * r + a_gap), 0, 0));
        if (a_amp > 0.0) {
          auto w = s2::random_band_limited(a_seed + i, 2, 4, a_amp * r, a_L);
          for (std::size_t k = 0; k < w.a.size(); ++k) s.w.a[k] += w.a[k];
        }
        comps.push_back(s);
      }
      const auto rec = alexandrov::multiball_check(comps, a_delta1);
      json j = {{"count", rec.count},       {"perimeter", rec.perimeter}, {"hbar", rec.hbar},
                {"lhs", rec.lhs},           {"rhs", rec.rhs},             {"ratio", rec.ratio},
                {"margin", rec.margin},     {"radii", rec.radii},         {"radii_sum_sq", rec.radii_sum_sq},
                {"radii_bound", rec.radii_bound}, {"radii_ok", rec.radii_ok}};
      io::write_json(mb->out, j);
      return std::vector<std::string>{mb->out};
    };
  }

  // vpmcf run
  auto* vp = app.add_subcommand("vpmcf", "volume-preserving mean curvature flow");
  vp->require_subcommand(1);
  std::string v_init = "mode:2,0:0.1", v_scheme = "mm", v_ledger;
  double v_h = 0.01, v_T = 1.0, v_tol = 1e-11;
  int v_L = 16;
  {
    Command* c = leaf(vp, "run", "run the flow and write its trace", "trace.csv");
    c->params.add(c->app, "init", v_init, "ball | mode:l,m:amp | random:seed:lmin:lmax:amp");
    c->params.add(c->app, "h", v_h, "time step");
    c->params.add(c->app, "T", v_T, "final time");
    c->params.add(c->app, "scheme", v_scheme, "mm | direct");
    c->params.add(c->app, "L", v_L, "band limit");
    c->params.add(c->app, "grad-tol", v_tol, "optimizer gradient tolerance");
    c->params.add(c->app, "ledger", v_ledger, "optional JSON ledger output");
    c->run = [&, c] {
      vpmcf::MmConfig cfg;
      cfg.h = v_h;
      cfg.grad_tol = v_tol;
      cfg.band_limit = v_L;
      const auto scheme = vpmcf::parse_scheme(v_scheme);
      io::CsvWriter csv(c->out, {"t", "P", "volume", "Hbar", "osc", "lambda", "D", "el_residual", "delta_cmc"});
      const auto trace = vpmcf::run(parse_surface(v_init, v_L), cfg, v_T, scheme, [&](const vpmcf::TraceEntry& e) {
        csv.row({e.t, e.report.perimeter, e.report.volume, e.report.mean_curvature_avg, e.report.oscillation,
                 e.diag.lambda, e.diag.dissipation, e.diag.el_residual, e.delta_cmc});
      });
      std::vector<std::string> outs{c->out};
      if (!v_ledger.empty()) {
        const auto L = vpmcf::dissipation_ledger(trace);
        json j = {{"steps", trace.entries.size() - 1},
                  {"converged", trace.converged},
                  {"max_comparison_slack", L.max_comparison_slack},
                  {"max_perimeter_increase", L.max_perimeter_increase},
                  {"cumulative_osc", L.cumulative_osc},
                  {"dissipation_over_h", L.dissipation_over_h},
                  {"perimeter_drop", L.perimeter_drop},
                  {"telescoping_slack", L.telescoping_slack},
                  {"distance_constant", L.distance_constant},
                  {"dissipation_to_perimeter", L.dissipation_to_perimeter},
                  {"max_volume_drift", L.max_volume_drift},
                  {"comparison_slack", L.comparison_slack}};
        try {
          const auto f = vpmcf::fit_rate(trace, vpmcf::Observable::perimeter_deficit);
          j["deficit_rate"] = {{"rate", f.rate}, {"intercept", f.intercept}, {"r_squared", f.r_squared}, {"points", f.points}};
        } catch (const ValidationError&) {
          j["deficit_rate"] = nullptr;
        }
        io::write_json(v_ledger, j);
        outs.push_back(v_ledger);
      }
      return outs;
    };
  }

  // ms run
  auto* msc = app.add_subcommand("ms", "Mullins-Sekerka flat flow on the torus");
  msc->require_subcommand(1);
  std::string s_init = "mode:2,0:0.1", s_ledger;
  double s_h = 0.01, s_T = 2.0, s_R = 8.0, s_tol = 1e-8, s_halt = 1e-7;
  int s_n = 128, s_L = 16;
  {
    Command* c = leaf(msc, "run", "run the flow and write its trace", "ms_trace.csv");
    c->params.add(c->app, "init", s_init, "ball | mode:l,m:amp | random:seed:lmin:lmax:amp | balls:N:gap");
    c->params.add(c->app, "h", s_h, "time step");
    c->params.add(c->app, "T", s_T, "final time");
    c->params.add(c->app, "R", s_R, "torus side");
    c->params.add(c->app, "n", s_n, "voxels per axis");
    c->params.add(c->app, "L", s_L, "band limit");
    c->params.add(c->app, "grad-tol", s_tol, "optimizer gradient tolerance");
    c->params.add(c->app, "halt-cmc", s_halt, "stop once every cmc deficit is below this (0: never)");
    c->params.add(c->app, "ledger", s_ledger, "optional JSON ledger output");
    c->run = [&, c] {
      mullins::MsConfig cfg;
      cfg.h = s_h;
      cfg.grid.R = s_R;
      cfg.grid.n = s_n;
      cfg.band_limit = s_L;
      cfg.grad_tol = s_tol;
      cfg.halt_cmc = s_halt;
      cfg.validate();
      io::CsvWriter csv(c->out, {"t", "P", "volume", "Hbar", "osc", "lambda", "D", "el_residual", "delta_cmc", "hminus1",
                                 "poisson_residual"});
      const auto trace = mullins::ms_run(parse_components(s_init, s_L, s_R), cfg, s_T, [&](const mullins::MsTraceEntry& e) {
        const auto u = union_stats(e.components);
        csv.row({e.t, e.perimeter, e.volume, u.hbar, u.osc, e.diag.lambda, e.diag.dissipation, e.diag.el_residual,
                 e.delta_cmc, std::sqrt(e.diag.hminus1_sq), e.diag.poisson_residual});
      });
      std::vector<std::string> outs{c->out};
      if (!s_ledger.empty()) {
        const auto L = mullins::ms_ledger(trace);
        json j = {{"steps", trace.entries.size() - 1},
                  {"converged", trace.converged},
                  {"max_comparison_slack", L.max_comparison_slack},
                  {"max_perimeter_increase", L.max_perimeter_increase},
                  {"max_mass_drift", L.max_mass_drift},
                  {"max_identity_error", L.max_identity_error},
                  {"max_poisson_residual", L.max_poisson_residual},
                  {"max_el_residual", L.max_el_residual},
                  {"half_h_dissipation", L.half_h_dissipation},
                  {"perimeter_drop", L.perimeter_drop},
                  {"telescoping_slack", L.telescoping_slack}};
        try {
          const auto f = mullins::ms_fit_rate(trace);
          j["deficit_rate"] = {{"rate", f.rate}, {"intercept", f.intercept}, {"r_squared", f.r_squared}, {"points", f.points}};
        } catch (const ValidationError&) {
          j["deficit_rate"] = nullptr;
        }
        try {
          const auto hr = mullins::holder_continuity_report(trace);
          j["holder"] = {{"constant", hr.constant}, {"pairs", hr.pairs}, {"s", hr.s}, {"t", hr.t}};
        } catch (const ValidationError&) {
          j["holder"] = nullptr;
        }
        io::write_json(s_ledger, j);
        outs.push_back(s_ledger);
      }
      return outs;
    };
  }

  // fit
  std::string f_in, f_obs = "deficit";
  int f_components = 1;
  Command* fit = leaf(&app, "fit", "log-linear rate fit over the trailing half of a trace CSV", "fit.json");
  fit->params.add(fit->app, "in", f_in, "trace CSV");
  fit->params.add(fit->app, "observable", f_obs, "deficit or any column name");
  fit->params.add(fit->app, "components", f_components, "component count used by the deficit");
  fit->run = [&] {
    if (f_in.empty()) throw ValidationError("--in is required");
    const auto table = io::read_csv(f_in);
    const auto t = table.values("t");
    std::vector<double> y;
    if (f_obs == "deficit") {
      const auto P = table.values("P"), V = table.values("volume");
      for (std::size_t i = 0; i < P.size(); ++i) {
        y.push_back(P[i] - surface::kUnitSpherePerimeter * std::cbrt(static_cast<double>(f_components)) *
                               std::pow(V[i] / surface::kUnitBallVolume, 2.0 / 3.0));
      }
    } else {
      y = table.values(f_obs);
    }
    std::vector<double> ts, ys;
    for (std::size_t i = t.size() / 2; i < t.size(); ++i) {
      if (y[i] > 1e-12) {
        ts.push_back(t[i]);
        ys.push_back(y[i]);
      }
    }
    const auto f = vpmcf::fit_rate(ts, ys);
    io::write_json(fit->out, {{"observable", f_obs}, {"rate", f.rate}, {"intercept", f.intercept},
                              {"r_squared", f.r_squared}, {"points", f.points}});
    return std::vector<std::string>{fit->out};
  };

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  for (auto& c : commands) {
    if (!c->app->parsed()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (!c->config.empty()) c->params.merge(io::read_json(c->config));
      const auto outputs = c->run();
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_manifest(*c, args, secs, outputs);
      return 0;
    } catch (const ValidationError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const NumericalError& e) {
      std::cerr << "numerical failure: " << e.what() << '\n';
      return 2;
    }
  }
  std::cerr << app.help();
  return 1;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace curvflow::cli
