#include "solpole/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "solpole/asymptotics.hpp"
#include "solpole/blowup.hpp"
#include "solpole/exppoly.hpp"
#include "solpole/interaction.hpp"
#include "solpole/kernel.hpp"
#include "solpole/report.hpp"
#include "solpole/verify.hpp"

namespace solpole::cli {

namespace {

using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string k1, k2;
  std::string variant = "minus";
  double x1 = 0.0;
  double x2 = 0.0;
  std::string x = "0";
  double t = 0.0;
  std::optional<double> t0, t1, alpha, horizon;
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 20240607;
  int precision = 50;
  // interaction
  double ratio_lo = 1.1;
  double ratio_hi = 4.0;
  int steps = 30;
  double step_h = 1e-3;
};

struct Outcome {
  Json result;
  std::string csv;
  int code = kExitOk;
};

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v))
    throw UsageError("not a finite number: '" + s + "'");
  return v;
}

// "re" or "re,im"
Complex parse_complex(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) return {parse_double(s), 0.0};
  return {parse_double(s.substr(0, comma)), parse_double(s.substr(comma + 1))};
}

SolitonConfig make_config(const Options& o) {
  try {
    auto cfg = SolitonConfig::from_wavenumbers(parse_wavenumber(o.k1), parse_wavenumber(o.k2),
                                               parse_variant(o.variant), o.x1, o.x2);
    cfg.validate();
    return cfg;
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
}

void require_exact(const SolitonConfig& cfg, std::string_view command) {
  if (!cfg.comm)
    throw UsageError(std::string(command) +
                     " needs exact rational wavenumbers (write k as an integer or p/q)");
}

std::string fmt(double v) { return report::format_double(v); }

Outcome cmd_eval(const SolitonConfig& cfg, const Options& o) {
  const Complex x = parse_complex(o.x);
  const PointValue v = TwoSoliton(cfg).u(x, o.t);
  Outcome r;
  r.result["x"] = report::complex_json(x);
  r.result["t"] = o.t;
  r.result["pole"] = is_pole(v);
  report::CsvTable tab({"re_x", "im_x", "t", "re_u", "im_u", "pole"});
  if (is_pole(v)) {
    r.result["u"] = nullptr;
    r.result["abs_denominator"] = std::get<PoleMarker>(v).abs_denominator;
    tab.add_row({fmt(x.real()), fmt(x.imag()), fmt(o.t), "", "", "true"});
  } else {
    const Complex u = value_of(v);
    r.result["u"] = report::complex_json(u);
    tab.add_row({fmt(x.real()), fmt(x.imag()), fmt(o.t), fmt(u.real()), fmt(u.imag()), "false"});
  }
  r.csv = tab.str();
  return r;
}

Outcome cmd_poles(const SolitonConfig& cfg, const Options& o) {
  require_exact(cfg, "poles");
  RootOptions ro;
  ro.digits = o.precision;
  const auto poles = oracle_poles(cfg, o.t, ro);
  int total = 0;
  Json list = Json::array();
  report::CsvTable tab({"re_x", "im_x", "multiplicity"});
  for (const auto& p : poles) {
    total += p.multiplicity;
    list.push_back({{"x", report::complex_json(p.x)}, {"multiplicity", p.multiplicity}});
    tab.add_row({fmt(p.x.real()), fmt(p.x.imag()), std::to_string(p.multiplicity)});
  }
  const int expected = 2 * (cfg.comm->p1 + cfg.comm->p2);
  Outcome r;
  r.result["t"] = o.t;
  r.result["digits"] = o.precision;
  r.result["expected_count"] = expected;
  r.result["total_multiplicity"] = total;
  r.result["poles"] = list;
  r.csv = tab.str();
  r.code = total == expected ? kExitOk : kExitCheckFailed;
  return r;
}

// one table for all curves: the per-curve export with the curve index in front
std::string curves_csv(const std::vector<PoleCurve>& curves) {
  std::string out = "curve,t,re_x,im_x,abs_F,flags\r\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const std::string body = curve_to_csv(curves[i]);
    std::size_t pos = body.find("\r\n") + 2;  // skip header
    while (pos < body.size()) {
      const std::size_t end = body.find("\r\n", pos);
      out += std::to_string(i) + "," + body.substr(pos, end - pos) + "\r\n";
      pos = end + 2;
    }
  }
  return out;
}

Outcome cmd_track(const SolitonConfig& cfg, const Options& o) {
  const double t0 = o.t0.value_or(-1.0), t1 = o.t1.value_or(1.0);
  if (!(t0 < t1)) throw UsageError("need t0 < t1");
  const auto curves = tracked_curves(cfg, t0, t1);
  Outcome r;
  r.result["t0"] = t0;
  r.result["t1"] = t1;
  Json list = Json::array();
  for (const auto& c : curves) list.push_back(to_json(c));
  r.result["curves"] = list;
  r.csv = curves_csv(curves);
  return r;
}

Outcome cmd_asympt(const SolitonConfig& cfg, const Options& o) {
  const double T = o.horizon.value_or(verify_horizon(cfg));
  if (!(T > 0.0)) throw UsageError("horizon must be positive");
  const double t0 = o.t0.value_or(-2.0 * T), t1 = o.t1.value_or(2.0 * T);
  if (!(t0 < t1)) throw UsageError("need t0 < t1");
  const auto curves = tracked_curves(cfg, t0, t1);
  const MatchReport rep = match_families(curves, cfg, T);
  const bool pass = rep.unmatched.empty() && !rep.matches.empty() && rep.max_residual < 1e-3 &&
                    rep.residuals_decrease;
  Outcome r;
  r.result["pass"] = pass;
  r.result["curves"] = curves.size();
  r.result["report"] = to_json(rep);
  report::CsvTable tab({"curve", "label", "re_endpoint", "im_endpoint", "tracked_gap",
                        "residual", "re_tangent_ratio", "im_tangent_ratio",
                        "re_tangent_ratio_printed", "im_tangent_ratio_printed"});
  for (const auto& m : rep.matches)
    tab.add_row({std::to_string(m.curve), to_string(m.label), fmt(m.endpoint.real()),
                 fmt(m.endpoint.imag()), fmt(m.tracked_gap),
                 m.ladder.empty() ? "" : fmt(m.ladder.front().residual),
                 fmt(m.tangent_ratio.real()), fmt(m.tangent_ratio.imag()),
                 fmt(m.tangent_ratio_printed.real()), fmt(m.tangent_ratio_printed.imag())});
  r.csv = tab.str();
  r.code = pass ? kExitOk : kExitCheckFailed;
  return r;
}

Outcome cmd_verify(const SolitonConfig& cfg, const Options& o) {
  VerifyOptions vo;
  vo.seed = o.seed;
  vo.digits = o.precision;
  vo.t0 = o.t0;
  vo.t1 = o.t1;
  const VerifyReport rep = verify_suite(cfg, vo);
  Outcome r;
  r.result["seed"] = o.seed;
  r.result["report"] = to_json(rep);
  report::CsvTable tab({"name", "checkable", "pass", "checked", "worst", "note"});
  for (const auto& i : rep.results)
    tab.add_row({i.name, i.checkable ? "true" : "false", i.pass ? "true" : "false",
                 std::to_string(i.checked), fmt(i.worst), i.note});
  r.csv = tab.str();
  r.code = rep.all_pass() ? kExitOk : kExitCheckFailed;
  return r;
}

Outcome cmd_blowup(const SolitonConfig& cfg, const Options& o) {
  require_exact(cfg, "blowup");
  const double t0 = o.t0.value_or(-3.0), t1 = o.t1.value_or(3.0);
  if (!(t0 < t1)) throw UsageError("need t0 < t1");
  const BlowupScenario sc =
      o.alpha ? build_scenario_at(cfg, *o.alpha, t0, t1) : build_scenario(cfg, t0, t1);
  const auto series = blowup_profile(sc, approach_ladder(sc.crossing.t_star));
  Outcome r;
  r.result["scenario"] = to_json(sc);
  r.result["series"] = Json::array();
  for (const auto& s : series)
    r.result["series"].push_back({{"t", s.t},
                                  {"sup_abs_u", s.sup_abs_u},
                                  {"argmax_x", s.argmax_x},
                                  {"tail_rate", s.tail_rate}});
  r.csv = series_to_csv(series);
  const BlowupFit fit = fit_blowup_rate(series, sc.crossing.t_star);
  const double predicted = 1.0 / std::abs(sc.crossing.vertical_speed);
  r.result["fit"] = to_json(fit);
  r.result["predicted_amplitude"] = predicted;
  r.result["amplitude_ratio"] = fit.amplitude / predicted;
  return r;
}

Outcome cmd_interaction(const SolitonConfig& cfg, const Options& o) {
  Outcome r;
  if (cfg.has_zero_shifts()) {
    Json c;
    c["uxx_closed"] = uxx_at_center(cfg);
    c["uxx_measured"] = measure_uxx(cfg, o.step_h).extrapolated;
    try {
      c["speed_closed"] = extremum_speed(cfg);
      c["speed_measured"] = measure_extremum_speed(cfg, o.step_h).speed;
    } catch (const PreconditionError&) {
      c["speed_closed"] = nullptr;
      c["speed_measured"] = nullptr;
    }
    const auto m = count_maxima_at_interaction(cfg);
    c["maxima"] = m.count;
    c["maxima_positions"] = m.positions;
    r.result["center"] = c;
  } else {
    r.result["center"] = nullptr;
  }
  const auto rows = interaction_sweep(cfg.variant, o.ratio_lo, o.ratio_hi, o.steps, o.step_h);
  Json sweep = Json::array();
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  for (const auto& row : rows)
    sweep.push_back({{"ratio", row.ratio},
                     {"maxima", row.maxima},
                     {"uxx_closed", row.uxx_closed},
                     {"uxx_measured", row.uxx_measured},
                     {"speed_closed", opt(row.speed_closed)},
                     {"speed_measured", opt(row.speed_measured)}});
  r.result["sweep"] = sweep;
  if (cfg.variant == Variant::Plus) {
    const auto tr = maxima_transition();
    const auto on = negative_speed_onset();
    r.result["maxima_transition"] = {{"lo", tr.lo}, {"hi", tr.hi}};
    r.result["negative_speed_onset"] = {{"lo", on.lo}, {"hi", on.hi}};
  } else {
    r.result["maxima_transition"] = nullptr;
    r.result["negative_speed_onset"] = nullptr;
  }
  r.csv = sweep_to_csv(rows);
  return r;
}

void add_model_options(CLI::App& app, Options& o) {
  app.add_option("--k1", o.k1, "slow wavenumber: decimal, integer or p/q")->required();
  app.add_option("--k2", o.k2, "fast wavenumber (k2 > k1)")->required();
  app.add_option("--variant", o.variant, "plus|minus")
      ->check(CLI::IsMember({"plus", "minus"}))
      ->capture_default_str();
  app.add_option("--x1", o.x1, "phase of the slow soliton")->capture_default_str();
  app.add_option("--x2", o.x2, "phase of the fast soliton")->capture_default_str();
  app.add_option("--t", o.t, "time (eval, poles)")->capture_default_str();
  app.add_option("--t0", o.t0, "start of the time window");
  app.add_option("--t1", o.t1, "end of the time window");
  app.add_option("--x", o.x, "point for eval: re or re,im")->capture_default_str();
  app.add_option("--alpha", o.alpha, "blowup line Im x = -alpha (default: chosen automatically)");
  app.add_option("--out", o.out, "write the result here instead of stdout");
  app.add_option("--format", o.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--seed", o.seed, "seed of the random probes")->capture_default_str();
  app.add_option("--precision", o.precision, "root finder digits")
      ->check(CLI::IsMember({50, 100}))
      ->capture_default_str();
}

int emit(const Outcome& res, const std::string& command, const SolitonConfig& cfg,
         const Options& o, std::ostream& out, std::ostream& err) {
  std::string text;
  if (o.format == "csv") {
    text = res.csv;
  } else {
    Json j = report::envelope(command, cfg);
    j["result"] = res.result;
    text = report::dump(j);
  }
  if (o.out.empty()) {
    out << text;
  } else {
    std::ofstream f(o.out, std::ios::binary);
    f << text;
    if (!f) {
      err << "error: cannot write " << o.out << "\n";
      return kExitCheckFailed;
    }
  }
  return res.code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Poles of mKdV two-soliton solutions: evaluation, tracking and checks", "solpole"};
  app.set_config("--config", "", "flat key=value file; flags on the command line win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  add_model_options(app, o);
  app.require_subcommand(1);

  using Handler = std::function<Outcome(const SolitonConfig&, const Options&)>;
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"eval", "u at one point (x, t)", cmd_eval},
      {"poles", "all poles in the fundamental strip at --t (exact mode)", cmd_poles},
      {"track", "pole curves over [t0, t1]", cmd_track},
      {"asympt", "match tracked curves to the large-time families", cmd_asympt},
      {"verify", "the invariant suite", cmd_verify},
      {"blowup", "blowup scenario on a horizontal line and its rate fit", cmd_blowup},
      {"interaction", "second derivative, extremum speed and maxima at the center; ratio sweep",
       cmd_interaction},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help, fn] : commands) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    subs[name] = s;
  }
  subs["asympt"]->add_option("--horizon", o.horizon, "T of the family check");
  auto* inter = subs["interaction"];
  inter->add_option("--ratio-lo", o.ratio_lo, "first k2/k1 of the sweep")->capture_default_str();
  inter->add_option("--ratio-hi", o.ratio_hi, "last k2/k1 of the sweep")->capture_default_str();
  inter->add_option("--steps", o.steps, "ratios in the sweep")->capture_default_str();
  inter->add_option("--step", o.step_h, "dimensionless difference step")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const SolitonConfig cfg = make_config(o);
    for (const auto& [name, help, fn] : commands)
      if (subs[name]->parsed()) return emit(fn(cfg, o), name, cfg, o, out, err);
    err << "error: no subcommand\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"solpole"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace solpole::cli
