// dynheight: command-line front end.  Exit codes: 0 ok, 2 validation
// error, 3 bad parameter or point on divisor, 4 budget exceeded.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dynheight/dynheight.hpp"

namespace {

using namespace dynheight;

struct Common {
  std::string system;
  std::string point;
  int depth = 20;
  double eps = 0;
  std::string place = "inf";
  std::uint64_t seed = 1;
  std::string out;
  std::string format;
};

void add_output(CLI::App* cmd, Common& c, const std::string& formats) {
  cmd->add_option("--out", c.out, "Write the result to FILE instead of stdout");
  cmd->add_option("--format", c.format, "Output format: " + formats);
}

void add_green(CLI::App* cmd, Common& c) {
  cmd->add_option("--depth", c.depth, "Word depth of the Green recursion")->capture_default_str();
  cmd->add_option("--eps", c.eps, "Adaptive mode: stop once increments fall below eps (alpha-k)/k");
}

GreenConfig green_config(const Common& c) {
  GreenConfig cfg;
  cfg.depth = c.depth;
  if (c.depth < 1) throw BadParameter("--depth must be at least 1");
  if (c.eps > 0) {
    cfg.mode = GreenMode::adaptive;
    cfg.target_eps = c.eps;
  } else if (c.eps < 0) {
    throw BadParameter("--eps must be positive");
  }
  return cfg;
}

/// Writes to --out or stdout.
void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw ValidationError("cannot write " + c.out);
  f << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

bool want(const Common& c, const std::string& fmt, const std::vector<std::string>& allowed) {
  for (const auto& a : allowed)
    if (a == c.format) return c.format == fmt;
  if (!c.format.empty()) throw ValidationError("unsupported --format " + c.format);
  return false;
}

PolarizedSystem load_system(const std::string& path) {
  if (path.empty()) throw ValidationError("--system is required");
  return system_from_file(system_file_from_json(read_json_file(path)));
}

struct LoadedFamily {
  ParamSystem ps;
  std::optional<Section> section;
};

LoadedFamily load_family(const std::string& path) {
  if (path.empty()) throw ValidationError("--system is required");
  const auto f = system_file_from_json(read_json_file(path));
  return {family_from_file(f), section_from_file(f)};
}

ProjPointQ require_point(const Common& c) {
  if (c.point.empty()) throw ValidationError("--point is required");
  return ProjPointQ::parse(c.point);
}

/// Raw integer lift "a:b:..." (not normalized).
std::vector<Integer> parse_lift(const std::string& text) {
  std::vector<Integer> xs;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) {
    const Rational q = parse_rational(part);
    if (q.get_den() != 1) throw ValidationError("lift coordinates must be integers");
    xs.emplace_back(q.get_num());
  }
  if (xs.size() < 2) throw ValidationError("a lift needs at least two coordinates");
  return xs;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) {
    const auto b = part.find_first_not_of(" \t");
    const auto e = part.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : part.substr(b, e - b + 1));
  }
  return out;
}

/// "a,b,...,z": an ellipsis continues the progression of the two preceding
/// terms.  It is geometric when the ratio is an integer and reaches z
/// exactly, arithmetic otherwise.
std::vector<Rational> parse_t_list(const std::string& text) {
  std::vector<Rational> out;
  const auto parts = split(text, ',');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] != "..." && parts[i] != "…") {
      out.push_back(parse_rational(parts[i]));
      continue;
    }
    if (out.size() < 2 || i + 1 >= parts.size()) throw BadParameter("an ellipsis needs two terms before and one after");
    const Rational a = out[out.size() - 2];
    const Rational b = out.back();
    const Rational z = parse_rational(parts[++i]);
    bool geometric = false;
    if (sgn(a) != 0) {
      const Rational r = b / a;
      if (r.get_den() == 1 && r > 1) {
        Rational x = b;
        while (abs(x) < abs(z)) x *= r;
        geometric = x == z;
      }
    }
    const Rational step = geometric ? Rational(b / a) : Rational(b - a);
    if (!geometric && (sgn(step) == 0 || sgn(Rational(z - b)) * sgn(step) < 0))
      throw BadParameter("ellipsis does not reach " + parts[i]);
    Rational x = b;
    std::size_t guard = 0;
    while (x != z) {
      x = geometric ? Rational(x * step) : Rational(x + step);
      if (++guard > 1000000 || (!geometric && sgn(step) * sgn(Rational(x - z)) > 0))
        throw BadParameter("ellipsis does not reach " + parts[i]);
      out.push_back(x);
    }
  }
  if (out.empty()) throw BadParameter("empty t list");
  return out;
}

Place parse_place(const std::string& text) {
  try {
    return Place::parse(text);
  } catch (const ValidationError& e) {
    throw BadParameter(e.what());
  }
}

/// "a..b" as integers; with plus_minus every s is followed by -s.
std::vector<Rational> parse_t_range(const std::string& text, bool plus_minus) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw BadParameter("--t-range expects a..b");
  long a = 0;
  long b = 0;
  try {
    a = std::stol(text.substr(0, dots));
    b = std::stol(text.substr(dots + 2));
  } catch (const std::logic_error&) {
    throw BadParameter("--t-range expects integers a..b");
  }
  if (b < a) throw BadParameter("--t-range is empty");
  std::vector<Rational> out;
  for (long s = a; s <= b; ++s) {
    out.emplace_back(s);
    if (plus_minus && s != 0) out.emplace_back(-s);
  }
  return out;
}

std::vector<Rational> t_samples(const std::string& list, const std::string& range, bool plus_minus) {
  if (!list.empty() && !range.empty()) throw BadParameter("give either --t or --t-range");
  if (!list.empty()) {
    try {
      return parse_t_list(list);
    } catch (const ValidationError& e) {
      throw BadParameter(e.what());
    }
  }
  if (!range.empty()) return parse_t_range(range, plus_minus);
  throw BadParameter("--t or --t-range is required");
}

Section family_point(const LoadedFamily& fam, const Common& c) {
  if (!c.point.empty()) return Section::parse(c.point);
  if (fam.section) return *fam.section;
  throw ValidationError("--point is required when the family file has no section");
}

std::string table_output(const Common& c, const SweepTable& table, const std::string& kind, Json extra = {}) {
  if (want(c, "json", {"csv", "json"})) {
    Json j = table_to_json(table, kind);
    if (!extra.is_null())
      for (const auto& [k, v] : extra.items()) j[k] = v;
    return dump(j);
  }
  std::ostringstream os;
  write_csv(os, table);
  return os.str();
}

void report_skipped(const SweepTable& table) {
  for (const auto& s : table.skipped)
    std::cerr << "skipped t = " << to_string(s.t) << " (" << s.point << "): " << s.reason << '\n';
}

// Subcommands.

int cmd_validate(const Common& c) {
  const auto f = system_file_from_json(read_json_file(c.system.empty() ? throw ValidationError("--system is required")
                                                                         : c.system));
  bool family = f.section.has_value();
  for (const auto& lift : f.lifts)
    for (const auto& s : lift) family = family || s.find('t') != std::string::npos;
  if (family) {
    const auto ps = family_from_file(f);
    const auto section = section_from_file(f);
    if (want(c, "json", {"json"})) {
      emit(c, dump(family_to_json(ps, section)));
      return 0;
    }
    std::ostringstream os;
    os << "family: k " << ps.k() << " on P^" << ps.dim() << ", alpha " << ps.alpha() << '\n';
    if (ps.dim() == 1) os << "R(t) = " << ps.good_locus().to_string() << '\n';
    emit(c, os.str());
    return 0;
  }
  const auto s = system_from_file(f);
  if (want(c, "json", {"json"})) {
    emit(c, dump(system_to_json(s)));
    return 0;
  }
  std::ostringstream os;
  os << "system: k " << s.k() << " on P^" << s.dim() << ", alpha " << s.alpha() << '\n';
  for (const auto& f : s.maps()) os << "  " << f.to_string() << '\n';
  if (s.dim() == 1) {
    const auto bad = bad_primes(s);
    os << "bad primes:";
    for (unsigned long p : bad) os << ' ' << p;
    os << (bad.empty() ? " none\n" : "\n");
  }
  emit(c, os.str());
  return 0;
}

int cmd_height(const Common& c) {
  const auto s = load_system(c.system);
  const auto p = require_point(c);
  const auto r = canonical_height(s, p, green_config(c));
  if (want(c, "json", {"json", "csv"})) {
    emit(c, dump(height_result_to_json(r, p)));
    return 0;
  }
  std::ostringstream os;
  if (c.format == "csv") {
    os << "place,value\n";
    for (const auto& [v, g] : r.per_place) os << v.to_string() << ',' << format_number(g) << '\n';
    os << "total," << format_number(r.value) << '\n';
  } else {
    os << "value " << format_number(r.value) << '\n'
       << "tail_bound " << format_number(r.tail_bound) << (r.certified ? "" : " (monitored)") << '\n'
       << "depth " << r.depth_used << '\n';
    for (const auto& [v, g] : r.per_place) os << "  " << v.to_string() << ' ' << format_number(g) << '\n';
  }
  emit(c, os.str());
  return 0;
}

int cmd_oracle(const Common& c) {
  const auto s = load_system(c.system);
  const auto p = require_point(c);
  if (c.depth < 0) throw BadParameter("--depth must be nonnegative");
  const auto r = canonical_height_oracle(s, p, c.depth);
  if (want(c, "json", {"json"})) {
    emit(c, dump(oracle_result_to_json(r, p)));
    return 0;
  }
  emit(c, "value " + format_number(r.value) + "\ntail_bound " + format_number(r.tail_bound) + "\ndepth " +
              std::to_string(r.depth) + "\n");
  return 0;
}

int cmd_local(const Common& c, std::size_t hyperplane) {
  const auto s = load_system(c.system);
  const auto p = require_point(c);
  const auto v = parse_place(c.place);
  const double value = canonical_local_height(s, p, hyperplane, v, green_config(c));
  if (want(c, "json", {"json"})) {
    emit(c, dump({{"kind", "local"}, {"point", p.to_string()}, {"hyperplane", hyperplane},
                  {"place", v.to_string()}, {"value", value}}));
    return 0;
  }
  emit(c, format_number(value) + "\n");
  return 0;
}

int cmd_green(const Common& c) {
  const auto s = load_system(c.system);
  if (c.point.empty()) throw ValidationError("--point is required");
  const auto lift = parse_lift(c.point);
  const auto v = parse_place(c.place);
  const auto t = green_trace(s, lift, v, green_config(c));
  if (want(c, "json", {"json"})) {
    emit(c, dump(green_trace_to_json(t, v)));
    return 0;
  }
  emit(c, "value " + format_number(t.value) + "\ntail_bound " + format_number(t.tail_bound()) + "\ndepth " +
              std::to_string(t.depth) + "\n");
  return 0;
}

int cmd_commute(const Common& c, const std::string& other, int samples) {
  const auto sf = load_system(c.system);
  const auto sg = load_system(other);
  if (samples < 1) throw BadParameter("--samples must be positive");
  const auto v = parse_place(c.place);
  const auto cfg = green_config(c);
  Lcg64 rng(c.seed);
  std::vector<std::vector<Integer>> lifts;
  std::vector<ProjPointQ> points;
  while (static_cast<int>(lifts.size()) < samples) {
    std::vector<Integer> x;
    for (std::size_t i = 0; i <= sf.dim(); ++i) x.emplace_back(rng.between(-100, 100));
    if (is_zero(gcd_of(x))) continue;
    points.push_back(ProjPointQ::from_integers(x));
    lifts.push_back(std::move(x));
  }
  const double metric = metric_equality_report(sf, sg, lifts, v, cfg);
  std::optional<double> heights;
  if (sf.dim() == 1) heights = height_equality_report(sf, sg, points, cfg);
  if (want(c, "json", {"json"})) {
    Json j = {{"kind", "commute"}, {"seed", c.seed}, {"samples", samples}, {"place", v.to_string()},
              {"metric_max_diff", metric}};
    if (heights) j["height_max_diff"] = *heights;
    emit(c, dump(j));
    return 0;
  }
  std::string text = "seed " + std::to_string(c.seed) + "\nmetric_max_diff " + format_number(metric) + "\n";
  if (heights) text += "height_max_diff " + format_number(*heights) + "\n";
  emit(c, text);
  return 0;
}

int cmd_sweep(const Common& c, const std::vector<Rational>& ts) {
  const auto fam = load_family(c.system);
  const auto r = variation_sweep(fam.ps, {family_point(fam, c)}, ts, green_config(c));
  report_skipped(r.table);
  std::ostringstream fit;
  fit << "fit c1 " << format_number(r.fit.c1) << " c2 " << format_number(r.fit.c2) << " train " << r.fit.train
      << " held_out " << r.fit.held_out << " violations " << r.fit.violations.size() << '\n';
  emit(c, table_output(c, r.table, "sweep",
                       {{"c1", r.fit.c1}, {"c2", r.fit.c2}, {"violations", r.fit.violations}}));
  (c.out.empty() ? std::cerr : std::cout) << fit.str();
  return 0;
}

int cmd_ratio(const Common& c, const std::vector<Rational>& ts, int ff_depth) {
  const auto fam = load_family(c.system);
  const auto r = limit_ratio(fam.ps, family_point(fam, c), ts, green_config(c), ff_depth);
  report_skipped(r.table);
  emit(c, table_output(c, r.table, "ratio", {{"ff_value", to_string(r.ff_value)}}));
  (c.out.empty() ? std::cerr : std::cout) << "ff_height " << to_string(r.ff_value) << '\n';
  return 0;
}

int cmd_local_sweep(const Common& c, const std::vector<Rational>& ts, std::size_t hyperplane) {
  const auto fam = load_family(c.system);
  const auto r = local_variation_sweep(fam.ps, family_point(fam, c), hyperplane, parse_place(c.place), ts,
                                       green_config(c));
  report_skipped(r.table);
  emit(c, table_output(c, r.table, "local-sweep", {{"empirical_c", r.empirical_c}}));
  (c.out.empty() ? std::cerr : std::cout) << "empirical_c " << format_number(r.empirical_c) << '\n';
  return 0;
}

/// "[[..],[..]]+[[..],[..]]": dense permutation-type matrices.
std::vector<PermTypeMatrix> parse_actions(const std::string& text) {
  std::vector<PermTypeMatrix> out;
  for (const auto& part : split(text, '+')) {
    const auto m = detail::json_guard("action matrix", [&] {
      DenseMatrix<Integer> d;
      for (const auto& row : Json::parse(part)) {
        std::vector<Integer> r;
        for (const auto& x : row) r.emplace_back(x.get<long>());
        d.push_back(std::move(r));
      }
      return d;
    });
    out.push_back(PermTypeMatrix::from_dense(m));
  }
  return out;
}

int cmd_fibral_solve(const Common& c, const std::string& alpha, const std::string& actions, const std::string& cvec) {
  std::vector<Rational> cs;
  for (const auto& s : split(cvec, ',')) cs.push_back(parse_rational(s));
  const auto w = solve_weights(parse_rational(alpha), parse_actions(actions), cs);
  if (!w.strong_hypothesis) std::cerr << "note: alpha <= n k; solved under alpha > k only\n";
  if (want(c, "json", {"json"})) {
    Json x = Json::array();
    for (const auto& v : w.x) x.push_back(to_string(v, true));
    emit(c, dump({{"kind", "weights"}, {"x", x}, {"strong_hypothesis", w.strong_hypothesis}}));
    return 0;
  }
  std::string line;
  for (std::size_t i = 0; i < w.x.size(); ++i) line += (i ? "," : "") + to_string(w.x[i]);
  emit(c, line + "\n");
  return 0;
}

int cmd_fibral_synth(const Common& c, std::size_t n, std::size_t k, const std::string& alpha,
                     std::size_t max_points) {
  const auto m = build_synthetic(n, k, parse_rational(alpha), c.seed, max_points);
  Json j = model_to_json(m);
  j["seed"] = c.seed;
  emit(c, dump(j));
  return 0;
}

int cmd_fibral_verify(const Common& c, const std::string& model) {
  if (model.empty()) throw ValidationError("--model is required");
  const auto r = verify_intersection_formula(model_from_json(read_json_file(model)));
  if (want(c, "json", {"json"})) {
    emit(c, dump(verify_report_to_json(r)));
  } else {
    std::ostringstream os;
    os << (r.ok ? "ok" : "FAILED") << '\n';
    for (const auto& f : r.failures) os << "  " << f << '\n';
    os << "iteration error " << format_number(r.iteration_error) << " bound " << format_number(r.iteration_bound)
       << '\n';
    emit(c, os.str());
  }
  if (!r.ok) {
    std::cerr << "error: " << r.failures.front() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Canonical heights and Green functions for systems of several maps"};
  app.require_subcommand(1);
  Common c;
  std::size_t hyperplane = 1;
  std::string other;
  int samples = 20;
  std::string t_list;
  std::string t_range;
  bool plus_minus = false;
  int ff_depth = 8;
  std::string alpha;
  std::string actions;
  std::string cvec;
  std::size_t n = 3;
  std::size_t k = 2;
  std::size_t max_points = 40;
  std::string model;
  int oracle_depth = 8;

  auto* validate = app.add_subcommand("validate", "Check a system or family file");
  validate->add_option("--system", c.system, "System or family JSON")->required();
  add_output(validate, c, "json");

  auto* height = app.add_subcommand("height", "Canonical height by local decomposition");
  height->add_option("--system", c.system)->required();
  height->add_option("--point", c.point, "a0:a1")->required();
  add_green(height, c);
  add_output(height, c, "json|csv");

  auto* oracle = app.add_subcommand("oracle", "Canonical height by word iteration");
  oracle->add_option("--system", c.system)->required();
  oracle->add_option("--point", c.point)->required();
  oracle->add_option("--depth", oracle_depth, "Word depth")->capture_default_str();
  add_output(oracle, c, "json");

  auto* local = app.add_subcommand("local", "Canonical local height for the divisor {x_j = 0}");
  local->add_option("--system", c.system)->required();
  local->add_option("--point", c.point)->required();
  local->add_option("--place", c.place, "inf or pN")->capture_default_str();
  local->add_option("--hyperplane", hyperplane, "Index j")->capture_default_str();
  add_green(local, c);
  add_output(local, c, "json");

  auto* green = app.add_subcommand("green", "Green function at an integer lift");
  green->add_option("--system", c.system)->required();
  green->add_option("--point", c.point, "Integer lift a0:a1 (not normalized)")->required();
  green->add_option("--place", c.place)->capture_default_str();
  add_green(green, c);
  add_output(green, c, "json");

  auto* commute = app.add_subcommand("commute", "Compare Green functions and heights of two commuting systems");
  commute->add_option("--system", c.system)->required();
  commute->add_option("--other", other, "Second system")->required();
  commute->add_option("--samples", samples)->capture_default_str();
  commute->add_option("--seed", c.seed)->capture_default_str();
  commute->add_option("--place", c.place)->capture_default_str();
  add_green(commute, c);
  add_output(commute, c, "json");

  auto add_t = [&](CLI::App* cmd) {
    cmd->add_option("--system", c.system, "Family JSON")->required();
    cmd->add_option("--point", c.point, "Section p0:p1 in t (default: the file's section)");
    cmd->add_option("--t", t_list, "Comma list; '...' continues a progression");
    cmd->add_option("--t-range", t_range, "Integer range a..b");
    cmd->add_flag("--pm", plus_minus, "With --t-range: follow each s by -s");
    add_green(cmd, c);
    add_output(cmd, c, "csv|json");
  };
  auto* sweep = app.add_subcommand("sweep", "Height difference across specializations with an affine fit");
  add_t(sweep);
  auto* ratio = app.add_subcommand("ratio", "Canonical height over base height across specializations");
  add_t(ratio);
  ratio->add_option("--ff-depth", ff_depth, "Depth of the function-field height")->capture_default_str();
  auto* lsweep = app.add_subcommand("local-sweep", "Local height difference against the boundary height");
  add_t(lsweep);
  lsweep->add_option("--place", c.place)->capture_default_str();
  lsweep->add_option("--hyperplane", hyperplane)->capture_default_str();

  auto* fibral = app.add_subcommand("fibral", "Component weights and synthetic models");
  fibral->require_subcommand(1);
  auto* solve = fibral->add_subcommand("solve", "Solve the component weights exactly");
  solve->add_option("--alpha", alpha)->required();
  solve->add_option("--actions", actions, "Dense 0/1 matrices joined by '+'")->required();
  solve->add_option("--c", cvec, "Comma list of rationals")->required();
  add_output(solve, c, "json");
  auto* synth = fibral->add_subcommand("synth", "Build a seeded synthetic model");
  synth->add_option("--n", n, "Components")->capture_default_str();
  synth->add_option("--k", k, "Maps")->capture_default_str();
  synth->add_option("--alpha", alpha, "Rational > k")->required();
  synth->add_option("--points", max_points, "Maximum point count")->capture_default_str();
  synth->add_option("--seed", c.seed)->capture_default_str();
  synth->add_option("--out", c.out);
  auto* verify = fibral->add_subcommand("verify", "Verify a model");
  verify->add_option("--model", model, "Model JSON")->required();
  add_output(verify, c, "json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*validate) return cmd_validate(c);
    if (*height) return cmd_height(c);
    if (*oracle) {
      c.depth = oracle_depth;
      return cmd_oracle(c);
    }
    if (*local) return cmd_local(c, hyperplane);
    if (*green) return cmd_green(c);
    if (*commute) return cmd_commute(c, other, samples);
    if (*sweep) return cmd_sweep(c, t_samples(t_list, t_range, plus_minus));
    if (*ratio) return cmd_ratio(c, t_samples(t_list, t_range, plus_minus), ff_depth);
    if (*lsweep) return cmd_local_sweep(c, t_samples(t_list, t_range, plus_minus), hyperplane);
    if (*solve) return cmd_fibral_solve(c, alpha, actions, cvec);
    if (*synth) return cmd_fibral_synth(c, n, k, alpha, max_points);
    if (*verify) return cmd_fibral_verify(c, model);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const BadParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
