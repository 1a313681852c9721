#pragma once

// Parametric systems over Q(t): specialization, function-field canonical
// heights and the sweeps over specializations.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dynheight/canonical.hpp"
#include "dynheight/dynsys.hpp"
#include "dynheight/exactnum.hpp"
#include "dynheight/projective.hpp"
#include "dynheight/upoly.hpp"

namespace dynheight {

using Section = ProjPointFF;

/// Maps with coefficients in Z[t].  good_locus() is R(t), the product of
/// the t-resultants on P^1; T0 = {t : R(t) != 0}.
class ParamSystem {
 public:
  const std::vector<FamilyMorphism>& maps() const { return maps_; }
  std::size_t k() const { return maps_.size(); }
  unsigned alpha() const { return alpha_; }
  std::size_t dim() const { return maps_.front().dim(); }
  const UPoly& good_locus() const { return good_locus_; }

  friend ParamSystem validate_param_system(std::vector<FamilyMorphism> maps);

 private:
  std::vector<FamilyMorphism> maps_;
  unsigned alpha_ = 0;
  UPoly good_locus_;
};

/// Checks alpha > k and that R(t) is not identically zero.  Off P^1 the
/// locus is not computed (R = 1) and bad fibers surface at specialization.
inline ParamSystem validate_param_system(std::vector<FamilyMorphism> maps) {
  if (maps.empty()) throw ValidationError("empty system");
  const std::size_t dim = maps.front().dim();
  unsigned alpha = 0;
  for (const auto& f : maps) {
    if (f.dim() != dim) throw ValidationError("maps act on different spaces");
    alpha += f.degree();
  }
  if (alpha <= maps.size()) throw ValidationError("not polarized with alpha > k");
  ParamSystem s;
  s.good_locus_ = UPoly(1);
  if (dim == 1) {
    for (const auto& f : maps) {
      const UPoly r = resultant_p1(f);
      if (r.is_zero()) throw ValidationError("not a morphism on the generic fiber");
      s.good_locus_ *= r;
    }
  }
  s.maps_ = std::move(maps);
  s.alpha_ = alpha;
  return s;
}

/// h_T(t): naive height of t = [a:b] in P^1(Q).
inline double base_height(const Rational& t) {
  return weil_height(ProjPointQ::from_integers({Integer(t.get_num()), Integer(t.get_den())}));
}

/// The system at t = t0, lifts cleared of denominators and canonicalized.
inline PolarizedSystem specialize(const ParamSystem& ps, const Rational& t0) {
  const Integer a = t0.get_num();
  const Integer b = t0.get_den();
  if (ps.dim() == 1 && is_zero(ps.good_locus().eval(t0))) throw BadParameter("t ∉ T⁰");
  std::vector<Morphism> maps;
  for (const auto& f : ps.maps()) {
    int D = 0;
    for (const auto& h : f.lift())
      for (const auto& [e, c] : h.terms()) D = std::max(D, c.degree());
    Lift<Integer> lift;
    for (const auto& h : f.lift()) {
      HomogPoly<Integer> g(h.num_vars(), h.degree());
      for (const auto& [e, c] : h.terms()) g.add_term(e, c.eval_homog(a, b, static_cast<unsigned>(D)));
      lift.push_back(std::move(g));
    }
    if (std::all_of(lift.begin(), lift.end(), [](const auto& g) { return g.is_zero(); }))
      throw BadParameter("t ∉ T⁰");
    maps.emplace_back(std::move(lift));
  }
  try {
    return validate_system(std::move(maps));
  } catch (const ValidationError&) {
    throw BadParameter("t ∉ T⁰");
  }
}

struct FFHeightResult {
  Rational value;           // alpha^-n sum_{|w| = n} h(f_w P)
  Rational last_increment;  // value(n) - value(n-1); 0 for n = 0
  int depth = 0;
  bool stabilized() const { return sgn(last_increment) == 0; }
};

/// Function-field canonical height at depth n by exact polynomial iteration.
inline FFHeightResult ff_canonical_height(const ParamSystem& ps, const Section& p, int n,
                                          std::uint64_t node_budget = default_node_budget()) {
  if (n < 0) throw ValidationError("depth must be nonnegative");
  if (p.dim() != ps.dim()) throw ValidationError("section does not match the ambient dimension");
  detail::check_budget(ps.k(), n, node_budget);
  unsigned dmax = 1;
  unsigned tdeg = 0;
  for (const auto& f : ps.maps()) {
    dmax = std::max(dmax, f.degree());
    for (const auto& h : f.lift())
      for (const auto& [e, c] : h.terms()) tdeg = std::max(tdeg, static_cast<unsigned>(std::max(0, c.degree())));
  }
  double est = ff_height(p);
  for (int m = 0; m < n; ++m) {
    est = dmax * est + tdeg;
    if (est > 65536) throw BudgetExceeded("budget exceeded: section degree too large at depth " + std::to_string(n));
  }

  // level[m] = sum over words of length m of ff_height(f_w P).
  std::vector<Integer> level(n + 1, Integer(0));
  auto visit = [&](auto&& self, const Section& x, int depth) -> void {
    level[depth] += ff_height(x);
    if (depth == n) return;
    for (const auto& f : ps.maps()) self(self, morphism_eval(f, x), depth + 1);
  };
  visit(visit, p, 0);

  auto partial = [&](int m) {
    Integer denom;
    mpz_ui_pow_ui(denom.get_mpz_t(), ps.alpha(), static_cast<unsigned long>(m));
    Rational r(level[m], denom);
    r.canonicalize();
    return r;
  };
  FFHeightResult r;
  r.depth = n;
  r.value = partial(n);
  r.last_increment = n == 0 ? Rational(0) : Rational(r.value - partial(n - 1));
  return r;
}

/// One output row; value and aux depend on the experiment.
struct SweepRow {
  Rational t;
  double h_T = 0;
  std::string point;
  double value = 0;
  double aux = 0;
};

struct SkippedRow {
  Rational t;
  std::string point;
  std::string reason;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::vector<SkippedRow> skipped;
};

/// D <= c1 h_T + c2 fitted on the training rows; violations index held-out rows.
struct EnvelopeFit {
  double c1 = 0;
  double c2 = 0;
  std::size_t train = 0;
  std::size_t held_out = 0;
  std::vector<std::size_t> violations;
};

struct VariationSweepResult {
  SweepTable table;
  std::vector<bool> held_out;  // parallel to table.rows
  EnvelopeFit fit;
};

inline constexpr double kEnvelopeSlack = 1e-9;

/// Two-pass max-slope envelope.  c1 is the largest slope between
/// consecutive distinct h values of the upper profile, c2 the smallest
/// intercept that covers every training row.
inline EnvelopeFit fit_envelope(const std::vector<double>& h, const std::vector<double>& d,
                                const std::vector<bool>& held_out) {
  EnvelopeFit fit;
  std::map<double, double> profile;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (held_out[i]) continue;
    ++fit.train;
    auto [it, fresh] = profile.emplace(h[i], d[i]);
    if (!fresh) it->second = std::max(it->second, d[i]);
  }
  for (auto it = profile.begin(); it != profile.end() && std::next(it) != profile.end(); ++it) {
    const auto nx = std::next(it);
    fit.c1 = std::max(fit.c1, (nx->second - it->second) / (nx->first - it->first));
  }
  for (std::size_t i = 0; i < h.size(); ++i)
    if (!held_out[i]) fit.c2 = std::max(fit.c2, d[i] - fit.c1 * h[i]);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!held_out[i]) continue;
    ++fit.held_out;
    if (d[i] > fit.c1 * h[i] + fit.c2 + kEnvelopeSlack) fit.violations.push_back(i);
  }
  return fit;
}

/// Rows (t, h_T, x, D = |h^_t(x_t) - h(x_t)|, aux = h^_t(x_t)).  Samples at
/// even positions of t_samples train the envelope, odd positions are held out.
inline VariationSweepResult variation_sweep(const ParamSystem& ps, const std::vector<Section>& points,
                                            const std::vector<Rational>& t_samples, const GreenConfig& cfg) {
  VariationSweepResult out;
  for (std::size_t s = 0; s < t_samples.size(); ++s) {
    const Rational& t = t_samples[s];
    for (const auto& x : points) {
      try {
        const auto sys = specialize(ps, t);
        const auto xt = x.at(t);
        const double hat = canonical_height(sys, xt, cfg).value;
        out.table.rows.push_back({t, base_height(t), xt.to_string(), std::fabs(hat - weil_height(xt)), hat});
        out.held_out.push_back(s % 2 == 1);
      } catch (const BadParameter& e) {
        out.table.skipped.push_back({t, x.to_string(), e.what()});
      }
    }
  }
  std::vector<double> h;
  std::vector<double> d;
  for (const auto& r : out.table.rows) {
    h.push_back(r.h_T);
    d.push_back(r.value);
  }
  out.fit = fit_envelope(h, d, out.held_out);
  return out;
}

struct LimitRatioResult {
  SweepTable table;
  Rational ff_value;
};

/// Rows (t, h_T, P_t, h^_t(P_t) / h_T(t), ratio - ff value).
inline LimitRatioResult limit_ratio(const ParamSystem& ps, const Section& p, const std::vector<Rational>& ts,
                                    const GreenConfig& cfg, int ff_depth = 8) {
  LimitRatioResult out;
  out.ff_value = ff_canonical_height(ps, p, ff_depth).value;
  const double ff = out.ff_value.get_d();
  for (const auto& t : ts) {
    const double ht = base_height(t);
    if (!(ht > 0)) throw BadParameter("h_T(t) must be positive, got t = " + t.get_str());
    try {
      const auto sys = specialize(ps, t);
      const auto pt = p.at(t);
      const double ratio = canonical_height(sys, pt, cfg).value / ht;
      out.table.rows.push_back({t, ht, pt.to_string(), ratio, ratio - ff});
    } catch (const BadParameter& e) {
      out.table.skipped.push_back({t, p.to_string(), e.what()});
    }
  }
  return out;
}

/// deg(R) ln max(|a|_v, |b|_v) - ln |R_hom(a, b)|_v at t0 = a/b.
inline double boundary_local_height(const UPoly& r, const Rational& t0, const Place& v) {
  if (r.is_zero()) throw ValidationError("boundary polynomial is zero");
  const Integer a = t0.get_num();
  const Integer b = t0.get_den();
  const unsigned D = static_cast<unsigned>(r.degree());
  const Integer value = r.eval_homog(a, b, D);
  if (is_zero(value)) throw BadParameter("on boundary");
  double m = log_abs(b, v);
  if (!is_zero(a)) m = std::max(m, log_abs(a, v));
  return D * m - log_abs(value, v);
}

struct LocalSweepResult {
  SweepTable table;
  double empirical_c = 0;  // max |difference| / max(1, lambda_dU)
};

/// Rows (t, h_T, x_t, lambda^_{t,v}(x_t) - lambda_v(x_t), lambda_dU(t, v)).
inline LocalSweepResult local_variation_sweep(const ParamSystem& ps, const Section& x, std::size_t j,
                                              const Place& v, const std::vector<Rational>& t_samples,
                                              const GreenConfig& cfg) {
  LocalSweepResult out;
  for (const auto& t : t_samples) {
    try {
      const auto sys = specialize(ps, t);
      const auto xt = x.at(t);
      const double diff = canonical_local_height(sys, xt, j, v, cfg) - local_height_hyperplane(xt, j, v);
      const double boundary = boundary_local_height(ps.good_locus(), t, v);
      out.table.rows.push_back({t, base_height(t), xt.to_string(), diff, boundary});
      out.empirical_c = std::max(out.empirical_c, std::fabs(diff) / std::max(1.0, boundary));
    } catch (const BadParameter& e) {
      out.table.skipped.push_back({t, x.to_string(), e.what()});
    }
  }
  return out;
}

}  // namespace dynheight
