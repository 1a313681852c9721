// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.  Reference values come from oracles written here, independent of
// the library's own routes.

#include <gmp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dynheight/dynheight.hpp"

namespace {

using namespace dynheight;

// Per-criterion failure log.
struct Check {
  std::ostringstream why;
  bool ok = true;

  void expect(bool cond, const std::string& what) {
    if (cond) return;
    if (ok) why << what;
    ok = false;
  }
};

Morphism map1(const std::string& a, const std::string& b) { return morphism_from_strings<Integer>(1, {a, b}); }
FamilyMorphism fam1(const std::string& a, const std::string& b) { return morphism_from_strings<UPoly>(1, {a, b}); }

PolarizedSystem monomial23() { return validate_system({map1("X0^2", "X1^2"), map1("X0^3", "X1^3")}); }
PolarizedSystem monomial6() { return validate_system({map1("X0^6", "X1^6")}); }
PolarizedSystem plus_one() { return validate_system({map1("X0^2 + X1^2", "X1^2")}); }
PolarizedSystem cheb23() {
  return validate_system({map1("X0^2 - 2*X1^2", "X1^2"), map1("X0^3 - 3*X0*X1^2", "X1^3")});
}
PolarizedSystem cheb6() {
  return validate_system({map1("X0^6 - 6*X0^4*X1^2 + 9*X0^2*X1^4 - 2*X1^6", "X1^6")});
}
PolarizedSystem minus_one() { return validate_system({map1("X0^2 - X1^2", "X1^2")}); }

GreenConfig depth(int n) {
  GreenConfig c;
  c.depth = n;
  return c;
}

Rational q(long a, long b = 1) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

std::string num(double x) { return format_number(x); }

// 2^-n ln a_n for a_0 = 0, a_{m+1} = a_m^2 + 1, in raw GMP.
double plus_one_orbit_oracle(int n) {
  mpz_t a;
  mpz_init_set_ui(a, 0);
  for (int i = 0; i < n; ++i) {
    mpz_mul(a, a, a);
    mpz_add_ui(a, a, 1);
  }
  long e = 0;
  const double m = mpz_get_d_2exp(&e, a);
  mpz_clear(a);
  return (std::log(m) + static_cast<double>(e) * std::log(2.0)) / std::ldexp(1.0, n);
}

// T_d(z + 1/z) = z^d + 1/z^d, so the height of 3 under Chebyshev maps is ln
// of the larger root of z^2 - 3z + 1.
double chebyshev_three() { return std::log((3.0 + std::sqrt(5.0)) / 2.0); }

ProjPointQ random_point(Lcg64& rng, long bound = 100) {
  while (true) {
    const long a = rng.between(-bound, bound);
    const long b = rng.between(-bound, bound);
    if (a == 0 && b == 0) continue;
    return ProjPointQ::from_integers({Integer(a), Integer(b)});
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Criteria.

void monomial_exactness(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = monomial23();
  const auto p = ProjPointQ::parse("2:1");
  const auto green = canonical_height(s, p, depth(20));
  const auto oracle = canonical_height_oracle(s, p, 6);
  const double elapsed = seconds_since(t0);
  c.expect(std::fabs(green.value - std::log(2.0)) <= 1e-8, "green route " + num(green.value));
  c.expect(std::fabs(oracle.value - std::log(2.0)) <= 1e-8, "oracle route " + num(oracle.value));
  c.expect(elapsed < 1.0, "runtime " + num(elapsed) + " s");
}

void orbit_oracle_match(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = canonical_height(plus_one(), ProjPointQ::parse("0:1"), depth(20));
  const double elapsed = seconds_since(t0);
  const double ref = plus_one_orbit_oracle(20);
  c.expect(std::fabs(r.value - ref) <= 1e-4, "height " + num(r.value) + " vs orbit oracle " + num(ref));
  c.expect(elapsed < 5.0, "runtime " + num(elapsed) + " s");
}

void two_route_consistency(Check& c) {
  Lcg64 rng(3);
  for (const auto& s : {monomial23(), plus_one(), cheb23()}) {
    for (int i = 0; i < 20; ++i) {
      const auto p = random_point(rng);
      const auto green = canonical_height(s, p, depth(20));
      const auto oracle = canonical_height_oracle(s, p, 8);
      const double gap = std::fabs(green.value - oracle.value);
      c.expect(gap <= green.tail_bound + oracle.tail_bound, "routes differ by " + num(gap) + " at " + p.to_string());
      const double res = functional_eq_residual(s, p, depth(20));
      c.expect(res < 1e-6, "functional equation residual " + num(res) + " at " + p.to_string());
    }
  }
}

void commuting_equality(Check& c) {
  Lcg64 rng(4);
  std::vector<std::vector<Integer>> lifts;
  std::vector<ProjPointQ> points;
  for (int i = 0; i < 20; ++i) {
    points.push_back(random_point(rng));
    lifts.push_back(points.back().coords());
  }
  const auto cfg = depth(16);
  const std::vector<std::pair<PolarizedSystem, PolarizedSystem>> pairs{{monomial23(), monomial6()},
                                                                       {cheb23(), cheb6()}};
  for (const auto& [f, g] : pairs) {
    const double metric = metric_equality_report(f, g, lifts, Place::infinity(), cfg);
    c.expect(metric < 1e-6, "green functions differ by " + num(metric));
    const double heights = height_equality_report(f, g, points, cfg);
    c.expect(heights < 1e-6, "heights differ by " + num(heights));
  }
  const auto p = ProjPointQ::parse("3:1");
  const double h = canonical_height(cheb23(), p, depth(20)).value;
  c.expect(std::fabs(h - chebyshev_three()) <= 1e-5, "closed form missed: " + num(h));
  const auto oracle = canonical_height_oracle(cheb23(), p, 8);
  c.expect(std::fabs(oracle.value - chebyshev_three()) <= oracle.tail_bound, "oracle cross-check " + num(oracle.value));
}

void function_field_limit(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ps = validate_param_system({fam1("X0^2 + t*X1^2", "X1^2")});
  const auto p = Section::parse("0:1");
  const auto ff = ff_canonical_height(ps, p, 8);
  c.expect(ff.value == q(1, 2), "function-field height " + to_string(ff.value));
  c.expect(ff.stabilized(), "function-field height not stabilized by depth 8");
  std::vector<Rational> ts;
  for (long t = 100; t <= 1000000; t *= 10) ts.push_back(q(t));
  const auto r = limit_ratio(ps, p, ts, depth(20));
  const double elapsed = seconds_since(t0);
  c.expect(r.table.rows.size() == ts.size(), "rows skipped");
  if (r.table.rows.size() == ts.size()) {
    c.expect(std::fabs(r.table.rows.back().value - 0.5) <= 0.05, "ratio " + num(r.table.rows.back().value));
    for (std::size_t i = 1; i < r.table.rows.size(); ++i)
      c.expect(std::fabs(r.table.rows[i].aux) <= std::fabs(r.table.rows[i - 1].aux) + 1e-3,
               "deviation grows at t = " + to_string(r.table.rows[i].t));
  }
  c.expect(elapsed < 60.0, "runtime " + num(elapsed) + " s");
}

void variation_envelope(Check& c) {
  std::vector<Rational> ts;
  for (long s = 1; s <= 50; ++s) {
    ts.push_back(q(s));
    ts.push_back(q(-s));
  }
  const auto ps = validate_param_system({fam1("X0^2 + t*X1^2", "X1^2")});
  const auto r = variation_sweep(ps, {Section::parse("0:1")}, ts, depth(20));
  c.expect(r.table.rows.size() == 100, "expected 100 rows");
  c.expect(r.fit.held_out == 50, "held-out half has " + std::to_string(r.fit.held_out) + " rows");
  c.expect(r.fit.violations.empty(), std::to_string(r.fit.violations.size()) + " held-out violations");
  const auto constant = validate_param_system({fam1("X0^2", "X1^2"), fam1("X0^3", "X1^3")});
  const auto k = variation_sweep(constant, {Section::parse("t:1"), Section::parse("2:3")}, ts, depth(12));
  c.expect(k.fit.c1 == 0.0 && k.fit.c2 == 0.0, "constant family fit " + num(k.fit.c1) + ", " + num(k.fit.c2));
}

void local_variation(Check& c) {
  const auto ps = validate_param_system({fam1("X0^2", "t*X1^2")});
  const auto x = Section::parse("1:1");
  const auto at2 = local_variation_sweep(ps, x, 1, Place::prime(2), {q(2), q(4), q(8), q(16)}, depth(16));
  c.expect(at2.table.rows.size() == 4, "rows skipped at p2");
  for (const auto& row : at2.table.rows)
    c.expect(std::fabs(row.value) <= row.aux, "bound fails at t = " + to_string(row.t));
  const auto at7 =
      local_variation_sweep(ps, x, 1, Place::prime(7), {q(1), q(3), q(5), q(7), q(9), q(11)}, depth(16));
  c.expect(at7.table.rows.size() == 6, "rows skipped at p7");
  for (const auto& row : at7.table.rows)
    c.expect(std::fabs(row.value) <= 1e-9, "nonzero difference at t = " + to_string(row.t));
}

void fibral_exactness(Check& c) {
  const PermTypeMatrix id{{0, 1}};
  const PermTypeMatrix swap{{1, 0}};
  const auto w = solve_weights(q(5), {id, swap}, {q(1), q(0)});
  c.expect(w.x == std::vector<Rational>{q(4, 15), q(1, 15)}, "weights differ from (4/15, 1/15)");
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Lcg64 pick(seed * 7919);
    const std::size_t n = 1 + pick.below(6);
    const std::size_t k = 1 + pick.below(3);
    const Rational alpha = Rational(static_cast<long>(k)) + q(1 + pick.between(0, 5), 3);
    const auto rep = verify_intersection_formula(build_synthetic(n, k, alpha, seed));
    c.expect(rep.ok && rep.weight_residual == 0 && rep.intersection_residual == 0 && rep.invariant_residual == 0,
             "seeded model " + std::to_string(seed) + " fails");
  }
  auto m = build_synthetic(3, 2, q(5), 5);
  const std::size_t touched = m.points.size() / 2;
  m.points[touched].iE += q(1, 7);
  // Oracle for the affected set: the touched point and every point mapping to it.
  std::set<std::size_t> expected{touched};
  for (const auto& pt : m.points)
    for (std::size_t img : pt.images)
      if (img == touched) expected.insert(pt.id);
  std::string ids;
  for (std::size_t id : expected) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
  const auto rep = verify_intersection_formula(m);
  c.expect(!rep.ok, "perturbed model passes");
  c.expect(!rep.failures.empty() && rep.failures[0].rfind("intersection identity fails at points " + ids + " ", 0) == 0,
           "diagnostic does not name points " + ids);
}

void spectral_bounds(Check& c) {
  Lcg64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    DenseMatrix<Rational> m(6, std::vector<Rational>(6));
    for (auto& row : m)
      for (auto& x : row) x = q(rng.between(0, 10), rng.between(1, 4));
    const auto [lo, hi] = row_sum_bounds(m);
    const double rho = spectral_radius(to_doubles(m)).value;
    c.expect(lo.get_d() - 1e-6 <= rho && rho <= hi.get_d() + 1e-6, "radius outside row sums in trial " +
                                                                        std::to_string(trial));
  }
  int weak_cases = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    const std::size_t k = 1 + rng.below(3);
    std::vector<PermTypeMatrix> acts(k);
    for (auto& a : acts)
      for (std::size_t j = 0; j < n; ++j) a.image.push_back(rng.below(n));
    const double rho = spectral_radius(to_doubles(action_sum(acts))).value;
    c.expect(rho <= static_cast<double>(k) + 1e-6, "radius " + num(rho) + " above k");
    std::vector<Rational> cs;
    for (std::size_t j = 0; j < n; ++j) cs.push_back(rng.small_rational(5, 5));
    const Rational kq(static_cast<long>(k));
    for (const Rational& alpha : {Rational(kq + q(1, 10)), Rational(kq + q(1, 2)), Rational(kq * static_cast<long>(n)),
                                  Rational(kq * static_cast<long>(n) + 1)}) {
      if (alpha <= kq) continue;
      if (alpha <= kq * static_cast<long>(n)) ++weak_cases;
      try {
        solve_weights(alpha, acts, cs);
      } catch (const std::exception& e) {
        c.expect(false, std::string("solve_weights failed: ") + e.what());
      }
    }
  }
  c.expect(weak_cases > 0, "no alpha in (k, nk] tested");
}

void invariant_suite(Check& c) {
  Lcg64 rng(10);
  const std::vector<PolarizedSystem> systems{monomial23(), plus_one(), cheb23(),
                                             validate_system({map1("3*X0^2 + X1^2", "6*X1^2")})};
  const std::vector<Place> places{Place::infinity(), Place::prime(2), Place::prime(3), Place::prime(5)};
  int cases = 0;

  for (int i = 0; i < 50; ++i, ++cases) {
    const auto& s = systems[rng.below(systems.size())];
    const auto p = random_point(rng);
    long m = 0;
    while (m == 0) m = rng.between(-60, 60);
    const auto& v = places[rng.below(places.size())];
    std::vector<Integer> scaled;
    for (const auto& x : p.coords()) scaled.push_back(x * m);
    const double shift = green_local(s, scaled, v, depth(12)) - green_local(s, p.coords(), v, depth(12));
    c.expect(std::fabs(shift - log_abs(Integer(m), v)) <= 1e-9, "homogeneity fails at " + p.to_string());
  }

  const auto cheb = cheb23();
  for (int i = 0; i < 50; ++i, ++cases) {
    long m = 0;
    while (m == 0 || m == 1 || m == -1) m = rng.between(-40, 40);
    const auto scaled = validate_system({cheb[0].rescaled(Integer(m)), cheb[1]});
    const auto p = random_point(rng);
    const double a = canonical_height(cheb, p, depth(12)).value;
    const double b = canonical_height(scaled, p, depth(12)).value;
    c.expect(std::fabs(a - b) <= 1e-8, "lift rescaling by " + std::to_string(m) + " moves " + p.to_string());
  }

  const auto bad = validate_system({map1("2*X0^2 + 3*X1^2", "5*X1^2")});
  for (int i = 0; i < 50; ++i, ++cases) {
    const auto p = random_point(rng);
    // Product formula for a coordinate, via an independent factorization.
    Integer n = p[0] * p[1] + 1;
    if (n == 0) n = 7;
    double pf = std::log(std::fabs(n.get_d()));
    for (unsigned long prime : prime_factors(n)) pf += log_abs(n, Place::prime(prime));
    c.expect(std::fabs(pf) <= 1e-12, "product formula off by " + num(pf));
    const double h = canonical_height(bad, p, depth(14)).value;
    for (std::size_t j = 0; j < 2; ++j) {
      if (is_zero(p[j])) continue;
      std::set<unsigned long> primes;
      for (unsigned long r : bad_primes(bad)) primes.insert(r);
      for (unsigned long r : prime_factors(p[j])) primes.insert(r);
      double total = canonical_local_height(bad, p, j, Place::infinity(), depth(14));
      for (unsigned long r : primes) total += canonical_local_height(bad, p, j, Place::prime(r), depth(14));
      c.expect(std::fabs(total - h) <= 1e-12, "local-global gap " + num(total - h) + " at " + p.to_string());
    }
  }

  const std::vector<std::pair<PolarizedSystem, std::vector<std::string>>> preperiodic{
      {monomial23(), {"0:1", "1:0", "1:1", "-1:1"}},
      {cheb23(), {"2:1", "-2:1", "0:1", "1:1", "-1:1", "1:0"}},
      {minus_one(), {"0:1", "1:1", "-1:1", "1:0"}},
  };
  for (int i = 0; i < 50; ++i, ++cases) {
    const auto& [s, pts] = preperiodic[rng.below(preperiodic.size())];
    const auto p = ProjPointQ::parse(pts[rng.below(pts.size())]);
    c.expect(forward_orbit(s, p).has_value(), p.to_string() + " has an infinite orbit");
    const auto r = canonical_height(s, p, depth(10 + static_cast<int>(rng.below(9))));
    c.expect(std::fabs(r.value) <= r.tail_bound, "preperiodic " + p.to_string() + " has height " + num(r.value));
  }
  c.expect(cases == 200, "ran " + std::to_string(cases) + " cases");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria{
      {"monomial exactness", monomial_exactness},
      {"orbit oracle match", orbit_oracle_match},
      {"two-route consistency", two_route_consistency},
      {"commuting equality", commuting_equality},
      {"function-field limit", function_field_limit},
      {"variation envelope", variation_envelope},
      {"local variation", local_variation},
      {"fibral exactness", fibral_exactness},
      {"spectral bounds", spectral_bounds},
      {"invariant suite", invariant_suite},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double elapsed = seconds_since(t0);
    std::printf("%s %2zu %s (%.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, elapsed,
                c.ok ? "" : ": ", c.why.str().c_str());
    failed += c.ok ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
