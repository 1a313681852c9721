#pragma once

// JSON readers and writers for systems, families, synthetic models and
// results, plus the CSV table writer.

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynheight/canonical.hpp"
#include "dynheight/dynsys.hpp"
#include "dynheight/family.hpp"
#include "dynheight/fibral.hpp"

namespace dynheight {

using Json = nlohmann::json;

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

namespace detail {

template <class F>
auto json_guard(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed ") + what + ": " + e.what());
  }
}

inline Rational rational_field(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  return parse_rational(j.get<std::string>());
}

}  // namespace detail

/// Raw content of a system or family file.
struct SystemFile {
  std::size_t dim = 1;
  std::vector<std::vector<std::string>> lifts;
  std::optional<std::vector<std::string>> section;
};

inline SystemFile system_file_from_json(const Json& j) {
  return detail::json_guard("system file", [&] {
    SystemFile f;
    f.dim = j.at("space").at("dim").get<std::size_t>();
    if (f.dim < 1) throw ValidationError("dim must be at least 1");
    for (const auto& m : j.at("maps")) f.lifts.push_back(m.at("lift").get<std::vector<std::string>>());
    if (f.lifts.empty()) throw ValidationError("system has no maps");
    if (j.contains("section")) f.section = j.at("section").get<std::vector<std::string>>();
    return f;
  });
}

inline PolarizedSystem system_from_file(const SystemFile& f) {
  std::vector<Morphism> maps;
  for (const auto& lift : f.lifts) maps.push_back(morphism_from_strings<Integer>(f.dim, lift));
  return validate_system(std::move(maps));
}

inline ParamSystem family_from_file(const SystemFile& f) {
  std::vector<FamilyMorphism> maps;
  for (const auto& lift : f.lifts) maps.push_back(morphism_from_strings<UPoly>(f.dim, lift));
  return validate_param_system(std::move(maps));
}

inline std::optional<Section> section_from_file(const SystemFile& f) {
  if (!f.section) return std::nullopt;
  if (f.section->size() != f.dim + 1) throw ValidationError("section has the wrong number of coordinates");
  std::vector<UPoly> xs;
  for (const auto& s : *f.section) xs.push_back(to_upoly(parse_polynomial(s, 0, true)));
  return Section::normalize(std::move(xs));
}

template <class C>
Json lifts_to_json(const std::vector<BasicMorphism<C>>& maps) {
  Json out = {{"space", {{"dim", maps.front().dim()}}}, {"maps", Json::array()}};
  for (const auto& f : maps) {
    Json lift = Json::array();
    for (const auto& h : f.lift()) lift.push_back(h.to_string());
    out["maps"].push_back({{"lift", lift}});
  }
  return out;
}

inline Json system_to_json(const PolarizedSystem& s) { return lifts_to_json(s.maps()); }

inline Json family_to_json(const ParamSystem& ps, const std::optional<Section>& section = std::nullopt) {
  Json out = lifts_to_json(ps.maps());
  if (section) {
    Json coords = Json::array();
    for (const auto& x : section->coords()) coords.push_back(x.to_string());
    out["section"] = coords;
  }
  return out;
}

// Synthetic models.

inline Json model_to_json(const SyntheticModel& m) {
  Json actions = Json::array();
  for (const auto& a : m.actions) actions.push_back(a.image);
  Json c = Json::array();
  for (const auto& x : m.c) c.push_back(to_string(x, true));
  Json points = Json::array();
  for (const auto& p : m.points)
    points.push_back({{"id", p.id},
                      {"sigma", p.sigma},
                      {"images", p.images},
                      {"iE", to_string(p.iE, true)},
                      {"vf", to_string(p.vf, true)}});
  return {{"n", m.n}, {"k", m.k()}, {"alpha", to_string(m.alpha, true)},
          {"actions", actions}, {"c", c}, {"points", points}};
}

inline SyntheticModel model_from_json(const Json& j) {
  return detail::json_guard("model", [&] {
    SyntheticModel m;
    m.n = j.at("n").get<std::size_t>();
    m.alpha = detail::rational_field(j.at("alpha"));
    for (const auto& a : j.at("actions")) m.actions.push_back({a.get<std::vector<std::size_t>>()});
    if (j.at("k").get<std::size_t>() != m.actions.size()) throw ValidationError("k does not match the action count");
    for (const auto& x : j.at("c")) m.c.push_back(detail::rational_field(x));
    for (const auto& p : j.at("points")) {
      ModelPoint pt;
      pt.id = p.at("id").get<std::size_t>();
      pt.sigma = p.at("sigma").get<std::size_t>();
      pt.images = p.at("images").get<std::vector<std::size_t>>();
      pt.iE = detail::rational_field(p.at("iE"));
      pt.vf = detail::rational_field(p.at("vf"));
      m.points.push_back(std::move(pt));
    }
    check_actions(m.n, m.actions);
    return m;
  });
}

inline Json verify_report_to_json(const VerifyReport& r) {
  Json x = Json::array();
  for (const auto& v : r.x) x.push_back(to_string(v, true));
  return {{"kind", "verify"},
          {"ok", r.ok},
          {"failures", r.failures},
          {"x", x},
          {"weight_residual", to_string(r.weight_residual, true)},
          {"intersection_residual", to_string(r.intersection_residual, true)},
          {"invariant_residual", to_string(r.invariant_residual, true)},
          {"iterations", r.iterations},
          {"iteration_error", r.iteration_error},
          {"iteration_bound", r.iteration_bound}};
}

inline VerifyReport verify_report_from_json(const Json& j) {
  return detail::json_guard("verify report", [&] {
    if (j.at("kind") != "verify") throw ValidationError("not a verify report");
    VerifyReport r;
    r.ok = j.at("ok").get<bool>();
    r.failures = j.at("failures").get<std::vector<std::string>>();
    for (const auto& v : j.at("x")) r.x.push_back(detail::rational_field(v));
    r.weight_residual = detail::rational_field(j.at("weight_residual"));
    r.intersection_residual = detail::rational_field(j.at("intersection_residual"));
    r.invariant_residual = detail::rational_field(j.at("invariant_residual"));
    r.iterations = j.at("iterations").get<int>();
    r.iteration_error = j.at("iteration_error").get<double>();
    r.iteration_bound = j.at("iteration_bound").get<double>();
    return r;
  });
}

// Height results.

inline Json height_result_to_json(const CanonicalHeightResult& r, const ProjPointQ& p) {
  Json places = Json::object();
  for (const auto& [v, g] : r.per_place) places[v.to_string()] = g;
  return {{"kind", "height"}, {"point", p.to_string()}, {"value", r.value}, {"tail_bound", r.tail_bound},
          {"depth_used", r.depth_used}, {"certified", r.certified}, {"per_place", places}};
}

inline CanonicalHeightResult height_result_from_json(const Json& j) {
  return detail::json_guard("height result", [&] {
    if (j.at("kind") != "height") throw ValidationError("not a height result");
    CanonicalHeightResult r;
    r.value = j.at("value").get<double>();
    r.tail_bound = j.at("tail_bound").get<double>();
    r.depth_used = j.at("depth_used").get<int>();
    r.certified = j.at("certified").get<bool>();
    for (const auto& [key, g] : j.at("per_place").items()) r.per_place[Place::parse(key)] = g.get<double>();
    return r;
  });
}

inline Json oracle_result_to_json(const OracleResult& r, const ProjPointQ& p) {
  return {{"kind", "oracle"}, {"point", p.to_string()}, {"value", r.value}, {"tail_bound", r.tail_bound},
          {"depth", r.depth}};
}

inline OracleResult oracle_result_from_json(const Json& j) {
  return detail::json_guard("oracle result", [&] {
    if (j.at("kind") != "oracle") throw ValidationError("not an oracle result");
    return OracleResult{j.at("value").get<double>(), j.at("tail_bound").get<double>(), j.at("depth").get<int>()};
  });
}

inline Json green_trace_to_json(const GreenTrace& t, const Place& v) {
  return {{"kind", "green"}, {"place", v.to_string()}, {"value", t.value}, {"base", t.base},
          {"increments", t.increments}, {"step_bound", t.step_bound}, {"certified", t.certified},
          {"depth", t.depth}, {"contraction", t.contraction}, {"tail_bound", t.tail_bound()}};
}

inline GreenTrace green_trace_from_json(const Json& j) {
  return detail::json_guard("green result", [&] {
    if (j.at("kind") != "green") throw ValidationError("not a green result");
    GreenTrace t;
    t.value = j.at("value").get<double>();
    t.base = j.at("base").get<double>();
    t.increments = j.at("increments").get<std::vector<double>>();
    t.step_bound = j.at("step_bound").get<double>();
    t.certified = j.at("certified").get<bool>();
    t.depth = j.at("depth").get<int>();
    t.contraction = j.at("contraction").get<double>();
    return t;
  });
}

// Tables.

/// %.12g, the fixed numeric format of every table.
inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline constexpr const char* kCsvHeader = "t,h_T,point,value,aux";

inline void write_csv(std::ostream& os, const SweepTable& table) {
  os << kCsvHeader << '\n';
  for (const auto& r : table.rows)
    os << to_string(r.t) << ',' << format_number(r.h_T) << ',' << r.point << ',' << format_number(r.value) << ','
       << format_number(r.aux) << '\n';
}

inline Json table_to_json(const SweepTable& table, const std::string& kind) {
  Json rows = Json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"t", to_string(r.t)}, {"h_T", r.h_T}, {"point", r.point}, {"value", r.value}, {"aux", r.aux}});
  Json skipped = Json::array();
  for (const auto& s : table.skipped)
    skipped.push_back({{"t", to_string(s.t)}, {"point", s.point}, {"reason", s.reason}});
  return {{"kind", kind}, {"rows", rows}, {"skipped", skipped}};
}

inline SweepTable table_from_json(const Json& j) {
  return detail::json_guard("table", [&] {
    SweepTable t;
    for (const auto& r : j.at("rows"))
      t.rows.push_back({parse_rational(r.at("t").get<std::string>()), r.at("h_T").get<double>(),
                        r.at("point").get<std::string>(), r.at("value").get<double>(), r.at("aux").get<double>()});
    for (const auto& s : j.at("skipped"))
      t.skipped.push_back({parse_rational(s.at("t").get<std::string>()), s.at("point").get<std::string>(),
                           s.at("reason").get<std::string>()});
    return t;
  });
}

}  // namespace dynheight
