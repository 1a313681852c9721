#include <gtest/gtest.h>

#include <sstream>

#include "dynheight/io.hpp"

namespace dynheight {
namespace {

Json parse(const char* text) { return Json::parse(text); }

TEST(SystemFile, RoundTrip) {
  const auto j = parse(R"({"space":{"dim":1},"maps":[{"lift":["X0^2 + X1^2","X1^2"]},{"lift":["X0^4","X1^4"]}]})");
  const auto s = system_from_file(system_file_from_json(j));
  EXPECT_EQ(s.k(), 2u);
  const auto again = system_from_file(system_file_from_json(system_to_json(s)));
  ASSERT_EQ(again.k(), s.k());
  for (std::size_t i = 0; i < s.k(); ++i) EXPECT_EQ(again.maps()[i].to_string(), s.maps()[i].to_string());
}

TEST(SystemFile, Rejections) {
  EXPECT_THROW(system_file_from_json(parse(R"({"maps":[]})")), ValidationError);
  EXPECT_THROW(system_file_from_json(parse(R"({"space":{"dim":1},"maps":[]})")), ValidationError);
  EXPECT_THROW(system_file_from_json(parse(R"({"space":{"dim":1},"maps":[{"lift":[1,2]}]})")), ValidationError);
  // Degree 1 gives alpha = k.
  const auto f = system_file_from_json(parse(R"({"space":{"dim":1},"maps":[{"lift":["X0","X1"]}]})"));
  EXPECT_THROW(system_from_file(f), ValidationError);
  EXPECT_THROW(read_json_file("/nonexistent/file.json"), ValidationError);
}

TEST(FamilyFile, RoundTripWithSection) {
  const auto j = parse(R"({"space":{"dim":1},"maps":[{"lift":["X0^2 + t*X1^2","X1^2"]}],"section":["t","1"]})");
  const auto f = system_file_from_json(j);
  const auto ps = family_from_file(f);
  const auto sec = section_from_file(f);
  ASSERT_TRUE(sec.has_value());
  const auto out = family_to_json(ps, sec);
  const auto f2 = system_file_from_json(out);
  EXPECT_EQ(family_to_json(family_from_file(f2), section_from_file(f2)), out);
  EXPECT_EQ(out["section"][0], "t");
}

TEST(FamilyFile, SectionArity) {
  const auto j = parse(R"({"space":{"dim":1},"maps":[{"lift":["X0^2","X1^2"]}],"section":["1"]})");
  EXPECT_THROW(section_from_file(system_file_from_json(j)), ValidationError);
}

TEST(ModelFile, RoundTripAndVerify) {
  const auto m = build_synthetic(3, 2, Rational(9, 2), 11);
  const auto back = model_from_json(Json::parse(model_to_json(m).dump()));
  EXPECT_EQ(model_to_json(back), model_to_json(m));
  const auto rep = verify_intersection_formula(back);
  EXPECT_TRUE(rep.ok);
  const auto rep2 = verify_report_from_json(Json::parse(verify_report_to_json(rep).dump()));
  EXPECT_EQ(rep2.x, rep.x);
  EXPECT_EQ(rep2.ok, rep.ok);
  EXPECT_EQ(rep2.iteration_bound, rep.iteration_bound);
}

TEST(ModelFile, RejectsWrongK) {
  auto j = model_to_json(build_synthetic(2, 1, Rational(3), 1));
  j["k"] = 2;
  EXPECT_THROW(model_from_json(j), ValidationError);
}

TEST(Results, HeightOracleGreenRoundTrip) {
  const auto s = system_from_file(
      system_file_from_json(parse(R"({"space":{"dim":1},"maps":[{"lift":["X0^2 + X1^2","X1^2"]}]})")));
  const auto p = ProjPointQ::parse("1:3");
  GreenConfig cfg;
  cfg.depth = 10;
  const auto h = canonical_height(s, p, cfg);
  const auto h2 = height_result_from_json(Json::parse(height_result_to_json(h, p).dump()));
  EXPECT_EQ(h2.value, h.value);
  EXPECT_EQ(h2.tail_bound, h.tail_bound);
  EXPECT_EQ(h2.per_place, h.per_place);

  const auto o = canonical_height_oracle(s, p, 5);
  const auto o2 = oracle_result_from_json(oracle_result_to_json(o, p));
  EXPECT_EQ(o2.value, o.value);
  EXPECT_EQ(o2.depth, 5);

  const std::vector<Integer> lift{Integer(1), Integer(3)};
  const auto t = green_trace(s, lift, Place::infinity(), cfg);
  const auto t2 = green_trace_from_json(Json::parse(green_trace_to_json(t, Place::infinity()).dump()));
  EXPECT_EQ(t2.increments, t.increments);
  EXPECT_EQ(t2.tail_bound(), t.tail_bound());
  EXPECT_THROW(green_trace_from_json(oracle_result_to_json(o, p)), ValidationError);
}

TEST(Tables, CsvAndJson) {
  SweepTable table;
  table.rows.push_back({Rational(-3, 2), 1.0986122886681098, "1:1", 0.25, 1e-20});
  table.skipped.push_back({Rational(0), "1:1", "t ∉ T⁰"});
  std::ostringstream os;
  write_csv(os, table);
  EXPECT_EQ(os.str(), "t,h_T,point,value,aux\n-3/2,1.09861228867,1:1,0.25,1e-20\n");
  const auto back = table_from_json(Json::parse(table_to_json(table, "sweep").dump()));
  ASSERT_EQ(back.rows.size(), 1u);
  EXPECT_EQ(back.rows[0].t, Rational(-3, 2));
  EXPECT_EQ(back.rows[0].h_T, table.rows[0].h_T);
  ASSERT_EQ(back.skipped.size(), 1u);
  EXPECT_EQ(back.skipped[0].reason, "t ∉ T⁰");
}

TEST(Tables, NumberFormat) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
}

}  // namespace
}  // namespace dynheight
