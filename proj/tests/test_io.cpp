#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lagfree/lagfree.hpp"

using namespace lagfree;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lagfree::Error thrown";
  return ErrorCode::Config;
}

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(MeshJson, SmallestMeshHasSeventeenNodes) {
  const MeshPtr m = build_polar_mesh(2, 8, 1.0);
  const json j = mesh_to_json(*m);
  EXPECT_EQ(j["nodes"].size(), 17u);
  EXPECT_EQ(j["triangles"].size(), m->num_triangles());
  EXPECT_EQ(j["boundary_edges"].size(), 8u);
  EXPECT_FALSE(j.contains("values"));
  EXPECT_FALSE(j.contains("curve_points"));
}

TEST(MeshJson, ValuesAndCurve) {
  const MeshPtr m = build_polar_mesh(2, 8, 1.0);
  const ExampleMap e = nonminimal_map();
  const DiscreteMap u = sample(e, m);
  const Domain curve = curve_domain_from_map(e, 256);
  const json j = mesh_to_json(*m, &u.values, &curve);
  ASSERT_EQ(j["values"].size(), 17u);
  EXPECT_EQ(j["values"][0][0].get<double>(), 1.0);
  EXPECT_EQ(j["curve_points"].size(), curve.curve->points.size());
  EXPECT_EQ(j["curve_normals"].size(), curve.curve->normals.size());
  const std::vector<AmbientVector> short_values(3);
  EXPECT_EQ(code_of([&] { mesh_to_json(*m, &short_values); }), ErrorCode::InvalidParameter);
}

TEST(ReportCsv, OneRowPerCheck) {
  ResidualReport r;
  r.example = "flat";
  r.domain = "ball";
  r.h = 0.25;
  r.stationarity = 1.5e-7;
  const std::string csv = report_csv({r, r});
  EXPECT_EQ(csv.rfind("example,domain,h,check,value\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 9);
  EXPECT_NE(csv.find("flat,ball,0.25,stationarity,1.4999999999999999e-07\n"), std::string::npos);
}

TEST(ReportCsv, QuotesNamesWithCommas) {
  EXPECT_EQ(csv_field("flat"), "flat");
  EXPECT_EQ(csv_field("sw:1,2"), "\"sw:1,2\"");
  EXPECT_EQ(csv_field("a\"b"), "\"a\"\"b\"");
  ResidualReport r;
  r.example = "sw:1,2";
  r.domain = "ball";
  r.h = 0.5;
  EXPECT_NE(report_csv({r}).find("\"sw:1,2\",ball,0.5,lagrangian,0\n"), std::string::npos);
}

TEST(HistoryCsv, Columns) {
  const std::string csv = history_csv({{0, 0, 3.5, 1e-3, 2e-4, 0.0}, {1, 0, 3.25, 1e-5, 1e-6, 0.0}});
  EXPECT_EQ(csv, "iter,stage,E,grad_norm,lagrangian,boundary_violation\n"
                 "0,0,3.5,0.001,0.00020000000000000001,0\n"
                 "1,0,3.25,1.0000000000000001e-05,9.9999999999999995e-07,0\n");
}

TEST(RunConfig, ParsesEveryKey) {
  const json j = json::parse(R"({
    "command": "rigidity", "example": "sw:2,3", "domain": "ball", "mesh": [24, 96, 0.8],
    "refinements": 2, "seeds": [1, 2, 3], "output_dir": "out", "eps": 0.02,
    "solver": {"penalty_lagrangian": 5, "max_iters": 50, "continuation": [[1, 10], [2, 20]],
               "odd_symmetry": false}
  })");
  const RunConfig c = run_config_from_json(j);
  c.validate();
  EXPECT_EQ(c.command, "rigidity");
  EXPECT_EQ(c.n_sectors, 96);
  EXPECT_DOUBLE_EQ(c.grading, 0.8);
  EXPECT_EQ(c.seeds, (std::vector<unsigned>{1, 2, 3}));
  EXPECT_EQ(c.solver.max_iters, 50);
  EXPECT_EQ(c.solver.continuation.size(), 2u);
  EXPECT_FALSE(c.solver.odd_symmetry);
  // Round trip through the echo.
  const RunConfig back = run_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(RunConfig, ErrorsNameTheOffendingKey) {
  EXPECT_NE(error_text([] { run_config_from_json(json::parse(R"({"colour": 1})")); }).find("colour"),
            std::string::npos);
  EXPECT_NE(error_text([] { run_config_from_json(json::parse(R"({"mesh": [1, 2]})")); }).find("mesh"),
            std::string::npos);
  EXPECT_NE(error_text([] { run_config_from_json(json::parse(R"({"solver": {"lambda": 1}})")); })
                .find("solver.lambda"),
            std::string::npos);
  EXPECT_NE(error_text([] { run_config_from_json(json::parse(R"({"refinements": "three"})")); })
                .find("refinements"),
            std::string::npos);
  RunConfig c;
  c.command = "verify-example";
  c.example = "nonminimal";
  c.domain = "ball";
  EXPECT_NE(error_text([&] { c.validate(); }).find("domain"), std::string::npos);
  c.domain = "curve";
  EXPECT_NO_THROW(c.validate());
  c.example = "sw:2,4";
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::Config);
  c.example = "sw:2";
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::Config);
  c.example = "flat";
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::Config);  // curve needs nonminimal
  c.domain = "ball";
  c.command = "plot";
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::Config);
  c.command = "masses";
  c.solver.penalty_boundary = 0.0;
  EXPECT_NE(error_text([&] { c.validate(); }).find("solver"), std::string::npos);
}

TEST(RunConfig, ExampleNames) {
  EXPECT_EQ(parse_example("sw:3,4").name, "sw:3,4");
  EXPECT_EQ(parse_example("flat").kind, ExampleKind::FlatDisc);
  EXPECT_EQ(parse_example("nonminimal").kind, ExampleKind::NonMinimal);
  EXPECT_EQ(code_of([] { parse_example("sw:1,2x"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([] { parse_example("cone"); }), ErrorCode::Config);
}

TEST(RigidityJson, CarriesPassFlagAndMetrics) {
  RigidityReport r;
  r.seed = 4;
  r.pass = true;
  r.distance = 1e-9;
  const json j = to_json(r);
  EXPECT_EQ(j["seed"], 4);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["distance"].get<double>(), 1e-9);
  EXPECT_EQ(j.dump(), to_json(r).dump());
}
