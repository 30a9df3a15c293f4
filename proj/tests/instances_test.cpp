#include "smdim/instances.hpp"

#include <gtest/gtest.h>

using namespace smdim;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

void expect_triangle_inequality(const Setting& s) {
  ASSERT_EQ(s.problem().labels, s.problem().predictions);
  const std::size_t n = s.num_labels();
  for (std::size_t a = 0; a < n; ++a) {
    EXPECT_EQ(s.loss(a, a), 0);
    for (std::size_t b = 0; b < n; ++b) {
      EXPECT_EQ(s.loss(a, b), s.loss(b, a));
      for (std::size_t c = 0; c < n; ++c) EXPECT_LE(s.loss(a, c), s.loss(a, b) + s.loss(b, c));
    }
  }
}

}  // namespace

TEST(Builtins, CatalogValidates) {
  for (const auto& name : builtin_catalog()) EXPECT_NO_THROW(make_builtin(name).setting()) << name;
}

TEST(Builtins, BinaryConstants) {
  const auto spec = make_builtin("multiclass:binary-constants");
  EXPECT_EQ(spec.problem.labels, (std::vector<std::string>{"0", "1"}));
  EXPECT_EQ(spec.hypotheses.table, (std::vector<std::vector<std::size_t>>{{0}, {1}}));
  EXPECT_EQ(spec.problem.loss[0][1], 1);
}

TEST(Builtins, MultilabelHammingIsNormalized) {
  const auto s = make_builtin("multilabel").setting();
  EXPECT_EQ(s.bound_c(), 1);
  EXPECT_EQ(s.hypothesis_loss(s.predict(0, 0), 1, 0), 1);
  EXPECT_EQ(s.loss(0, 1), make_rational(1, 2));
}

TEST(Builtins, MetricFamiliesSatisfyTriangleInequality) {
  for (const char* name : {"multiclass:labels=4", "multilabel:K=3", "vector:p=1", "regression:grid=9"}) {
    SCOPED_TRACE(name);
    expect_triangle_inequality(make_builtin(name).setting());
  }
}

TEST(Builtins, HilbertUsesSquaredNorm) {
  const auto s = make_builtin("hilbert").setting();
  EXPECT_EQ(s.loss(0, 1), 2);  // ‖e1 - e2‖²
  EXPECT_EQ(s.loss(0, 2), 1);
  EXPECT_EQ(s.num_hypotheses(), 3u);
}

TEST(Builtins, ParameterErrors) {
  EXPECT_NE(error_of([] { make_builtin("multilabel:K=5"); }).find("outside"), std::string::npos);
  EXPECT_NE(error_of([] { make_builtin("regression:grid=11"); }).find("outside"), std::string::npos);
  EXPECT_NE(error_of([] { make_builtin("vector:p=3"); }), "");
  EXPECT_NE(error_of([] { make_builtin("vector:p=2,root=1"); }).find("irrational"), std::string::npos);
  EXPECT_NE(error_of([] { make_builtin("multiclass:labels=3,instances=3,hyp=all"); }).find("budget"),
            std::string::npos);
  EXPECT_NE(error_of([] { make_builtin("nope"); }), "");
  EXPECT_NE(error_of([] { make_builtin("hilbert:foo=1"); }), "");
}

TEST(InstanceFile, ParsesMinimalDocument) {
  const auto spec = parse_instance_file(R"({"labels":["0","1"],"predictions":["0","1"],"instances":["x0"],
      "loss":[[0,1],[1,0]],"bound_c":1,"hypotheses":[[0],[1]]})");
  const auto p1 = make_builtin("multiclass:binary-constants");
  EXPECT_EQ(spec.problem.loss, p1.problem.loss);
  EXPECT_EQ(spec.hypotheses.table, p1.hypotheses.table);
}

TEST(InstanceFile, RationalsAreExact) {
  const auto spec = parse_instance_file(R"({"labels":["a"],"predictions":["p","q","r"],"instances":["x"],
      "loss":[["1/3", 0.1, 2.5e-1]],"bound_c":"1","hypotheses":[[0]]})");
  EXPECT_EQ(spec.problem.loss[0][0], make_rational(1, 3));
  EXPECT_EQ(spec.problem.loss[0][1], make_rational(1, 10));
  EXPECT_EQ(spec.problem.loss[0][2], make_rational(1, 4));
}

TEST(InstanceFile, SchemaErrorsCarryPaths) {
  const std::string base = R"("labels":["0"],"predictions":["0"],"instances":["x"],"bound_c":1,"hypotheses":[[0]])";
  EXPECT_EQ(error_of([&] { parse_instance_file("{" + base + R"(,"loss":[["-1"]]})"); }).rfind("/loss/0/0:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse_instance_file("{" + base + R"(,"loss":[["x"]]})"); }).rfind("/loss/0/0:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse_instance_file("{" + base + "}"); }).rfind("/loss:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse_instance_file("{" + base + R"(,"loss":[[0]],"extra":1})"); }).rfind("/extra:", 0), 0u);
  EXPECT_NE(error_of([] { parse_instance_file("{not json"); }), "");
}

TEST(StreamFile, ParsesAndReportsMissingFields) {
  const auto stream = parse_stream_file(R"({"stream":[{"x":0,"y":1},{"x":0,"y":0,"eps":"1/2"}]})");
  ASSERT_EQ(stream.size(), 2u);
  EXPECT_FALSE(stream[0].eps.has_value());
  EXPECT_EQ(stream[1].eps, make_rational(1, 2));
  EXPECT_EQ(error_of([] { parse_stream_file(R"({"stream":[{"x":0,"y":0},{"x":0,"y":0},{"x":0}]})"); }),
            "/stream/2/y: missing required field");
  EXPECT_EQ(error_of([] { parse_stream_file(R"({"stream":[{"x":-1,"y":0}]})"); }).rfind("/stream/0/x:", 0), 0u);
  EXPECT_EQ(error_of([] { parse_stream_file(R"({"stream":[{"x":0,"y":0,"eps":"-1/2"}]})"); }).rfind("/stream/0/eps:", 0),
            0u);
}

TEST(Serializer, RoundTripsCanonicalDocuments) {
  for (const auto& name : builtin_catalog()) {
    const auto text = serialize_instance(make_builtin(name));
    EXPECT_EQ(serialize_instance(parse_instance_file(text)), text) << name;
  }
  const Stream stream{{0, 1, make_rational(1, 3)}, {0, 0, std::nullopt}};
  const auto text = serialize_stream(stream);
  EXPECT_EQ(parse_stream_file(text), stream);
  EXPECT_EQ(serialize_stream(parse_stream_file(text)), text);
}

TEST(BuiltinName, Parsing) {
  const auto [family, params] = parse_builtin_name("multiclass:binary-constants,instances=2");
  EXPECT_EQ(family, "multiclass");
  EXPECT_EQ(params.at("preset"), "binary-constants");
  EXPECT_EQ(params.at("instances"), "2");
}
