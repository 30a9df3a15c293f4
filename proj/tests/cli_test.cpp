#include "smdim/cli.hpp"
#include "smdim/instances.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace smdim;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(SMDIM_DATA_DIR) + "/" + name; }

}  // namespace

TEST(Cli, DimPrintsTheValue) {
  const auto r = run({"dim", "--builtin", "multiclass:binary-constants", "--dimension", "smdim", "--gamma", "1/4"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1\n");
}

TEST(Cli, DimCsvAndJson) {
  auto r = run({"--format", "csv", "dim", "--builtin", "hilbert", "--gamma", "0,1/2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "dimension,gamma,value\r\nsmdim,0(strict),1\r\nsmdim,1/2,1\r\n");
  r = run({"dim", "--builtin", "list", "--dimension", "ldimk", "--k", "2", "--format", "json"});
  EXPECT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["results"][0]["value"], 1);
}

TEST(Cli, DimOnInstanceFile) {
  const auto r = run({"dim", "--instance", data("binary_constants.json"), "--gamma", "1/4", "--dimension", "msdim"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1\n");
}

TEST(Cli, VerifySucceeds) {
  const auto r = run({"verify", "--prop", "6.1", "--cases", "50", "--seed", "7"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("0 counterexamples"), std::string::npos);
}

TEST(Cli, LearnRejectsNonRealizableStream) {
  const auto r = run({"learn", "--learner", "mrsoa", "--builtin", "multiclass:binary-constants", "--stream",
                      data("violating_stream.json"), "--gamma", "1/4"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("stream not ε_t-realizable"), std::string::npos);
  EXPECT_EQ(r.out, "");
}

TEST(Cli, LearnOutputs) {
  auto r = run({"learn", "--learner", "mrsoa", "--builtin", "multiclass:binary-constants", "--stream",
                data("realizable_stream.json"), "--gamma", "1/4", "--format", "csv"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("round,instance,label,eps,mixture,expected_loss\r\n1,x0,1,0,1/2;1/2,1/2\r\n", 0), 0u);
  r = run({"learn", "--learner", "ftl", "--builtin", "multiclass:binary-constants", "--stream",
           data("agnostic_stream.json"), "--format", "json"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["rounds"].size(), 6u);
  // The transcript re-parses as a stream file.
  Stream replay;
  for (const auto& row : doc["rounds"]) replay.push_back({row["x"], row["y"], std::nullopt});
  EXPECT_EQ(parse_stream_file(serialize_stream(replay)), replay);
}

TEST(Cli, SameSeedSameBytes) {
  const std::vector<std::string> args{"learn", "--learner", "agnostic", "--builtin", "multiclass:binary-constants",
                                      "--stream", data("agnostic_stream.json"), "--gamma", "1/4", "--mode",
                                      "monte-carlo", "--seed", "5", "--trials", "500", "--format", "json"};
  EXPECT_EQ(run(args).out, run(args).out);
  const std::vector<std::string> verify{"verify", "--prop", "6.4", "--cases", "20", "--seed", "3", "--format", "csv"};
  EXPECT_EQ(run(verify).out, run(verify).out);
}

TEST(Cli, AdversaryAndSqrtLower) {
  auto r = run({"adversary", "--learner", "uniform", "--builtin", "multiclass:instances=2,hyp=all", "--gamma", "1/4",
                "--format", "json"});
  EXPECT_EQ(r.code, 0) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["smdim"], 2);
  EXPECT_TRUE(doc["bound_holds"].get<bool>());
  r = run({"sqrt-lower", "--builtin", "multiclass:binary-constants", "-T", "3", "--format", "json"});
  EXPECT_EQ(r.code, 0) << r.err;
  doc = nlohmann::json::parse(r.out);
  EXPECT_TRUE(doc["holds"].get<bool>());
  r = run({"adversary", "--learner", "mrsoa", "--builtin", "multiclass:binary-constants", "--gamma", "1/4", "-T", "2"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, WritesToOutFile) {
  const auto path = std::filesystem::temp_directory_path() / "smdim_cli_test_out.txt";
  const auto r = run({"dim", "--builtin", "hilbert", "--gamma", "1/2", "--out", path.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "1");
  std::filesystem::remove(path);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"dim", "--builtin", "hilbert", "--gamma", "0.x"}).code, 2);
  EXPECT_EQ(run({"dim", "--builtin", "hilbert", "--gamma", "-1"}).code, 2);
  EXPECT_EQ(run({"dim", "--gamma", "1/2"}).code, 2);
  EXPECT_EQ(run({"dim", "--builtin", "hilbert", "--gamma", "1/2", "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"verify", "--prop", "9.9"}).code, 2);
  EXPECT_EQ(run({"dim", "--instance", "/nonexistent.json", "--gamma", "1"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}
