#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "cli.hpp"

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = tc::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& rel) { return std::string(TC_DATA_DIR) + "/" + rel; }

bool has_line(const std::string& report, const std::string& line) {
  std::istringstream in(report);
  for (std::string l; std::getline(in, l);)
    if (l == line) return true;
  return false;
}

std::string value_of(const std::string& report, const std::string& key) {
  std::istringstream in(report);
  for (std::string l; std::getline(in, l);)
    if (l.rfind(key + "=", 0) == 0) return l.substr(key.size() + 1);
  return {};
}

}  // namespace

TEST_CASE("posit subcommands") {
  auto r = run({"posit", "decode", "--bits", "0x40000000", "--n", "32", "--es", "2"});
  CHECK(r.code == 0);
  CHECK(has_line(r.out, "value=1.0"));
  r = run({"posit", "decode", "--bits", "0x80000000", "--n", "32", "--es", "2"});
  CHECK(r.code == 0);
  CHECK(has_line(r.out, "value=NaR"));
  r = run({"posit", "encode", "--value", "256", "--n", "8", "--es", "2"});
  CHECK(r.code == 0);
  CHECK(has_line(r.out, "bits=0x70"));
  r = run({"posit", "decode", "--bits", "0x4000", "--n", "32", "--es", "2"});
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("kernel subcommand") {
  auto q = run({"kernel", "dot", "--a", data("arrays/cancel_x.txt"), "--b", data("arrays/ones3.txt"), "--backend",
                "quire"});
  CHECK(q.code == 0);
  CHECK(has_line(q.out, "result.decimal=1.0"));
  CHECK(has_line(q.out, "roundings=1"));
  auto f = run({"kernel", "dot", "--a", data("arrays/cancel_x.txt"), "--b", data("arrays/ones3.txt"), "--backend",
                "binary32"});
  CHECK(f.code == 0);
  CHECK(has_line(f.out, "result.decimal=0.0"));
  CHECK(has_line(f.out, "roundings=5"));

  auto cg = run({"kernel", "cg", "--matrix", data("arrays/identity2.txt"), "--rhs", data("arrays/rhs2.txt"),
                 "--backend", "quire"});
  CHECK(cg.code == 0);
  CHECK(has_line(cg.out, "iterations=1"));
  CHECK(has_line(cg.out, "residual.decimal=0.0"));
  CHECK(has_line(cg.out, "x.decimal=3.0 -5.0"));

  auto mm = run({"kernel", "matmul", "--a", data("arrays/a2.txt"), "--b", data("arrays/b2.txt"), "--backend",
                 "rational"});
  CHECK(mm.code == 0);
  CHECK(has_line(mm.out, "result.shape=(2,2)"));
  CHECK(has_line(mm.out, "result.exact=19 22 43 50"));
}

TEST_CASE("reports do not depend on the quire schedule") {
  std::set<std::string> reports;
  for (const char* seed : {"seed:1", "seed:2", "seed:3", "seed:4", "seed:5"}) {
    auto r = run({"kernel", "dot", "--a", data("arrays/x4.txt"), "--b", data("arrays/y4.txt"), "--backend", "quire",
                  "--schedule", seed});
    REQUIRE(r.code == 0);
    reports.insert(r.out);
    auto again = run({"kernel", "dot", "--a", data("arrays/x4.txt"), "--b", data("arrays/y4.txt"), "--backend",
                      "quire", "--schedule", seed});
    REQUIRE(again.out == r.out);
  }
  CHECK(reports.size() == 1);
  auto shown = run({"kernel", "dot", "--a", data("arrays/x4.txt"), "--b", data("arrays/y4.txt"), "--backend",
                    "quire", "--schedule", "seed:5", "--show-schedule"});
  CHECK(shown.out.find("seed:5") != std::string::npos);
}

TEST_CASE("census subcommands") {
  auto r = run({"census", "nan", "--format", "binary16"});
  CHECK(r.code == 0);
  CHECK(has_line(r.out, "nan_patterns=2046"));
  r = run({"census", "reuse", "--kernel", "outer", "--size", "4"});
  CHECK(has_line(r.out, "uses=4"));
  CHECK(has_line(r.out, "mults=16"));
  CHECK(has_line(r.out, "depth=0"));
  r = run({"census", "reuse", "--kernel", "dot", "--size", "4"});
  CHECK(has_line(r.out, "uses=1"));
  CHECK(has_line(r.out, "mults=4"));
  CHECK(has_line(r.out, "depth=2"));
}

TEST_CASE("plan subcommand") {
  auto r = run({"plan", "--kernel", "matmul", "--n", "8", "--cost-model", data("cost_models/huge.txt")});
  CHECK(r.code == 0);
  CHECK(has_line(r.out, "tiles=(8,8,8)"));
  CHECK_FALSE(value_of(r.out, "predicted_cost").empty());
  r = run({"plan", "--kernel", "matmul", "--n", "8", "--cost-model", data("cost_models/tiny.txt"), "--table"});
  CHECK(has_line(r.out, "tiles=(2,2,2)"));
  std::istringstream in(r.out);
  std::vector<unsigned long long> costs;
  for (std::string l; std::getline(in, l);)
    if (l.rfind("candidate=", 0) == 0) costs.push_back(std::stoull(l.substr(l.find("cost=") + 5)));
  CHECK(costs.size() == 64);
  CHECK(costs.front() == std::stoull(value_of(r.out, "predicted_cost")));
  CHECK(std::is_sorted(costs.begin(), costs.end()));
  r = run({"plan", "--kernel", "matmul", "--n", "8", "--cost-model", data("cost_models/missing.txt")});
  CHECK(r.code == 2);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"posit", "decode", "--n", "32"}).code == 1);
  CHECK(run({"kernel", "dot", "--a", data("arrays/x4.txt"), "--b", data("arrays/y4.txt"), "--backend", "decimal128"})
            .code == 1);
  CHECK(run({"kernel", "dot", "--a", data("arrays/x4.txt"), "--b", data("arrays/ones3.txt")}).code == 2);
  CHECK(run({"kernel", "dot", "--a", data("arrays/nope.txt"), "--b", data("arrays/ones3.txt")}).code == 2);
  const auto bd = run({"kernel", "cg", "--matrix", data("arrays/zero2.txt"), "--rhs", data("arrays/rhs2.txt"),
                       "--backend", "rational"});
  CHECK(bd.code == 3);
  CHECK(bd.out.empty());
  CHECK(run({"--help"}).code == 0);
}
