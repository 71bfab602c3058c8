#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "natgrad/cli.hpp"

using namespace natgrad;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "natgrad");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string problem(const std::string& name) { return std::string(NATGRAD_PROBLEM_DIR) + "/" + name; }

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path.string();
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"check"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"check", "/nonexistent.json"}).code == 1);
  const auto bad = temp_file("natgrad_bad.json", "{\n  \"p\": 2,\n  \"g\": {\"kind\" 1}\n}\n");
  const Run r = run({"check", bad});
  CHECK(r.code == 1);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(r.err.find("column 16") != std::string::npos);
  CHECK(run({"check", problem("i.json"), "--condition", "H_7"}).code == 1);
}

TEST_CASE("check exit codes") {
  const Run i = run({"check", problem("i.json")});
  CHECK(i.code == 0);
  const auto j = nlohmann::json::parse(i.out);
  REQUIRE(j.is_array());
  CHECK(j.size() == 5);
  for (const auto& rep : j) CHECK(rep.at("verdict") == "holds");

  CHECK(run({"check", problem("vi.json")}).code == 2);
  const Run sub = run({"check", problem("vi.json"), "--condition", "H_m,H_m_prime"});
  CHECK(sub.code == 0);
  CHECK(nlohmann::json::parse(sub.out).size() == 2);
}

TEST_CASE("solve") {
  SUBCASE("h = 0 has no nontrivial solution") {
    const Run r = run({"solve", problem("zero.json")});
    CHECK(r.code == 4);
    CHECK(r.err.find("no descent direction") != std::string::npos);
  }
  SUBCASE("mountain pass on the cubic source is reproducible") {
    const auto path = (std::filesystem::temp_directory_path() / "natgrad_cubic.csv").string();
    const Run a = run({"solve", problem("cubic.json"), "--seed", "3", "--out", path});
    REQUIRE(a.code == 0);
    std::ifstream in(path);
    std::stringstream csv;
    csv << in.rdbuf();
    const Run b = run({"solve", problem("cubic.json"), "--seed", "3", "--out", path});
    CHECK(a.out == b.out);
    std::ifstream in2(path);
    std::stringstream csv2;
    csv2 << in2.rdbuf();
    CHECK(csv.str() == csv2.str());
    CHECK(csv.str().rfind("node,value\n", 0) == 0);
    const auto s = nlohmann::json::parse(a.out);
    CHECK(s.at("residual").get<double>() <= 1e-9);
    CHECK(s.at("positive") == true);
    for (const char* k : {"sup_norm", "energy", "residual"}) CHECK(s.contains(k));
  }
}

TEST_CASE("eigen and transform") {
  const Run e = run({"eigen", problem("cubic.json")});
  REQUIRE(e.code == 0);
  const auto pos = e.out.find("node,value");
  REQUIRE(pos != std::string::npos);
  const auto j = nlohmann::json::parse(e.out.substr(0, pos));
  CHECK(j.at("lambda1").get<double>() == doctest::Approx(9.8696044).epsilon(1e-3));

  const Run t = run({"transform", problem("vi.json"), "--points", "3", "--s-max", "2"});
  REQUIRE(t.code == 0);
  CHECK(t.out.rfind("s,G,A,A_prime,h\n0,0,0,1,0\n", 0) == 0);
}

TEST_CASE("bifurcate emits both branches") {
  const Run r = run({"bifurcate", problem("ix.json"), "--lambda-min", "1", "--lambda-max", "3", "--lambda-steps", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("lambda,branch,sup_norm,energy\n", 0) == 0);
  CHECK(r.out.find(",minimal,") != std::string::npos);
  CHECK(r.out.find(",mountain_pass,") != std::string::npos);
  CHECK(r.err.find(">= 3") != std::string::npos);
  CHECK(run({"bifurcate", problem("vi.json")}).code == 1);
}

TEST_CASE("catalog") {
  const Run list = run({"catalog"});
  REQUIRE(list.code == 0);
  CHECK(list.out.rfind("i: ", 0) == 0);
  for (const char* id : {"\nv: ", "\nix: ", "\ne2.8-log: "}) CHECK(list.out.find(id) != std::string::npos);
  CHECK(list.out.find("constraint: 0 < C2 < C1 (p*-p)/(p-1) (example (i))") != std::string::npos);

  const Run iii = run({"catalog", "--id", "iii"});
  REQUIRE(iii.code == 0);
  CHECK(nlohmann::json::parse(iii.out).at("g").at("kind") == "power_decay");
  const Run bad = run({"catalog", "--id", "iii", "--set", "C=3"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("C < r - p if alpha = 1") != std::string::npos);
  CHECK(run({"catalog", "--id", "iii", "--set", "C=abc"}).code == 1);
  CHECK(run({"catalog", "--id", "nope"}).code == 1);
}
