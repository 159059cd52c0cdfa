#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "subt/cli.hpp"
#include "subt/json.hpp"

namespace fs = std::filesystem;
using subt::Json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "subt");
  std::ostringstream out, err;
  int code = subt::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("subt_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string file(const std::string& name, const std::string& text) const {
    auto p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("cli run") {
  Scratch s;
  auto c7 = s.file("c7.prog", "SET r4 15\nHALT r4\n");
  auto q5 = s.file("q5.prog", "SET r4 5\nADD r5 r4 r4\nHALT r5\n");
  auto o49 = s.file("o.json", "[[4, 9]]");

  auto r = cli({"run", "--program", c7});
  CHECK(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(j.at("result").at("outcome") == "halted");
  CHECK(j.at("result").at("value") == 7);
  CHECK(j.at("schema") == subt::cli::kSchema);
  CHECK(j.at("config").contains("budget"));

  j = Json::parse(cli({"run", "--program", q5, "--oracle", o49}).out);
  CHECK(j.at("result").at("outcome") == "frozen");
  CHECK(j.at("result").at("query") == 5);

  r = cli({"run", "--program", q5, "--steps", "1"});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out).at("result").at("outcome") == "exhausted");

  CHECK(cli({"run", "--program", s.file("bad.prog", "FROB r1\n")}).code == subt::cli::kUsage);
  CHECK(cli({"run", "--program", c7, "--oracle", s.path("missing.json")}).code == subt::cli::kUsage);
  CHECK(cli({"run"}).code == subt::cli::kUsage);
  CHECK(cli({"run", "--index", "12", "--input", "x"}).code == subt::cli::kUsage);
}

TEST_CASE("cli budget precedence: flag over environment over default") {
  Scratch s;
  auto c7 = s.file("c7.prog", "SET r4 15\nHALT r4\n");
  auto steps = [&](std::vector<std::string> extra) {
    std::vector<std::string> a{"run", "--program", c7};
    a.insert(a.end(), extra.begin(), extra.end());
    return Json::parse(cli(a).out).at("config").at("budget").at("steps").get<std::uint64_t>();
  };
  ::unsetenv("SUBT_BUDGET_STEPS");
  CHECK(steps({}) == 100000);
  ::setenv("SUBT_BUDGET_STEPS", "777", 1);
  CHECK(steps({}) == 777);
  CHECK(steps({"--steps", "55"}) == 55);
  ::setenv("SUBT_BUDGET_STEPS", "lots", 1);
  CHECK(cli({"run", "--program", c7}).code == subt::cli::kUsage);
  ::unsetenv("SUBT_BUDGET_STEPS");
}

TEST_CASE("cli reduce exit codes") {
  Scratch s;
  auto f = s.file("f.json", "[[0,5],[3,2],[7,7]]");
  auto f01 = s.file("f01.json", "[[0,1]]");
  auto empty = s.file("e.json", "[]");

  auto r = cli({"reduce", f, f});
  CHECK(r.code == subt::cli::kOk);
  auto j = Json::parse(r.out);
  CHECK(j.at("verdict") == "witnessed");
  CHECK(j.at("method") == "canonical");

  r = cli({"reduce", f01, empty});
  CHECK(r.code == subt::cli::kRefuted);
  CHECK(Json::parse(r.out).at("verdict") == "refuted");

  r = cli({"reduce", f01, empty, "--steps", "1"});
  CHECK(r.code == subt::cli::kInconclusive);

  // echo skipped: nothing of index <= 10 reproduces f
  r = cli({"reduce", f, f, "--no-canonical", "--index-bound", "10"});
  CHECK(r.code == subt::cli::kRefuted);
}

TEST_CASE("cli output is independent of --jobs") {
  Scratch s;
  auto f = s.file("f.json", "[[0,5],[3,2]]");
  auto a = cli({"--jobs", "1", "reduce", f, f, "--no-canonical", "--index-bound", "300"});
  auto b = cli({"--jobs", "4", "reduce", f, f, "--no-canonical", "--index-bound", "300"});
  CHECK(a.out == b.out);
  CHECK(cli({"--jobs", "0", "reduce", f, f}).code == subt::cli::kUsage);
}

TEST_CASE("cli lattice-check") {
  auto r = cli({"lattice-check", "--instances", "40", "--grid", "16"});
  CHECK(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(j.at("ok") == true);
  CHECK(j.at("config").at("options").at("grid") == 16);

  r = cli({"lattice-check", "--instances", "40", "--grid", "16", "--inject-bug", "join-swap"});
  CHECK(r.code != 0);
  CHECK(r.err.find("FAIL") != std::string::npos);

  r = cli({"lattice-check", "--instances", "10", "--grid", "0"});
  CHECK(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);

  CHECK(cli({"lattice-check", "--inject-bug", "bogus"}).code == subt::cli::kUsage);
  CHECK(cli({"lattice-check", "--suite", "bogus"}).code == subt::cli::kUsage);
}

TEST_CASE("cli construct and replay") {
  Scratch s;
  auto t = s.path("q.jsonl");
  auto r = cli({"construct", "quasiminimal", "-o", t});
  CHECK(r.code == 0);
  CHECK(cli({"replay", t}).code == 0);

  // same config, same bytes
  auto t2 = s.path("q2.jsonl");
  cli({"--jobs", "2", "construct", "quasiminimal", "-o", t2});
  CHECK(slurp(t) == slurp(t2));

  auto text = slurp(t);
  auto pos = text.find("\"steps\":", text.find('\n') + 1);
  REQUIRE(pos != std::string::npos);
  pos += 8;
  text[pos] = text[pos] == '9' ? '8' : static_cast<char>(text[pos] + 1);
  auto bad = s.file("bad.jsonl", text);
  r = cli({"replay", bad});
  CHECK(r.code != 0);
  CHECK(r.out.find("stage") != std::string::npos);

  CHECK(cli({"construct", "nope"}).code == subt::cli::kUsage);
  CHECK(cli({"replay", s.path("missing.jsonl")}).code != 0);
}

TEST_CASE("cli jump rows") {
  Scratch s;
  auto f = s.file("f.json", "[[0,1],[1,0]]");
  auto c1 = s.file("c1.prog", "SET r4 3\nHALT r4\n");
  auto loop = s.file("loop.prog", "JMP 0\n");
  auto q5 = s.file("q5.prog", "SET r4 5\nADD r5 r4 r4\nHALT r5\n");
  auto out = s.path("k.json");
  auto r = cli({"jump", f, "--program", c1, "--program", loop, "--program", q5, "-o", out});
  CHECK(r.code == 0);
  auto j = Json::parse(slurp(out));
  REQUIRE(j.at("rows").size() == 3);
  CHECK(j.at("rows")[0].at("answer") == "one");
  CHECK(j.at("rows")[1].at("answer") == "zero_certified");
  CHECK(j.at("rows")[2].at("answer") == "undefined_frozen");
  CHECK(j.at("counts").at("one") == 1);
  CHECK(cli({"jump", f}).code == subt::cli::kUsage);
}
