#include <algorithm>
#include <cstdlib>
#include <json.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "reptrack/cli.hpp"

using namespace reptrack;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  int code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::size_t lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("reptrack_cli_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const char* name) const { return (path / name).string(); }
};

const std::vector<std::string> kFast{"--threads", "1", "--set", "forest.n_trees=10", "--set", "boost.rounds=10",
                                     "--set", "crf.max_iter=40"};

std::vector<std::string> with_fast(std::vector<std::string> args) {
  args.insert(args.end(), kFast.begin(), kFast.end());
  return args;
}

}  // namespace

TEST_CASE("cli: usage errors exit 1 with a message on stderr") {
  auto r = run({});
  CHECK(r.code == kExitUsage);
  CHECK_FALSE(r.err.empty());
  r = run({"synth", "--no-such-flag"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("--no-such-flag") != std::string::npos);
  r = run({"nonsense"});
  CHECK(r.code == kExitUsage);
  r = run({"score", "--in", "x.jsonl"});
  CHECK(r.code == kExitUsage);
  r = run({"synth", "--set", "nope=1"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("unknown config key 'nope'") != std::string::npos);
  r = run({"--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("train") != std::string::npos);
}

TEST_CASE("cli: data errors exit 2") {
  auto r = run({"clean"}, "{\"id\": 1}\n");
  CHECK(r.code == kExitData);
  CHECK(r.err.find("line 1") != std::string::npos);
  r = run({"score", "--model", "/nonexistent/model.bin"});
  CHECK(r.code == kExitData);
  r = run({"report"}, "{\"id\": \"a\"}\n");
  CHECK(r.code == kExitData);
}

TEST_CASE("cli: synth is deterministic and respects --n") {
  auto a = run({"synth", "--n", "40", "--seed", "3"});
  auto b = run({"synth", "--n", "40", "--seed", "3"});
  REQUIRE(a.code == kExitOk);
  CHECK(lines(a.out) == 40);
  CHECK(a.out == b.out);
  CHECK(run({"synth", "--n", "40", "--seed", "4"}).out != a.out);
}

TEST_CASE("cli: clean and filter stream JSONL with added objects") {
  std::string input =
      "{\"id\":\"a\",\"text\":\"A jerk grab my vagina at a night club in NYC #MeToo\"}\n"
      "{\"id\":\"b\",\"text\":\"he didn't kiss her\"}\n";
  auto c = run({"clean"}, input);
  REQUIRE(c.code == kExitOk);
  auto first = nlohmann::json::parse(c.out.substr(0, c.out.find('\n')));
  CHECK(first["clean"]["text"] == "a jerk grab my vagina at a night club in nyc");
  CHECK(first["clean"]["tokens"].size() == first["clean"]["pos"].size());

  auto f = run({"filter"}, input);
  REQUIRE(f.code == kExitOk);
  std::istringstream rows(f.out);
  std::string line;
  std::getline(rows, line);
  auto a = nlohmann::json::parse(line);
  CHECK(a["filter"]["passed"] == true);
  CHECK(a["filter"]["tuples"] == nlohmann::json::parse("[[0,2,2,3,11]]"));
  std::getline(rows, line);
  CHECK(nlohmann::json::parse(line)["filter"]["passed"] == false);
  CHECK(lines(run({"filter", "--passed-only"}, input).out) == 1);
}

TEST_CASE("cli: train twice gives byte-identical models; score, tag and report chain") {
  TempDir dir;
  REQUIRE(run({"synth", "--n", "250", "--seed", "11", "--out", dir / "corpus.jsonl"}).code == kExitOk);
  auto t1 = run(with_fast({"train", "--in", dir / "corpus.jsonl", "--out", dir / "m1.bin", "--seed", "42"}));
  INFO(t1.err);
  REQUIRE(t1.code == kExitOk);
  REQUIRE(run(with_fast({"train", "--in", dir / "corpus.jsonl", "--out", dir / "m2.bin", "--seed", "42"})).code ==
          kExitOk);
  CHECK(slurp(dir / "m1.bin") == slurp(dir / "m2.bin"));

  auto s = run({"score", "--model", dir / "m1.bin", "--in", dir / "corpus.jsonl", "--threshold", "0.9"});
  REQUIRE(s.code == kExitOk);
  CHECK(lines(s.out) == 250);
  std::istringstream rows(s.out);
  std::string line;
  while (std::getline(rows, line)) {
    auto j = nlohmann::json::parse(line);
    if (j["gated"] == true) CHECK(j["svr_prob"].get<double>() >= 0.9);
  }

  auto t = run({"tag", "--model", dir / "m1.bin", "--in", dir / "corpus.jsonl"});
  REQUIRE(t.code == kExitOk);
  CHECK(lines(t.out) == 250);

  auto rep = run({"report", "--json", dir / "summary.json"}, s.out);
  REQUIRE(rep.code == kExitOk);
  CHECK(rep.out.find("Category") != std::string::npos);
  auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["perpetrators"].size() == 5);

  CHECK(run({"score", "--model", dir / "m1.bin", "--threshold", "0"}, "").code == kExitUsage);
}

TEST_CASE("cli: config file from the environment, overridden by flags") {
  TempDir dir;
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "seed = 5\n";
  }
  ::setenv(kConfigEnvVar, (dir / "run.cfg").c_str(), 1);
  auto from_env = run({"synth", "--n", "10"});
  auto explicit_seed = run({"synth", "--n", "10", "--seed", "5"});
  auto flag_wins = run({"synth", "--n", "10", "--seed", "6"});
  ::setenv(kConfigEnvVar, (dir / "missing.cfg").c_str(), 1);
  auto missing = run({"synth", "--n", "10"});
  ::unsetenv(kConfigEnvVar);
  CHECK(from_env.code == kExitOk);
  CHECK(from_env.out == explicit_seed.out);
  CHECK(flag_wins.out != from_env.out);
  CHECK(missing.code == kExitUsage);
}

TEST_CASE("cli: evaluate prints weighted-Avg tables and the ranking grid") {
  TempDir dir;
  REQUIRE(run({"synth", "--n", "200", "--seed", "2", "--out", dir / "c.jsonl"}).code == kExitOk);
  auto e = run(with_fast({"evaluate", "--in", dir / "c.jsonl", "--folds", "3", "--json", dir / "e.json"}));
  INFO(e.err);
  REQUIRE(e.code == kExitOk);
  CHECK(e.out.find("3-fold cross-validation") != std::string::npos);
  CHECK(e.out.find("weighted-Avg") != std::string::npos);
  auto j = nlohmann::json::parse(slurp(dir / "e.json"));
  CHECK(j["folds"] == 3);
  CHECK(j["tasks"].size() == 5);
}
