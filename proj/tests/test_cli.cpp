#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "sheafscope/io.hpp"

#ifndef SHEAFSCOPE_CLI_PATH
#error "SHEAFSCOPE_CLI_PATH must point at the CLI binary"
#endif

namespace fs = std::filesystem;
using sheafscope::read_text_file;
using sheafscope::write_text_file;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "sheafscope_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args) {
  const fs::path out = workdir() / "stdout.txt";
  const std::string cmd = std::string("\"") + SHEAFSCOPE_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          (workdir() / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = fs::exists(out) ? read_text_file(out) : "";
  return r;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

void write_toy() {
  write_text_file(path("toy.csv"), "id,count\na,5\nb,6\nc,8\nd,7\ne,4\nf,5\n");
  write_text_file(path("toy_subbasis.json"), R"({"U1":["a","b","c","d"],"U2":["c","d","e","f"]})");
  write_text_file(path("lattice.json"), R"({"ab":["a","b"],"ac":["a","c"],"ad":["a","d"]})");
  write_text_file(path("empty.json"), "{}");
}

}  // namespace

TEST_CASE("topology subcommand") {
  write_toy();
  auto r = run("topology --subbasis " + path("toy_subbasis.json"));
  CHECK(r.code == 0);
  CHECK(r.out.find("5 open sets") != std::string::npos);

  r = run("topology --subbasis " + path("empty.json") + " --data " + path("toy.csv"));
  CHECK(r.code == 0);
  CHECK(r.out.find("2 open sets") != std::string::npos);

  r = run("topology --subbasis " + path("lattice.json") + " --open a,b,d --out " + path("topo.json"));
  CHECK(r.code == 0);
  CHECK(r.out.find("9 open sets") != std::string::npos);
  CHECK(r.out.find("longest chain 4") != std::string::npos);
  const auto j = nlohmann::json::parse(read_text_file(path("topo.json")));
  CHECK(j["count"] == 9);
  CHECK(j["filtration"]["levels"].size() == 5);
}

TEST_CASE("exit codes") {
  write_toy();
  write_text_file(path("bad.json"), "{\"U1\": [\"a\",");
  write_text_file(path("unknown.json"), R"({"U1":["a","zz"]})");
  write_text_file(path("wide.json"), R"({"A":["a","b"],"B":["a","c"],"C":["a","d"]})");

  CHECK(run("topology --subbasis " + path("bad.json")).code == 2);
  CHECK(run("topology --subbasis " + path("unknown.json") + " --data " + path("toy.csv")).code == 2);
  CHECK(run("topology --subbasis " + path("wide.json") + " --cap 4").code == 3);
  CHECK(run("topology").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("attribute --data " + path("toy.csv") + " --subbasis " + path("toy_subbasis.json") + " --out " +
            path("attr.json"))
            .code == 4);
  CHECK(run("synth --parts 2 --separation -1 --out " + path("synth_bad")).code == 2);
  CHECK(run("analyze --data " + path("missing.csv") + " --subbasis " + path("toy_subbasis.json") + " --out " +
            path("r.json"))
            .code != 0);
}

TEST_CASE("analyze writes the toy report") {
  write_toy();
  const auto r = run("analyze --data " + path("toy.csv") + " --subbasis " + path("toy_subbasis.json") +
                     " --model '{\"model\":\"average\"}' --j 1 --j 2 --out " + path("toy_report.json"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("global inconsistency 1.66667") != std::string::npos);
  const auto j = nlohmann::json::parse(read_text_file(path("toy_report.json")));
  CHECK(j["opens"][2]["local"] == 1.0);
  CHECK(j["opens"][3]["local"] == 1.5);
  CHECK(j["opens"][1]["local"] == 0.0);
  CHECK(j["opens"][4]["filtered"].contains("2"));
}

TEST_CASE("analyze with an explicit assignment reports consistency") {
  write_toy();
  write_text_file(path("right.json"), R"([
    {"set": ["a","b","c","d","e","f"], "values": {"a":4,"b":4,"c":2,"d":3,"e":2,"f":5}},
    {"set": ["a","b","c","d"], "values": {"a":3,"b":2,"c":2,"d":4}},
    {"set": ["c","d","e","f"], "values": {"c":5,"d":6,"e":0,"f":2}},
    {"set": ["c","d"], "values": {"c":3,"d":2}}
  ])");
  const auto r = run("analyze --data " + path("toy.csv") + " --subbasis " + path("toy_subbasis.json") +
                     " --assignment " + path("right.json") + " --out " + path("right_report.json"));
  CHECK(r.code == 0);
  CHECK(r.out.find("assignment consistent: no") != std::string::npos);
}

TEST_CASE("synth, attribute and thread-count determinism") {
  const std::string dir = path("synth");
  auto r = run("synth --parts 4 --per-part 16 --dim 6 --defect 3 --seed 9 --out " + dir);
  REQUIRE(r.code == 0);
  const std::string common = " --data " + dir + "/data.csv --subbasis " + dir + "/subbasis.json --labels " + dir +
                             "/labels.csv --model '{\"model\":\"prototype\",\"shots\":3,\"trials\":30,\"seed\":5}'";

  r = run("attribute" + common + " --out " + path("tally.json"));
  REQUIRE(r.code == 0);
  const std::string csv = read_text_file(path("tally.csv"));
  CHECK(csv.rfind("name,count\n", 0) == 0);
  const auto tally = nlohmann::json::parse(read_text_file(path("tally.json")));
  CHECK(tally["attribution"].size() == 4);

  REQUIRE(run("analyze" + common + " --threads 1 --out " + path("t1.json")).code == 0);
  REQUIRE(run("analyze" + common + " --threads 8 --out " + path("t8.json")).code == 0);
  REQUIRE(run("analyze" + common + " --threads 1 --out " + path("t1b.json")).code == 0);
  const std::string a = read_text_file(path("t1.json"));
  CHECK(a == read_text_file(path("t8.json")));
  CHECK(a == read_text_file(path("t1b.json")));
  const auto report = nlohmann::json::parse(a);
  CHECK(report["attribution"].size() == 4);

  // A different episode seed changes the report.
  REQUIRE(run("analyze" + common + " --seed 6 --out " + path("t_seed.json")).code == 0);
  CHECK(a != read_text_file(path("t_seed.json")));
}
