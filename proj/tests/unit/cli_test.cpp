#include <doctest.h>

#include <sstream>

#include "cli.hpp"

using namespace cellnet;
using cellnet::cli::Json;

namespace {

const std::string kData = CELLNET_EXAMPLES_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return kData + "/" + name; }

}  // namespace

TEST_CASE("closure of R_{2,2}") {
  const auto r = run({"closure", data("ring22.json")});
  REQUIRE(r.code == 0);
  const auto j = r.json();
  CHECK(j["command"] == "closure");
  CHECK(j["status"] == "ok");
  CHECK(j["seed"] == 0);
  CHECK(j["result"]["size"] == 4);
  CHECK(j["result"]["elements"][2]["word"] == "s^2");
  CHECK(j["input_digest"].get<std::string>().rfind("fnv1a64:", 0) == 0);
}

TEST_CASE("verify-pb on R_{2,2}") {
  const auto r = run({"verify-pb", data("ring22.json"), "--block", "c2,c3", "--cell", "c0"});
  CHECK(r.code == 0);
  CHECK(r.json()["status"] == "pass");
}

TEST_CASE("reports are byte-identical across runs") {
  for (const auto& args :
       {std::vector<std::string>{"decompose", data("r51.json"), "--seed", "3"},
        std::vector<std::string>{"partitions", data("fig2.json")},
        std::vector<std::string>{"branches", data("steady_r13.json")}}) {
    const auto a = run(args), b = run(args);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
  }
}

TEST_CASE("seed is echoed") {
  const auto r = run({"decompose", data("ring22.json"), "--seed", "11"});
  REQUIRE(r.code == 0);
  CHECK(r.json()["seed"] == 11);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"closure", data("does_not_exist.json")}).code == 2);
  CHECK(run({"quotient", data("fig2.json"), "--partition", data("fig2_unbalanced.json")}).code == 2);
  CHECK(run({"closure", data("ring22.json"), "--cap", "2"}).code == 2);
  CHECK(run({"verify-pb", data("two_generators.json"), "--block", "b,c", "--cell", "a"}).code == 2);
  CHECK(run({"simulate", data("cubic_fig2.json"), "--x0", "1,2", "--T", "1"}).code == 2);
  CHECK(run({"selftest", "--only", "1"}).code == 0);
}

TEST_CASE("quiet suppresses stdout") {
  const auto r = run({"--quiet", "closure", data("ring22.json")});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
}

TEST_CASE("quotient of figure-2 by its block") {
  const auto r = run({"quotient", data("fig2.json"), "--partition", data("fig2_block_partition.json")});
  REQUIRE(r.code == 0);
  const auto j = r.json()["result"];
  CHECK(j["quotient_network"]["cells"].size() == 3);
  CHECK(j["homomorphism"] == true);
}

TEST_CASE("file formats round-trip") {
  const auto j = Json::parse(R"({"cells":["a","b"],"generators":{"s":{"a":"b","b":"b"}}})");
  const auto net = cli::parse_network(j);
  CHECK(cli::network_to_json(net) == j);
  CHECK(cli::parse_network(Json::parse(R"({"ring_ff":[2,2]})")).cell_count() == 4);
  CHECK_THROWS(cli::parse_network(Json::parse(R"({"cells":["a"],"generators":{"s":{}}})")));
  const auto p = cli::parse_partition(net, Json::parse(R"({"classes":[["b"],["a"]]})"));
  CHECK(p.class_count() == 2);
  CHECK(cli::format_double(0.1) == "0.10000000000000001");
  CHECK(cli::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(cli::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
