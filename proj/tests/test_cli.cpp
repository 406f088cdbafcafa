#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "betti_heights/cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace bh::cli;

namespace {

const std::string corpus = BH_CORPUS_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "betti_heights_cli_test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

struct Outcome {
  int code;
  std::string out, err;
  json parsed() const { return json::parse(out); }
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST_CASE("example23 sweep") {
  const Outcome o = call({"--no-cache", "example23", "--n-max", "6", "--r", "0.5", "--schedule", "paper"});
  REQUIRE(o.code == 0);
  const json j = o.parsed();
  REQUIRE(j["rows"].size() == 6);
  CHECK(std::abs(j["rows"][0]["quadrature"].get<double>() - 4 * std::numbers::pi / 5) < 1e-6);

  const Outcome csv = call({"--no-cache", "example23", "--n-max", "3", "--format", "csv"});
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("n,a_n,closed_form", 0) == 0);
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 4);
  CHECK(call({"example23", "--schedule", "weird"}).code == 2);
}

TEST_CASE("height and validation errors") {
  const Outcome h = call({"--no-cache", "height", "--config", corpus + "/p1t.json"});
  REQUIRE(h.code == 0);
  const json j = h.parsed();
  CHECK(j["naive"] == 0);
  CHECK(std::abs(j["tate"].get<double>() - 0.5) < 1e-12);

  auto expect_pointer = [](const Outcome& o, const std::string& ptr) {
    CHECK(o.code == 2);
    const json e = o.parsed();
    CHECK(e["error"]["kind"] == "Validation");
    CHECK(e["error"]["pointer"] == ptr);
  };
  expect_pointer(call({"--no-cache", "partial", "--config",
                       write_config("empty.json", R"({"surface":{"a":"-t","b":"t"},"sections":[],"discs":[]})")}),
                 "/sections");
  expect_pointer(call({"--no-cache", "partial", "--config",
                       write_config("nosec.json", R"({"surface":{"a":"-t","b":"t"},"discs":[]})")}),
                 "/sections");
  expect_pointer(call({"--no-cache", "height", "--config",
                       write_config("offcurve.json", R"({"surface":{"a":"-t","b":"t"},"sections":[{"x":"1","y":"2"}]})")}),
                 "/sections/0");
  expect_pointer(call({"--no-cache", "partial", "--config",
                       write_config("baddisc.json", R"({"surface":{"a":"-t","b":"t"},"sections":[{"x":"1","y":"1"}],
                                                         "discs":[{"center":[0.1,0],"radius":0.5}]})")}),
                 "/discs/0");
  expect_pointer(call({"--no-cache", "height", "--config",
                       write_config("syntax.json", R"({"surface":{"a":"-t+","b":"t"},"sections":[{"x":"1","y":"1"}]})")}),
                 "/surface/a");
  expect_pointer(call({"--no-cache", "partial", "--config",
                       write_config("map.json", R"({"map":{"components":["z",{"op":"bogus"}]},"discs":[{"center":0,"radius":0.5}]})")}),
                 "/map/components/1");
  expect_pointer(call({"--no-cache", "height", "--config", write_config("broken.json", "{not json")}), "");
  CHECK(call({"--no-cache", "height", "--config", "/nonexistent/config.json"}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({}).code == 2);
}

TEST_CASE("numerical failures exit 3") {
  const std::string cfg = write_config("stall.json", R"({"surface":{"a":"-t","b":"t"},"sections":[{"x":"1","y":"1"}],
      "discs":[{"center":[-1,0],"radius":0.25}],"quadrature":{"tol":1e-16,"max_levels":2,"base_n":16}})");
  const Outcome o = call({"--no-cache", "partial", "--config", cfg});
  CHECK(o.code == 3);
  CHECK(o.parsed()["error"]["kind"] == "QuadratureStalled");
}

TEST_CASE("partial heights, product maps and artifacts") {
  const fs::path csv = scratch("density.csv"), svg = scratch("density.svg");
  const Outcome o = call({"--no-cache", "partial", "--config", corpus + "/p1t.json", "--csv", csv.string(), "--svg",
                          svg.string()});
  REQUIRE(o.code == 0);
  const json j = o.parsed();
  REQUIRE(j["results"].size() == 2);
  CHECK(std::abs(j["results"][0]["value"].get<double>() - 0.0011789) < 1e-6);
  CHECK(fs::file_size(csv) > 1000);
  std::ifstream s(svg);
  std::string first;
  std::getline(s, first);
  CHECK(first.find("<svg") != std::string::npos);

  const Outcome m = call({"--no-cache", "partial", "--config",
                          write_config("pmap.json", R"({"map":{"components":["z","1"]},"discs":[{"center":0,"radius":0.5}]})")});
  REQUIRE(m.code == 0);
  CHECK(std::abs(m.parsed()["results"][0]["value"].get<double>() - 2 * std::numbers::pi / 5) < 1e-6);
}

TEST_CASE("brody and verify") {
  const Outcome b = call({"--no-cache", "brody", "--config", corpus + "/brody_power.json"});
  REQUIRE(b.code == 0);
  const json j = b.parsed();
  CHECK(j["norm_bounded"] == false);
  CHECK(j["zoom_valid"] == true);
  for (const auto& st : j["steps"]) CHECK(std::abs(st["dpsi0"].get<double>() - 1) < 1e-3);
  CHECK(j["probe"]["verticality"].get<double>() <= 10 * j["steps"].back()["scale"].get<double>());

  const Outcome nb = call({"--no-cache", "brody", "--config", corpus + "/brody_bounded.json"});
  CHECK(nb.code == 0);
  CHECK(nb.parsed()["norm_bounded"] == true);

  for (const char* entry : {"torsion", "gram"}) {
    const Outcome v = call({"verify", "--entry", entry, "--corpus", corpus});
    CHECK(v.code == 0);
    CHECK(v.parsed()["passed"] == true);
  }
  CHECK(call({"verify", "--entry", "missing", "--corpus", corpus}).code == 2);
}

TEST_CASE("result store") {
  const fs::path path = scratch("store.jsonl");
  ResultStore store(path.string());
  CHECK_FALSE(store.lookup("0123").has_value());

  const ResultRecord a{"0123", "height", version(), "2026-01-01T00:00:00Z", json{{"tate", 0.5}}};
  store.append(a);
  const auto back = store.lookup("0123");
  REQUIRE(back.has_value());
  CHECK(*back == a);

  ResultRecord newer = a;
  newer.timestamp = "2026-01-02T00:00:00Z";
  newer.result = json{{"tate", 0.25}};
  store.append(newer);
  { std::ofstream(path, std::ios::app) << "{\"hash\": truncated\n" << "garbage\n"; }
  const auto latest = store.lookup("0123");
  REQUIRE(latest.has_value());
  CHECK(latest->result["tate"] == 0.25);
  CHECK(store.skipped_lines() == 2);
  CHECK_FALSE(store.lookup("0123", "other-version").has_value());

  CHECK(job_hash(json{{"b", 1}, {"a", 2}}) == job_hash(json::parse(R"({"a":2,"b":1})")));
  CHECK(job_hash(json{{"a", 1}}) != job_hash(json{{"a", 2}}));
  CHECK(job_hash(json{{"a", 1}}).size() == 16);
}

TEST_CASE("cached runs are deterministic") {
  const std::string cache = scratch("runs.jsonl").string();
  const std::vector<std::string> args{"--cache", cache, "height", "--config", corpus + "/p1t.json"};
  const Outcome first = call(args), second = call(args);
  REQUIRE(first.code == 0);
  REQUIRE(second.code == 0);
  json a = first.parsed(), b = second.parsed();
  CHECK(a["cached"] == false);
  CHECK(b["cached"] == true);
  a.erase("cached");
  b.erase("cached");
  CHECK(a.dump() == b.dump());

  std::vector<std::string> fresh = args;
  fresh.insert(fresh.begin(), "--no-cache");
  CHECK(call(fresh).parsed()["cached"] == false);
  const Outcome p1 = call({"--no-cache", "partial", "--config", corpus + "/p1t.json"});
  const Outcome p2 = call({"--no-cache", "partial", "--config", corpus + "/p1t.json"});
  CHECK(p1.out == p2.out);

  { std::ofstream(cache, std::ios::app) << "corrupt line\n"; }
  const Outcome third = call(args);
  CHECK(third.code == 0);
  CHECK(third.err.find("skipped 1 corrupt") != std::string::npos);
}
