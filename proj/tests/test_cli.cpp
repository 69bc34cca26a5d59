#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

std::string cli() {
  const char* p = std::getenv("KICKED_CLI");
  REQUIRE_MESSAGE(p != nullptr, "KICKED_CLI must point at the command-line tool");
  return p;
}

Run run(const std::string& args) {
  Run r;
  const std::string cmd = "'" + cli() + "' " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("kicked_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("exit codes") {
  const fs::path d = fresh_dir("codes");
  CHECK(run("--help").code == 0);
  CHECK(run("no-such-command").code == 1);
  CHECK(run("scan --cells -3 --out-dir " + d.string()).code == 1);
  CHECK(run("scan --kicks constant:2,0,0,1 --cells 4 --N 16 --out-dir " + d.string()).code == 1);
  CHECK(run("construct-eus --depth 3 --max-digits 100 --out-dir " + d.string()).code == 2);
  // The aborted build still leaves its finished prefix behind.
  CHECK(fs::exists(d / "eus.json"));
}

TEST_CASE("scan writes CSV and JSON") {
  const fs::path d = fresh_dir("scan");
  const Run r = run("scan --kicks constant-m:-1 --T 10 --cells 50 --N 1024 --out-dir " + d.string());
  REQUIRE(r.code == 0);
  const std::string csv = slurp(d / "scan.csv");
  CHECK(csv.rfind("t,verdict,sup_lognorm,slope\n", 0) == 0);
  const auto j = nlohmann::json::parse(slurp(d / "scan.json"));
  CHECK(j["measure"].get<double>() == doctest::Approx(4.0).epsilon(0.06));
  CHECK(j["config"]["cells"] == "50");
}

TEST_CASE("config file with flag override") {
  const fs::path d = fresh_dir("config");
  {
    std::ofstream cfg(d / "scan.json.cfg");
    cfg << R"({"kicks": "constant-m:-1", "T": 10, "cells": 20, "N": 512})";
  }
  REQUIRE(run("scan --config " + (d / "scan.json.cfg").string() + " --cells 40 --out-dir " + d.string()).code == 0);
  const auto j = nlohmann::json::parse(slurp(d / "scan.json"));
  CHECK(j["config"]["cells"] == "40");
  CHECK(j["config"]["N"] == "512");
}

TEST_CASE("deterministic output") {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  const std::string args = "scan --kicks random --seed 4 --T 5 --cells 30 --N 2048 --out-dir ";
  REQUIRE(run(args + a.string()).code == 0);
  REQUIRE(run(args + b.string() + " --workers 3").code == 0);
  CHECK(slurp(a / "scan.csv") == slurp(b / "scan.csv"));
}

TEST_CASE("iwasawa prints the factors") {
  const Run r = run("iwasawa \"1 2; 0 1\"");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["s"].get<double>() == doctest::Approx(2.0));
  CHECK(j["lambda"].get<double>() == doctest::Approx(1.0));
  CHECK(j["alpha"].get<double>() == doctest::Approx(0.0));
  CHECK(run("iwasawa \"1 2; 3 4\"").code == 1);
}

TEST_CASE("schrodinger and window commands") {
  const fs::path d = fresh_dir("misc");
  REQUIRE(run("schrodinger --c -1 --t 1 --K 600 --out-dir " + d.string()).code == 0);
  const auto s = nlohmann::json::parse(slurp(d / "schrodinger.json"));
  CHECK(s["verdict"] == "bounded");
  REQUIRE(run("rost-window --lambdas 1 --shifts 0 --t 1 --K 10 --n-max 100 --out-dir " + d.string()).code == 0);
  const auto w = nlohmann::json::parse(slurp(d / "rost_window.json"));
  CHECK(w["window"] == 10);
  CHECK(run("rost-window --lambdas 1 --shifts 2 --t 1 --K 10 --out-dir " + d.string()).code == 1);
}
