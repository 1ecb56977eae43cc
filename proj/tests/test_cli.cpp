#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "pam1d/cli.hpp"
#include "pam1d/io.hpp"

using namespace pam1d;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("pam1d_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_spec(const std::string& name, const std::string& body) {
  const auto p = scratch() / name;
  std::ofstream(p) << body;
  return p.string();
}

std::string atom_spec() {
  return write_spec("atom.json",
                    R"({"gamma":0.0,"upper":{"atom_p":0.5},"mix_q":0.5,"lower":{"pareto_zeta":1.0}})");
}

struct Run {
  int code = 0;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "pam1d");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream err, out;
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  Run r;
  r.code = cli_main(static_cast<int>(argv.size()), argv.data());
  std::cerr.rdbuf(old_err);
  std::cout.rdbuf(old_out);
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find("\r\n", pos);
    REQUIRE(end != std::string::npos);
    out.push_back(text.substr(pos, end - pos));
    pos = end + 2;
  }
  return out;
}

}  // namespace

TEST_CASE("csv formatting") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(1000.0) == "1000");
  CHECK(format_real(std::nan("")) == "nan");
  CHECK(format_real(-INFINITY) == "-inf");
  for (double x : {std::numbers::pi, 1e-300, -2.5e17, 1.0 / 3.0}) {
    CHECK(std::strtod(format_real(x).c_str(), nullptr) == x);
  }
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");

  Table t{{"a", "b"}, {}};
  t.add({1.5, std::string("x,y")});
  t.add({std::int64_t{-3}, true});
  CHECK(to_csv(t) == "a,b\r\n1.5,\"x,y\"\r\n-3,1\r\n");
  CHECK_THROWS(t.add({1.0}));
  const auto j = to_json(t);
  CHECK(j.dump() == R"([{"a":1.5,"b":"x,y"},{"a":-3,"b":true}])");
}

TEST_CASE("cli: scales table") {
  const auto out = (scratch() / "scales.csv").string();
  const auto r = run({"scales", "--spec", atom_spec(), "--t-grid", "1e3:1e9:geometric:8", "--out",
                      out, "--deterministic"});
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());
  const auto ls = lines(slurp(out));
  REQUIRE(ls.size() == 9);
  CHECK(ls[0] == "t,G,alpha_bt_sq,b_t,b_star,r_t,gamma_t");
  CHECK(ls[1].rfind("1000,", 0) == 0);
}

TEST_CASE("cli: exit codes") {
  const auto missing = run({"scales", "--t-grid", "1e3:1e9:geometric:8"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("--spec") != std::string::npos);
  CHECK(missing.err.find("# pam1d ") == 0);  // timestamp line without --deterministic

  CHECK(run({"no-such-command"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"scales", "--spec", atom_spec(), "--bogus"}).code == 2);
  CHECK(run({"scales", "--spec", atom_spec(), "--format", "xml"}).code == 2);
  CHECK(run({"solve", "--spec", atom_spec()}).code == 2);  // --t missing
  CHECK(run({"--help"}).code == 0);

  const auto bad = write_spec("bad.json", R"({"gamma":0.0,"upper":{"atom_p":0.5},"mix_q":0.5,)"
                                          R"("lower":{"pareto_zeta":1.0},"extra":1})");
  const auto unknown = run({"solve", "--spec", bad, "--t", "10", "--deterministic"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("extra") != std::string::npos);
  CHECK(run({"solve", "--spec", (scratch() / "absent.json").string(), "--t", "10"}).code == 2);

  const auto bounded = write_spec(
      "bounded.json", R"({"gamma":0.0,"upper":{"atom_p":0.5},"mix_q":0.5,"lower":{"bounded_wmax":2.0}})");
  CHECK(run({"verify-lln", "--spec", bounded, "--out", (scratch() / "x").string()}).code == 2);

  const auto stuck = run({"solve", "--spec", atom_spec(), "--t", "100", "--R0", "2", "--R-cap", "4",
                          "--rtol", "1e-14", "--deterministic", "--out", (scratch() / "y").string()});
  CHECK(stuck.code == 3);
}

TEST_CASE("cli: JSON records keep their key order") {
  const auto out = scratch() / "solve.json";
  REQUIRE(run({"solve", "--spec", atom_spec(), "--seed", "3", "--t", "50", "--out", out.string(),
               "--deterministic"})
              .code == 0);
  const auto j = nlohmann::ordered_json::parse(slurp(out));
  std::vector<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"u", "log_u", "R", "lambda", "clamped_sites"});
  CHECK(j["log_u"].get<double>() == doctest::Approx(std::log(j["u"].get<double>())));
}

TEST_CASE("cli: chi for gamma = 0") {
  const auto out = scratch() / "chi.json";
  REQUIRE(run({"chi", "--gamma", "0", "--A", "0.693147", "--kappa", "1", "--out", out.string(),
               "--deterministic"})
              .code == 0);
  const auto j = nlohmann::ordered_json::parse(slurp(out));
  const double exact = std::numbers::pi * std::numbers::pi * 0.693147 * 0.693147;
  CHECK(std::fabs(j["chi_tilde"].get<double>() / exact - 1.0) < 0.01);
  for (const char* k : {"chi_tilde", "R_star", "psi_grid", "constraint_value", "flags"}) {
    CHECK(j.contains(k));
  }
  CHECK(j["constraint_value"].get<double>() <= 1.0 + 1e-6);
  CHECK(j["psi_grid"]["x"].size() == j["psi_grid"]["psi"].size());
}

TEST_CASE("cli: byte-identical reruns") {
  const auto spec = atom_spec();
  auto twice = [&](std::vector<std::string> args, const std::string& name) {
    const auto a = scratch() / (name + "_a"), b = scratch() / (name + "_b");
    auto args_a = args, args_b = args;
    args_a.insert(args_a.end(), {"--out", a.string(), "--deterministic"});
    args_b.insert(args_b.end(), {"--out", b.string(), "--deterministic"});
    setenv("PAM1D_THREADS", "1", 1);
    REQUIRE(run(args_a).code == 0);
    setenv("PAM1D_THREADS", "4", 1);
    REQUIRE(run(args_b).code == 0);
    unsetenv("PAM1D_THREADS");
    const auto sa = slurp(a);
    CHECK(!sa.empty());
    CHECK(sa == slurp(b));
  };
  twice({"rate", "--spec", spec, "--seeds", "1:4", "--t-grid", "50:200:geometric:2"}, "rate");
  twice({"verify-lln", "--spec", spec, "--seeds", "1:5", "--n", "100,1000", "--format", "json"},
        "lln");
  twice({"verify-microbox", "--spec", spec, "--seeds", "1:5", "--t-grid", "1e2:1e4:geometric:3"},
        "mb");
  twice({"fk", "--spec", spec, "--seed", "2", "--t", "3", "--samples", "2000"}, "fk");
}
