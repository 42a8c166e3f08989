#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "surfeig/analysis.hpp"
#include "surfeig/cli.hpp"
#include "surfeig/errors.hpp"

using namespace surfeig;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "surfeig_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST_CASE("level ranges") {
  CHECK(parse_level_range("1..4") == std::vector<int>{1, 2, 3, 4});
  CHECK(parse_level_range("3") == std::vector<int>{3});
  CHECK_THROWS_AS(parse_level_range("4..1"), InputError);
  CHECK_THROWS_AS(parse_level_range("a..b"), InputError);
  CHECK_THROWS_AS(parse_level_range(""), InputError);
}

TEST_CASE("solve prints eigenvalues") {
  const Result r = invoke({"solve", "--level", "0", "--k", "1", "--kg", "1"});
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 8);
  CHECK(ls[0].rfind("# level", 0) == 0);
  CHECK(ls[1] == "j,lambda_h,lambda_exact,abs_error,residual");
  for (int i = 2; i < 8; ++i) CHECK(std::stod(ls[i].substr(ls[i].find(',') + 1)) > 0.0);
}

TEST_CASE("abstract subcommand passes") {
  const Result r = invoke({"abstract", "--trials", "2", "--seed", "7", "--mode", "perturbed"});
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(r.out);
  CHECK(ls.size() == 48);
  for (const auto& l : ls) CHECK(l.find("\"pass\":true") != std::string::npos);
}

TEST_CASE("usage errors") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"converge", "--levels", "1..2", "--bogus"},
           {"converge", "--k", "9", "--levels", "1"},
           {"frobnicate"},
           {"solve"},
           {"abstract", "--mode", "loose"},
           {"converge", "--levels", "3..1"},
       }) {
    const Result r = invoke(args);
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("error") != std::string::npos);
  }
  CHECK(invoke({"--help"}).code == kExitOk);
}

TEST_CASE("converge writes a readable CSV") {
  const auto dir = std::filesystem::temp_directory_path() / "surfeig_cli_test";
  std::filesystem::create_directories(dir);
  const auto csv = dir / "conv.csv";
  const Result r = invoke({"converge", "--k", "1", "--kg", "1", "--levels", "1..2", "--out", csv.string()});
  REQUIRE(r.code == kExitOk);
  std::ifstream in(csv);
  const auto rows = read_convergence_csv(in);
  CHECK(rows.size() == 12);
  CHECK(rows.back().level == 2);
  CHECK(rows.back().ev_eoc.has_value());

  const Result stdout_run = invoke({"converge", "--k", "1", "--kg", "1", "--levels", "1..2"});
  std::ifstream again(csv);
  std::stringstream file;
  file << again.rdbuf();
  CHECK(stdout_run.out == file.str());
  std::filesystem::remove_all(dir);
}

TEST_CASE("area subcommand") {
  const Result r = invoke({"area", "--kg", "2", "--levels", "0..2"});
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 4);
  CHECK(ls[0] == "level,h,area_h,area_err,area_eoc");
}
