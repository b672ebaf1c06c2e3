#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lpsdg/study.hpp"

using namespace lpsdg;
namespace fs = std::filesystem;

namespace {

StudyConfig parse(std::vector<const char*> args) {
  args.insert(args.begin(), "lpsdg_study");
  return parse_config(static_cast<int>(args.size()), args.data());
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lpsdg_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_exe(const std::string& args) {
  const std::string cmd = std::string(LPSDG_STUDY_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> csv_records(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) {
      fields.push_back(f);
    }
    if (line.back() == ',') {
      fields.emplace_back();
    }
    out.push_back(fields);
  }
  return out;
}

}  // namespace

TEST_CASE("defaults") {
  const StudyConfig c = parse({});
  CHECK(c.case_name == "space_dominant");
  CHECK(c.k == 1);
  CHECK(c.r == 2);
  CHECK(c.enriched);
  CHECK(c.nu == 1e-6);
  CHECK(c.mu == 0.1);
  CHECK(c.final_time == 1.0);
  CHECK(c.levels == std::vector<int>{2, 3, 4, 5});
  REQUIRE(c.taus.size() == 1);
  CHECK(c.taus[0] == doctest::Approx(1.0 / 800.0));
  CHECK_FALSE(c.postprocess);
  CHECK(c.threads == 1);
}

TEST_CASE("time study with halvings") {
  const StudyConfig c =
      parse({"--case", "time_dominant", "--k", "2", "--r", "4", "--levels", "3", "--tau-halvings", "6"});
  CHECK(c.k == 2);
  CHECK(c.r == 4);
  CHECK(c.levels == std::vector<int>{3});
  REQUIRE(c.taus.size() == 7);
  CHECK(c.taus.front() == 0.1);
  CHECK(c.taus.back() == doctest::Approx(0.1 / 64));

  const StudyConfig d = parse({"--case", "rough_pressure"});
  CHECK(d.taus.size() == 6);
  CHECK(d.levels == std::vector<int>{3});

  const StudyConfig e = parse({"--case", "time_dominant", "--tau", "0.05", "0.025"});
  CHECK(e.taus == std::vector<double>{0.05, 0.025});
}

TEST_CASE("plain Galerkin configuration") {
  const StudyConfig c = parse({"--case", "space_dominant", "--nu", "1", "--mu", "0", "--no-enrich"});
  CHECK_FALSE(c.enriched);
  CHECK(c.nu == 1.0);
  CHECK(c.mu == 0.0);
  CHECK(c.r == 2);
}

TEST_CASE("usage errors") {
  CHECK_THROWS_AS(parse({"--bogus"}), UsageError);
  CHECK_THROWS_AS(parse({"--k", "abc"}), UsageError);
  CHECK_THROWS_AS(parse({"--k", "6"}), UsageError);
  CHECK_THROWS_AS(parse({"--r", "1"}), UsageError);
  CHECK_THROWS_AS(parse({"--case", "cavity"}), UsageError);
  CHECK_THROWS_AS(parse({"--tau", "0.3"}), UsageError);
  CHECK_THROWS_AS(parse({"--tau", "-0.1"}), UsageError);
  CHECK_THROWS_AS(parse({"--levels", "0"}), UsageError);
  CHECK_THROWS_AS(parse({"--tau", "0.1", "0.05", "--tau-halvings", "2"}), UsageError);
  CHECK_THROWS_AS(parse({"--nu", "0"}), UsageError);
  CHECK_THROWS_AS(parse({"--threads", "0"}), UsageError);
  try {
    parse({"--help"});
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(e.help());
    CHECK(std::string(e.what()).find("--tau-halvings") != std::string::npos);
  }
  try {
    parse({"--bogus"});
  } catch (const UsageError& e) {
    CHECK_FALSE(e.help());
  }
}

TEST_CASE("config validation") {
  StudyConfig c;
  c.levels = {2};
  c.taus = {0.5};
  CHECK_NOTHROW(c.validate());
  c.levels.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.levels = {2};
  c.taus.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("csv schema") {
  CHECK(csv_header() ==
        "case,k,r,nu,mu,level,h,tau,err_L2L2_u,err_Snorm,err_L2L2_p,err_final_u,err_jump,"
        "err_L2L2_u_postproc");
  StudyRow row;
  row.case_name = "steady_check";
  row.k = 1;
  row.r = 2;
  const std::string line = csv_row(row);
  CHECK(line.rfind("steady_check,1,2,", 0) == 0);
  CHECK(line.back() == ',');
  row.err_L2L2_u_postproc = 0.5;
  CHECK(csv_row(row).find("5.0000000000e-01") != std::string::npos);
}

TEST_CASE("checksum") {
  const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
  Eigen::VectorXd b = a;
  CHECK(checksum(a) == checksum(b));
  b[3] = std::nextafter(b[3], 2.0);
  CHECK(checksum(a) != checksum(b));
  CHECK(checksum(Eigen::VectorXd()) == 1469598103934665603ULL);
}

TEST_CASE("eoc report") {
  std::vector<StudyRow> rows(3);
  const double taus[] = {0.1, 0.05, 0.025};
  for (int i = 0; i < 3; ++i) {
    rows[i].case_name = "time_dominant";
    rows[i].level = 3;
    rows[i].tau = taus[i];
    rows[i].err_L2L2_u = std::pow(taus[i], 2);
    rows[i].err_Snorm = std::pow(taus[i], 1.5);
    rows[i].err_L2L2_p = 1.0;
    rows[i].err_final_u = 1.0;
    rows[i].err_jump = 1.0;
  }
  const std::string text = eoc_report(rows);
  CHECK(text.find("level=3") != std::string::npos);
  CHECK(text.find(" 2.00") != std::string::npos);
  CHECK(text.find(" 1.50") != std::string::npos);
  CHECK(text.find("err_L2L2_u_postproc") == std::string::npos);
  CHECK(eoc_report({}).empty());
}

TEST_CASE("steady run writes exact errors and is reproducible") {
  const fs::path out = scratch("steady.csv");
  const std::string a = out.string();
  const std::string traj = scratch("steady_traj.csv").string();
  std::vector<const char*> args{"lpsdg_study", "--case",   "steady_check", "--k",
                                "2",           "--levels", "1",           "2",
                                "--tau",       "0.25",     "--postprocess", "--output",
                                a.c_str(),     "--trajectory", traj.c_str()};
  REQUIRE(study_main(static_cast<int>(args.size()), args.data()) == 0);
  const std::string first = slurp(out);
  const std::string first_traj = slurp(traj);
  CHECK(first.rfind("# case=steady_check", 0) == 0);
  CHECK(first.find("# newton_rtol=") != std::string::npos);
  const auto records = csv_records(first);
  REQUIRE(records.size() == 3);
  CHECK(records[0].size() == 14);
  for (std::size_t i = 1; i < records.size(); ++i) {
    REQUIRE(records[i].size() == 14);
    for (std::size_t col = 8; col < 14; ++col) {
      CHECK(std::stod(records[i][col]) <= 1e-8);
    }
  }
  CHECK(fs::exists(scratch("steady.eoc.txt")));
  CHECK(first_traj.rfind("level,tau,n,i,t,checksum", 0) == 0);

  REQUIRE(study_main(static_cast<int>(args.size()), args.data()) == 0);
  CHECK(slurp(out) == first);
  CHECK(slurp(traj) == first_traj);
}

TEST_CASE("executable exit codes") {
  CHECK(run_exe("--help") == 0);
  CHECK(run_exe("--bogus") == 2);
  CHECK(run_exe("--k 9") == 2);
  const fs::path out = scratch("fail.csv");
  CHECK(run_exe("--case time_dominant --levels 1 --tau 0.1 --newton-max-iter 1 "
                "--newton-rtol 1e-30 --newton-atol 1e-30 --output " + out.string()) == 3);
  // The partial CSV still carries its header.
  CHECK(slurp(out).find(csv_header()) != std::string::npos);
  CHECK(run_exe("--case steady_check --levels 1 --tau 0.5 --output " +
                scratch("ok.csv").string()) == 0);
}
