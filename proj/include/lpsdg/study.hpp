#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpsdg/slab_solver.hpp"
#include "lpsdg/verification.hpp"

namespace lpsdg {

struct StudyConfig {
  std::string case_name = "space_dominant";
  int k = 1;
  int r = 2;
  bool enriched = true;
  double nu = 1e-6;
  double mu = 0.1;
  double final_time = 1.0;
  std::vector<int> levels;
  std::vector<double> taus;
  bool postprocess = false;
  std::string output = "study.csv";
  std::string trajectory_output;  // empty: no dump
  unsigned threads = 1;
  NewtonConfig newton;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Bad command line. `help()` is set when --help was requested.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, bool help = false)
      : std::runtime_error(what), help_(help) {}
  bool help() const { return help_; }

 private:
  bool help_;
};

/// Defaults depend on the case: space_dominant uses levels 2..5 and
/// tau = 1/800; the time cases use level 3 and tau = 0.1 * 2^-i, i = 0..5;
/// steady_check uses levels 1..3 and tau = 0.1.
StudyConfig parse_config(int argc, const char* const* argv);

/// One (level, tau) run of a study.
struct StudyRow {
  std::string case_name;
  int k = 0;
  int r = 0;
  double nu = 0.0;
  double mu = 0.0;
  int level = 0;
  double h = 0.0;
  double tau = 0.0;
  double err_L2L2_u = 0.0;
  double err_Snorm = 0.0;
  double err_L2L2_p = 0.0;
  double err_final_u = 0.0;
  double err_jump = 0.0;
  std::optional<double> err_L2L2_u_postproc;
  ErrorReport report;
};

/// Solves one configuration and evaluates its errors. Propagates
/// StepFailure and SolverFailure.
StudyRow run_point(const StudyConfig& config, int level, double tau,
                   std::ostream* trajectory_dump = nullptr);

std::string csv_header();
std::string csv_row(const StudyRow& row);

/// Human-readable EOC tables. Rows sharing a level form a tau sweep when
/// several tau values are present; otherwise rows form an h sweep.
std::string eoc_report(const std::vector<StudyRow>& rows);

/// Runs the study, writing the CSV to config.output and the EOC tables next
/// to it (extension .eoc.txt). Returns 0 on success, 3 on solver failure.
int run_study(const StudyConfig& config, std::ostream& log);

/// Full command-line driver: 0 success, 2 usage error, 3 solver failure.
int study_main(int argc, const char* const* argv);

/// FNV-1a hash of the raw bytes of a coefficient vector.
std::uint64_t checksum(const Eigen::VectorXd& v);

}  // namespace lpsdg
