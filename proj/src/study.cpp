#include "lpsdg/study.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

namespace lpsdg {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string sci(double v) { return fmt("%.10e", v); }

std::size_t slab_count(double final_time, double tau) {
  const double n = std::round(final_time / tau);
  if (n < 1.0 || std::abs(n * tau - final_time) > 1e-9 * final_time) {
    throw std::invalid_argument("tau " + sci(tau) + " does not divide T = " + sci(final_time));
  }
  return static_cast<std::size_t>(n);
}

std::string eoc_path(const std::string& csv) {
  const auto dot = csv.rfind('.');
  const auto slash = csv.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return csv + ".eoc.txt";
  }
  return csv.substr(0, dot) + ".eoc.txt";
}

std::string metadata(const StudyConfig& c) {
  std::ostringstream os;
  os << "# case=" << c.case_name << " k=" << c.k << " r=" << c.r
     << " enriched=" << (c.enriched ? 1 : 0) << " nu=" << sci(c.nu) << " mu=" << sci(c.mu)
     << " T=" << sci(c.final_time) << " threads=" << c.threads << '\n';
  os << "# levels=";
  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    os << (i ? "," : "") << c.levels[i];
  }
  os << " taus=";
  for (std::size_t i = 0; i < c.taus.size(); ++i) {
    os << (i ? "," : "") << sci(c.taus[i]);
  }
  os << " postprocess=" << (c.postprocess ? 1 : 0) << '\n';
  os << "# newton_rtol=" << sci(c.newton.rel_tol) << " newton_atol=" << sci(c.newton.abs_tol)
     << " newton_max_iter=" << c.newton.max_iter << '\n';
  os << "# time integrals of L2(L2) errors: Gauss rule with k+3 points per slab;"
     << " S-norm terms: Radau rule of the slab\n";
  os << "# pressure errors: exact and discrete pressure shifted to zero mean\n";
  return os.str();
}

}  // namespace

void StudyConfig::validate() const {
  const auto names = case_names();
  if (std::find(names.begin(), names.end(), case_name) == names.end()) {
    throw std::invalid_argument("unknown case '" + case_name + "'");
  }
  if (k < 0 || k > kMaxTemporalDegree) {
    throw std::invalid_argument("k must lie in [0, 5]");
  }
  if (r < 2 || r > kMaxSpatialOrder) {
    throw std::invalid_argument("r must lie in [2, 8]");
  }
  if (!(nu > 0.0) || !(mu >= 0.0) || !(final_time > 0.0)) {
    throw std::invalid_argument("nu and T must be positive, mu non-negative");
  }
  if (levels.empty()) {
    throw std::invalid_argument("at least one mesh level is required");
  }
  for (const int l : levels) {
    if (l < 1 || l > 12) {
      throw std::invalid_argument("mesh levels must lie in [1, 12]");
    }
  }
  if (taus.empty()) {
    throw std::invalid_argument("at least one time step is required");
  }
  for (const double t : taus) {
    if (!(t > 0.0)) {
      throw std::invalid_argument("time steps must be positive");
    }
    slab_count(final_time, t);
  }
  if (threads < 1) {
    throw std::invalid_argument("threads must be >= 1");
  }
  newton.validate();
}

StudyConfig parse_config(int argc, const char* const* argv) {
  StudyConfig c;
  std::vector<double> taus;
  int halvings = -1;

  CLI::App app{"Manufactured-solution convergence study for the LPS / dG(k) Navier-Stokes solver",
               "lpsdg_study"};
  app.add_option("--case", c.case_name, "Manufactured solution")
      ->check(CLI::IsMember(case_names()))
      ->capture_default_str();
  app.add_option("--k", c.k, "dG order in time")->capture_default_str();
  app.add_option("--r", c.r, "Velocity order in space")->capture_default_str();
  app.add_flag("--enrich,!--no-enrich", c.enriched, "Add the cell bubbles to Q_r");
  app.add_option("--nu", c.nu, "Viscosity")->capture_default_str();
  app.add_option("--mu", c.mu, "LPS constant mu_K")->capture_default_str();
  app.add_option("--T", c.final_time, "Final time")->capture_default_str();
  app.add_option("--levels", c.levels, "Mesh levels (2^L x 2^L cells)");
  app.add_option("--tau", taus, "Time step(s); with --tau-halvings a single base value");
  app.add_option("--tau-halvings", halvings, "Run tau, tau/2, ..., tau/2^N");
  app.add_flag("--postprocess", c.postprocess, "Also evaluate the post-processed solution");
  app.add_option("--output", c.output, "CSV output path")->capture_default_str();
  app.add_option("--trajectory", c.trajectory_output, "Write per-stage checksums here");
  app.add_option("--threads", c.threads, "Assembly threads")->capture_default_str();
  app.add_option("--newton-rtol", c.newton.rel_tol)->capture_default_str();
  app.add_option("--newton-atol", c.newton.abs_tol)->capture_default_str();
  app.add_option("--newton-max-iter", c.newton.max_iter)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help(), true);
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n" + app.help());
  }

  const bool space = c.case_name == "space_dominant";
  const bool steady = c.case_name == "steady_check";
  if (c.levels.empty()) {
    c.levels = space ? std::vector<int>{2, 3, 4, 5} : steady ? std::vector<int>{1, 2, 3}
                                                             : std::vector<int>{3};
  }
  if (taus.empty()) {
    taus = {space ? 1.0 / 800.0 : 0.1};
    if (halvings < 0 && !space && !steady) {
      halvings = 5;
    }
  }
  if (halvings >= 0) {
    if (taus.size() != 1) {
      throw UsageError("--tau-halvings needs exactly one base --tau");
    }
    const double base = taus.front();
    taus.clear();
    for (int i = 0; i <= halvings; ++i) {
      taus.push_back(std::ldexp(base, -i));
    }
  }
  c.taus = taus;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

std::uint64_t checksum(const Eigen::VectorXd& v) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
  const std::size_t n = static_cast<std::size_t>(v.size()) * sizeof(double);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

StudyRow run_point(const StudyConfig& config, int level, double tau,
                   std::ostream* trajectory_dump) {
  const Discretization disc(level, config.r, config.enriched, config.threads);
  const ManufacturedCase mc = make_case(config.case_name, config.nu);
  SlabSolver solver(disc, config.k, mc.problem(config.mu), config.newton);
  const TimePartition partition =
      TimePartition::uniform(config.final_time, slab_count(config.final_time, tau));
  const TrajectoryRecord trajectory = solver.advance(partition);

  std::optional<PostprocessedTrajectory> post;
  if (config.postprocess) {
    post.emplace(trajectory);
  }
  StudyRow row;
  row.report = compute_errors(disc, trajectory, mc, config.mu, post ? &*post : nullptr);
  row.case_name = config.case_name;
  row.k = config.k;
  row.r = config.r;
  row.nu = config.nu;
  row.mu = config.mu;
  row.level = level;
  row.h = disc.mesh().edge_length();
  row.tau = tau;
  row.err_L2L2_u = row.report.l2l2_velocity();
  row.err_Snorm = row.report.snorm();
  row.err_L2L2_p = row.report.l2l2_pressure();
  row.err_final_u = row.report.final_velocity;
  row.err_jump = row.report.jump();
  row.err_L2L2_u_postproc = row.report.l2l2_postprocessed();

  if (trajectory_dump != nullptr) {
    for (const SlabState& slab : trajectory.slabs) {
      for (std::size_t i = 0; i < slab.velocity.size(); ++i) {
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(checksum(slab.velocity[i])));
        *trajectory_dump << level << ',' << sci(tau) << ',' << slab.n << ',' << i + 1 << ','
                         << sci(slab.times[i]) << ',' << hex << '\n';
      }
    }
  }
  return row;
}

std::string csv_header() {
  return "case,k,r,nu,mu,level,h,tau,err_L2L2_u,err_Snorm,err_L2L2_p,err_final_u,err_jump,"
         "err_L2L2_u_postproc";
}

std::string csv_row(const StudyRow& row) {
  std::ostringstream os;
  os << row.case_name << ',' << row.k << ',' << row.r << ',' << sci(row.nu) << ','
     << sci(row.mu) << ',' << row.level << ',' << sci(row.h) << ',' << sci(row.tau) << ','
     << sci(row.err_L2L2_u) << ',' << sci(row.err_Snorm) << ',' << sci(row.err_L2L2_p) << ','
     << sci(row.err_final_u) << ',' << sci(row.err_jump) << ','
     << (row.err_L2L2_u_postproc ? sci(*row.err_L2L2_u_postproc) : std::string());
  return os.str();
}

std::string eoc_report(const std::vector<StudyRow>& rows) {
  if (rows.empty()) {
    return "";
  }
  bool tau_sweep = false;
  for (const StudyRow& r : rows) {
    if (r.level == rows.front().level && r.tau != rows.front().tau) {
      tau_sweep = true;
    }
  }
  // Group consecutive rows that share the fixed parameter.
  std::vector<std::vector<const StudyRow*>> groups;
  for (const StudyRow& r : rows) {
    const bool same = !groups.empty() && (tau_sweep ? groups.back().front()->level == r.level
                                                    : groups.back().front()->tau == r.tau);
    if (!same) {
      groups.emplace_back();
    }
    groups.back().push_back(&r);
  }

  struct Column {
    const char* name;
    std::optional<double> (*get)(const StudyRow&);
  };
  const Column columns[] = {
      {"err_L2L2_u", [](const StudyRow& r) { return std::optional<double>(r.err_L2L2_u); }},
      {"err_Snorm", [](const StudyRow& r) { return std::optional<double>(r.err_Snorm); }},
      {"err_L2L2_p", [](const StudyRow& r) { return std::optional<double>(r.err_L2L2_p); }},
      {"err_final_u", [](const StudyRow& r) { return std::optional<double>(r.err_final_u); }},
      {"err_jump", [](const StudyRow& r) { return std::optional<double>(r.err_jump); }},
      {"err_L2L2_u_postproc", [](const StudyRow& r) { return r.err_L2L2_u_postproc; }},
  };

  std::ostringstream os;
  for (const auto& group : groups) {
    const StudyRow& first = *group.front();
    os << first.case_name << " dG(" << first.k << ") r=" << first.r << ' '
       << (tau_sweep ? "level=" + std::to_string(first.level) : "tau=" + sci(first.tau))
       << '\n';
    std::vector<double> params;
    for (const StudyRow* r : group) {
      params.push_back(tau_sweep ? r->tau : r->h);
    }
    std::vector<std::vector<std::string>> cells(group.size());
    os << (tau_sweep ? "         tau" : "           h");
    for (const Column& col : columns) {
      std::vector<double> errs;
      bool present = true;
      for (const StudyRow* r : group) {
        const auto v = col.get(*r);
        present = present && v.has_value();
        errs.push_back(v.value_or(0.0));
      }
      if (!present) {
        continue;
      }
      char head[64];
      std::snprintf(head, sizeof head, "  %20s  %5s", col.name, "eoc");
      os << head;
      std::optional<EOCTable> table;
      if (group.size() >= 2) {
        table = eoc(errs, params);
      }
      for (std::size_t i = 0; i < group.size(); ++i) {
        const std::string order = table && table->rows[i].order
                                      ? fmt("%5.2f", *table->rows[i].order)
                                      : std::string("    -");
        cells[i].push_back("  " + fmt("%20.6e", errs[i]) + "  " + order);
      }
    }
    os << '\n';
    for (std::size_t i = 0; i < group.size(); ++i) {
      os << fmt("%12.5e", params[i]);
      for (const std::string& cell : cells[i]) {
        os << cell;
      }
      os << '\n';
    }
    os << '\n';
  }
  return os.str();
}

int run_study(const StudyConfig& config, std::ostream& log) {
  config.validate();
  std::ofstream csv(config.output);
  if (!csv) {
    log << "error: cannot open " << config.output << '\n';
    return 2;
  }
  std::ofstream dump;
  if (!config.trajectory_output.empty()) {
    dump.open(config.trajectory_output);
    if (!dump) {
      log << "error: cannot open " << config.trajectory_output << '\n';
      return 2;
    }
    dump << "level,tau,n,i,t,checksum\n";
  }
  csv << metadata(config) << csv_header() << '\n' << std::flush;

  std::vector<StudyRow> rows;
  int status = 0;
  try {
    for (const int level : config.levels) {
      for (const double tau : config.taus) {
        log << "level " << level << " tau " << sci(tau) << " ..." << std::flush;
        rows.push_back(run_point(config, level, tau, dump.is_open() ? &dump : nullptr));
        csv << csv_row(rows.back()) << '\n' << std::flush;
        log << " S-norm " << sci(rows.back().err_Snorm) << '\n';
      }
    }
  } catch (const StepFailure& e) {
    log << "\nerror: slab " << e.slab() << ": " << e.what() << '\n';
    status = 3;
  }
  std::ofstream(eoc_path(config.output)) << metadata(config) << eoc_report(rows);
  return status;
}

int study_main(int argc, const char* const* argv) {
  StudyConfig config;
  try {
    config = parse_config(argc, argv);
  } catch (const UsageError& e) {
    if (e.help()) {
      std::cout << e.what();
      return 0;
    }
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }
  return run_study(config, std::cerr);
}

}  // namespace lpsdg
