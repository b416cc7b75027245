#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cluslasso/metrics.hpp"
#include "cluslasso/solver.hpp"

namespace cluslasso {

// One solver run on one (problem, penalty) pair.
struct RunRecord {
  std::string instance;
  std::string solver;
  Index m = 0;
  Index n = 0;
  std::optional<double> alpha1;
  std::optional<double> alpha2;
  Penalties pen;
  MetricsReport metrics;
  int iterations = 0;
  int newton_iters = 0;
  double wall_ms = 0.0;
  Status status = Status::MaxIters;
  double train_mse = 0.0;
  std::string error;  // non-empty when the run threw
};

std::string to_json(const RunRecord& r);
std::string csv_header();
std::string to_csv_row(const RunRecord& r);

// 8-byte little-endian length, then little-endian doubles.
void write_vector_bin(const std::string& path, const Vec& v);
Vec read_vector_bin(const std::string& path);

struct SolverLimits {
  double tol = 1e-6;
  double max_time = 3.0 * 3600.0;
  std::optional<int> max_iters;  // default: 100 outer for SSNAL, 20000 otherwise
  std::optional<double> pobj_ref;  // first-order solvers stop on eta_rel when set
};

// Names: ssnal-d, ssnal-p, admm-d, admm-p, iadmm, ladmm, apg, auto.
const std::vector<std::string>& solver_names();
std::string resolve_solver(const std::string& name, const ProblemData& data);
Solution run_solver(const std::string& name, const ProblemData& data, const SolverLimits& limits);

// Subcommands; args exclude the program and subcommand names. Exit codes:
// 0 success, 1 solver failure or non-convergence, 2 bad arguments.
int cmd_solve(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_bench(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_gen(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cluslasso
