#include "cluslasso/cli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "cluslasso/data.hpp"
#include "cluslasso/first_order.hpp"
#include "cluslasso/kernels.hpp"
#include "cluslasso/pssnal.hpp"
#include "cluslasso/ssnal.hpp"
#include "json.hpp"

namespace cluslasso {

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// Where the problem comes from.
struct Source {
  std::string input;
  int scenario = 0;
  int k = 1;
  std::uint64_t seed = 0;
  Index m_override = 0;
  CLI::Option* input_opt = nullptr;
  CLI::Option* scenario_opt = nullptr;

  void add_to(CLI::App& app) {
    input_opt = app.add_option("--input", input, "LIBSVM file");
    scenario_opt = app.add_option("--scenario", scenario, "synthetic scenario 1..7")->check(CLI::Range(1, 7));
    app.add_option("--k", k, "replication factor")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--m-override", m_override, "total rows for synthetic data")->check(CLI::NonNegativeNumber);
    input_opt->excludes(scenario_opt);
  }
};

struct Loaded {
  std::string instance;
  ProblemData data;
  std::optional<SyntheticProblem> synthetic;
};

Loaded load(const Source& src) {
  if (src.input_opt->count() == 0 && src.scenario_opt->count() == 0) {
    throw UsageError("one of --input or --scenario is required");
  }
  Loaded l;
  if (src.input_opt->count() > 0) {
    LabeledMatrix lm = read_libsvm(src.input);
    l.instance = src.input;
    l.data = ProblemData(densify_if_full(std::move(lm.A)), std::move(lm.b), Penalties{});
  } else {
    ScenarioSpec spec{src.scenario, src.k, src.seed, 0.8, src.m_override};
    l.synthetic = generate_scenario(spec);
    l.data = l.synthetic->data;
    l.instance = "scenario" + std::to_string(src.scenario) + "_k" + std::to_string(src.k) + "_s" +
                 std::to_string(src.seed);
  }
  return l;
}

// Parses args with `app`; returns an exit code when parsing should stop the command.
std::optional<int> parse(CLI::App& app, std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }
  return std::nullopt;
}

RunRecord make_record(const std::string& instance, const std::string& solver, const ProblemData& data,
                      const Solution& sol, std::optional<double> pobj_ref) {
  RunRecord r;
  r.instance = instance;
  r.solver = solver;
  r.m = data.m();
  r.n = data.n();
  r.pen = data.pen;
  r.metrics.pobj = sol.pobj;
  r.metrics.dobj = sol.dobj;
  r.metrics.eta_gap = sol.eta_gap;
  r.metrics.eta_D = sol.eta_D;
  r.metrics.eta_kkt = sol.eta_kkt;
  if (pobj_ref) r.metrics.eta_rel = eta_rel(sol.pobj, *pobj_ref);
  r.metrics.nnz = nnz(sol.x);
  r.metrics.gnnz = gnnz(sol.x);
  r.iterations = sol.outer_iters;
  r.newton_iters = sol.total_newton_iters;
  r.wall_ms = 1e3 * sol.wall_time;
  r.status = sol.status;
  r.train_mse = (data.A.matvec(sol.x) - data.b).squaredNorm() / double(data.m());
  return r;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + "\"";
}

}  // namespace

// ---- records

std::string to_json(const RunRecord& r) {
  nlohmann::json j;
  j["instance"] = r.instance;
  j["solver"] = r.solver;
  j["m"] = r.m;
  j["n"] = r.n;
  j["alpha1"] = r.alpha1 ? nlohmann::json(*r.alpha1) : nlohmann::json(nullptr);
  j["alpha2"] = r.alpha2 ? nlohmann::json(*r.alpha2) : nlohmann::json(nullptr);
  j["beta"] = r.pen.beta;
  j["rho"] = r.pen.rho;
  j["pobj"] = r.metrics.pobj;
  j["dobj"] = r.metrics.dobj;
  j["eta_gap"] = r.metrics.eta_gap;
  j["eta_D"] = r.metrics.eta_D;
  j["eta_kkt"] = r.metrics.eta_kkt;
  j["eta_rel"] = r.metrics.eta_rel ? nlohmann::json(*r.metrics.eta_rel) : nlohmann::json(nullptr);
  j["nnz"] = r.metrics.nnz;
  j["gnnz"] = r.metrics.gnnz;
  j["iterations"] = r.iterations;
  j["newton_iters"] = r.newton_iters;
  j["wall_ms"] = r.wall_ms;
  j["status"] = to_string(r.status);
  j["train_mse"] = r.train_mse;
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump(2);
}

std::string csv_header() {
  return "instance,solver,m,n,alpha1,alpha2,beta,rho,pobj,dobj,eta_gap,eta_D,eta_kkt,eta_rel,nnz,gnnz,"
         "iterations,newton_iters,wall_ms,status,train_mse,error";
}

std::string to_csv_row(const RunRecord& r) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  std::ostringstream s;
  s << csv_escape(r.instance) << ',' << r.solver << ',' << r.m << ',' << r.n << ',' << opt(r.alpha1) << ','
    << opt(r.alpha2) << ',' << fmt(r.pen.beta) << ',' << fmt(r.pen.rho) << ',' << fmt(r.metrics.pobj) << ','
    << fmt(r.metrics.dobj) << ',' << fmt(r.metrics.eta_gap) << ',' << fmt(r.metrics.eta_D) << ','
    << fmt(r.metrics.eta_kkt) << ',' << opt(r.metrics.eta_rel) << ',' << r.metrics.nnz << ',' << r.metrics.gnnz
    << ',' << r.iterations << ',' << r.newton_iters << ',' << fmt(r.wall_ms) << ',' << to_string(r.status) << ','
    << fmt(r.train_mse) << ',' << csv_escape(r.error);
  return s.str();
}

void write_vector_bin(const std::string& path, const Vec& v) {
  static_assert(std::endian::native == std::endian::little, "binary vectors assume a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  const auto len = static_cast<std::uint64_t>(v.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(sizeof(double) * len));
  if (!out) throw IoError("write failed for '" + path + "'");
}

Vec read_vector_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in) throw IoError("truncated header in '" + path + "'");
  Vec v(static_cast<Index>(len));
  in.read(reinterpret_cast<char*>(v.data()), std::streamsize(sizeof(double) * len));
  if (!in) throw IoError("truncated data in '" + path + "'");
  return v;
}

// ---- solvers

const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names{"ssnal-d", "ssnal-p", "admm-d", "admm-p", "iadmm", "ladmm", "apg", "auto"};
  return names;
}

std::string resolve_solver(const std::string& name, const ProblemData& data) {
  if (name != "auto") return name;
  return data.m() <= data.n() ? "ssnal-d" : "ssnal-p";
}

Solution run_solver(const std::string& requested, const ProblemData& data, const SolverLimits& limits) {
  const std::string name = resolve_solver(requested, data);
  if (name == "ssnal-d" || name == "ssnal-p") {
    SolverConfig cfg;
    cfg.tol = limits.tol;
    cfg.max_time = limits.max_time;
    if (limits.max_iters) cfg.max_outer = *limits.max_iters;
    return name == "ssnal-d" ? solve(data, cfg) : solve_primal(data, cfg);
  }
  FirstOrderConfig fc;
  fc.tol = limits.tol;
  fc.max_time = limits.max_time;
  fc.pobj_ref = limits.pobj_ref;
  if (limits.max_iters) fc.max_iters = *limits.max_iters;
  if (name == "admm-d") return d_admm_solve(data, fc);
  if (name == "iadmm") {
    fc.variant = AdmmVariant::Inexact;
    return d_admm_solve(data, fc);
  }
  if (name == "ladmm") {
    fc.variant = AdmmVariant::Linearized;
    return d_admm_solve(data, fc);
  }
  if (name == "admm-p") return p_admm_solve(data, fc);
  if (name == "apg") return apg_solve(data, fc);
  throw std::invalid_argument("unknown solver '" + requested + "'");
}

// ---- subcommands

int cmd_solve(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solve one clustered lasso problem", "cluslasso solve"};
  Source src;
  src.add_to(app);
  double alpha1 = 0, alpha2 = 0, beta = 0, rho = 0;
  auto* a1 = app.add_option("--alpha1", alpha1, "beta = alpha1 * ||A^T b||_inf");
  auto* a2 = app.add_option("--alpha2", alpha2, "rho = alpha2 * beta");
  auto* bo = app.add_option("--beta", beta, "l1 weight")->check(CLI::NonNegativeNumber);
  auto* ro = app.add_option("--rho", rho, "pairwise weight (default 0 with --beta)")->check(CLI::NonNegativeNumber);
  a1->excludes(bo)->needs(a2);
  a2->needs(a1);
  ro->needs(bo);
  std::string solver = "auto";
  app.add_option("--solver", solver)->check(CLI::IsMember(solver_names()));
  SolverLimits limits;
  app.add_option("--tol", limits.tol)->check(CLI::PositiveNumber);
  app.add_option("--max-time", limits.max_time, "seconds")->check(CLI::PositiveNumber);
  int max_iters = 0;
  auto* mi = app.add_option("--max-iters", max_iters)->check(CLI::PositiveNumber);
  std::string out_path;
  app.add_option("--out", out_path, "record path, .json or .csv; the solution goes to <out>.x.bin");
  if (auto code = parse(app, args, out, err)) return *code;
  if (mi->count()) limits.max_iters = max_iters;

  try {
    if (a1->count() == 0 && bo->count() == 0) throw UsageError("give --alpha1/--alpha2 or --beta [--rho]");
    Loaded l = load(src);
    if (a1->count()) {
      l.data.pen = penalties_from_alphas(alpha1, alpha2, l.data.A, l.data.b);
    } else {
      l.data.pen = {beta, rho};
    }
    const std::string name = resolve_solver(solver, l.data);
    const Solution sol = run_solver(name, l.data, limits);
    RunRecord rec = make_record(l.instance, name, l.data, sol, std::nullopt);
    if (a1->count()) {
      rec.alpha1 = alpha1;
      rec.alpha2 = alpha2;
    }
    if (out_path.empty()) {
      out << to_json(rec) << '\n';
    } else {
      std::ofstream f(out_path);
      if (!f) throw IoError("cannot write '" + out_path + "'");
      const bool csv = out_path.size() >= 4 && out_path.compare(out_path.size() - 4, 4, ".csv") == 0;
      if (csv) {
        f << csv_header() << '\n' << to_csv_row(rec) << '\n';
      } else {
        f << to_json(rec) << '\n';
      }
      write_vector_bin(out_path + ".x.bin", sol.x);
      out << rec.solver << ": " << to_string(rec.status) << ", pobj " << fmt(rec.metrics.pobj) << ", eta_kkt "
          << rec.metrics.eta_kkt << ", gnnz " << rec.metrics.gnnz << '\n';
    }
    return sol.status == Status::Converged ? 0 : 1;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_bench(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compare solvers over a penalty grid", "cluslasso bench"};
  Source src;
  src.add_to(app);
  std::vector<std::string> solvers{"admm-d", "admm-p", "apg"};
  app.add_option("--solvers", solvers, "comma-separated solver list")->delimiter(',');
  std::vector<std::string> alphas{"1e-3:1e-2"};
  app.add_option("--alphas", alphas, "comma-separated alpha1:alpha2 pairs")->delimiter(',');
  std::string ref_solver = "ssnal-d";
  app.add_option("--ref-solver", ref_solver)->check(CLI::IsMember(solver_names()));
  double tol = 1e-6;
  double rel_tol = 1e-4;
  double max_time = 3.0 * 3600.0;
  int max_iters = 0;
  app.add_option("--tol", tol, "eta_kkt tolerance for SSNAL runs")->check(CLI::PositiveNumber);
  app.add_option("--rel-tol", rel_tol, "eta_rel tolerance for first-order runs")->check(CLI::PositiveNumber);
  app.add_option("--max-time", max_time)->check(CLI::PositiveNumber);
  auto* mi = app.add_option("--max-iters", max_iters)->check(CLI::PositiveNumber);
  std::string out_path;
  std::string profile_path;
  app.add_option("--out", out_path, "CSV of run records (stdout if omitted)");
  app.add_option("--profile", profile_path, "performance-profile CSV (default <out>.profile.csv)");
  if (auto code = parse(app, args, out, err)) return *code;

  std::vector<std::pair<double, double>> grid;
  try {
    for (const std::string& a : alphas) {
      const auto colon = a.find(':');
      if (colon == std::string::npos) throw UsageError("bad --alphas entry '" + a + "' (want a1:a2)");
      grid.emplace_back(std::stod(a.substr(0, colon)), std::stod(a.substr(colon + 1)));
    }
    for (const std::string& s : solvers) {
      if (std::find(solver_names().begin(), solver_names().end(), s) == solver_names().end()) {
        throw UsageError("unknown solver '" + s + "'");
      }
    }
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  Loaded l;
  try {
    l = load(src);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  struct Row {
    std::size_t cell;
    bool ref;
    RunRecord rec;
  };
  std::vector<Row> rows;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto [alpha1, alpha2] = grid[c];
    ProblemData data = l.data;
    auto run = [&](const std::string& name, SolverLimits lim, std::optional<double> ref) {
      if (mi->count()) lim.max_iters = max_iters;
      RunRecord rec;
      try {
        const std::string resolved = resolve_solver(name, data);
        const Solution sol = run_solver(resolved, data, lim);
        rec = make_record(l.instance, resolved, data, sol, ref);
      } catch (const std::exception& e) {
        rec.instance = l.instance;
        rec.solver = name;
        rec.m = data.m();
        rec.n = data.n();
        rec.pen = data.pen;
        rec.error = e.what();
      }
      rec.alpha1 = alpha1;
      rec.alpha2 = alpha2;
      return rec;
    };
    try {
      data.pen = penalties_from_alphas(alpha1, alpha2, data.A, data.b);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 2;
    }
    RunRecord ref = run(ref_solver, {tol, max_time, std::nullopt, std::nullopt}, std::nullopt);
    std::optional<double> pobj_ref;
    if (ref.error.empty() && ref.status == Status::Converged) pobj_ref = ref.metrics.pobj;
    if (pobj_ref) ref.metrics.eta_rel = 0.0;
    rows.push_back({c, true, ref});
    for (const std::string& s : solvers) {
      const std::string resolved = resolve_solver(s, data);
      const bool second_order = resolved == "ssnal-d" || resolved == "ssnal-p";
      SolverLimits lim{second_order ? tol : rel_tol, max_time, std::nullopt, second_order ? std::nullopt : pobj_ref};
      rows.push_back({c, false, run(s, lim, pobj_ref)});
    }
  }

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.cell != b.cell) return a.cell < b.cell;
    if (a.ref != b.ref) return a.ref;
    return a.rec.solver < b.rec.solver;
  });

  // Largest |eta_rel| between any two converged runs of the same cell.
  std::map<std::size_t, double> agreement;
  for (const Row& a : rows) {
    for (const Row& b : rows) {
      if (a.cell != b.cell || &a == &b) continue;
      if (!a.rec.error.empty() || !b.rec.error.empty()) continue;
      if (a.rec.status != Status::Converged || b.rec.status != Status::Converged) continue;
      double& worst = agreement[a.cell];
      worst = std::max(worst, std::abs(eta_rel(a.rec.metrics.pobj, b.rec.metrics.pobj)));
    }
  }

  std::ostringstream table;
  table << csv_header() << ",role,max_pair_eta_rel\n";
  for (const Row& r : rows) {
    const auto it = agreement.find(r.cell);
    table << to_csv_row(r.rec) << ',' << (r.ref ? "reference" : "cell") << ','
          << (it == agreement.end() ? std::string() : fmt(it->second)) << '\n';
  }
  std::ostringstream profile;
  profile << "solver,instance,time_ms,success\n";
  for (const Row& r : rows) {
    const bool ok = r.rec.error.empty() && r.rec.status == Status::Converged;
    profile << r.rec.solver << ',' << csv_escape(r.rec.instance + "|" + fmt(*r.rec.alpha1) + ":" + fmt(*r.rec.alpha2))
            << ',' << fmt(r.rec.wall_ms) << ',' << (ok ? 1 : 0) << '\n';
  }

  try {
    if (out_path.empty()) {
      out << table.str();
    } else {
      std::ofstream f(out_path);
      if (!f) throw IoError("cannot write '" + out_path + "'");
      f << table.str();
      if (profile_path.empty()) profile_path = out_path + ".profile.csv";
    }
    if (!profile_path.empty()) {
      std::ofstream f(profile_path);
      if (!f) throw IoError("cannot write '" + profile_path + "'");
      f << profile.str();
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int cmd_gen(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generate a synthetic scenario as LIBSVM files", "cluslasso gen"};
  ScenarioSpec spec;
  std::string prefix;
  app.add_option("--scenario", spec.id)->required()->check(CLI::Range(1, 7));
  app.add_option("--k", spec.k)->check(CLI::PositiveNumber);
  app.add_option("--seed", spec.seed);
  app.add_option("--m-override", spec.m_override, "total rows")->check(CLI::NonNegativeNumber);
  app.add_option("--out-prefix", prefix)->required();
  if (auto code = parse(app, args, out, err)) return *code;
  try {
    const SyntheticProblem p = generate_scenario(spec);
    write_libsvm(prefix + ".train.libsvm", p.data.A, p.data.b);
    if (p.b_test.size() > 0) write_libsvm(prefix + ".test.libsvm", p.a_test, p.b_test);
    write_sidecar(prefix + ".json", p);
    out << "wrote " << p.data.m() << " train / " << p.b_test.size() << " test rows, n = " << p.x_true.size() << '\n';
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (const char* env = std::getenv("CLUSLASSO_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) kernels::set_threads(n);
  }
  const std::string usage =
      "usage: cluslasso <solve|bench|gen> [options]\n"
      "       cluslasso <command> --help\n";
  if (argc < 2) {
    err << usage;
    return 2;
  }
  const std::string cmd = argv[1];
  const std::vector<std::string> rest(argv + 2, argv + argc);
  if (cmd == "solve") return cmd_solve(rest, out, err);
  if (cmd == "bench") return cmd_bench(rest, out, err);
  if (cmd == "gen") return cmd_gen(rest, out, err);
  if (cmd == "-h" || cmd == "--help") {
    out << usage;
    return 0;
  }
  err << "unknown command '" << cmd << "'\n" << usage;
  return 2;
}

}  // namespace cluslasso
