#include "cli.hpp"

#include <crrn/baselines.hpp>
#include <crrn/cubic.hpp>
#include <crrn/matrix_io.hpp>
#include <crrn/objective.hpp>
#include <crrn/parallel.hpp>
#include <crrn/solver.hpp>
#include <crrn/trace.hpp>
#include <crrn/verify.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace crrn::cli {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------- problems

struct ProblemArgs {
  std::string manifold;
  std::string problem = "maxcut";
  std::string matrix;
  std::uint64_t instance_seed = 1;
};

void add_problem_options(CLI::App *cmd, ProblemArgs &p, bool manifold_required) {
  auto *opt = cmd->add_option("--manifold", p.manifold,
                              "sphere:<n>, stiefel:<n>,<r> or product:<count>x<block>");
  if (manifold_required)
    opt->required();
  cmd->add_option("--problem", p.problem,
                  "maxcut | moc (maximize <A,UU^T>), pca (minimize), file:<path> "
                  "(minimize with A read from path)")
      ->capture_default_str();
  cmd->add_option("--matrix", p.matrix,
                  "MatrixMarket or raw binary matrix; GOE(rows) is sampled when absent");
  cmd->add_option("--instance-seed", p.instance_seed, "seed of the sampled GOE instance")
      ->capture_default_str();
}

ManifoldDescriptor parse_manifold(const std::string &text) {
  try {
    return ManifoldDescriptor::parse(text);
  } catch (const ParseError &e) {
    throw UsageError(e.what());
  }
}

ObjectiveHandle build_problem(const ProblemArgs &p, const ManifoldDescriptor &m) {
  std::string path = p.matrix;
  Sense sense;
  std::string name = p.problem;
  if (p.problem == "maxcut" || p.problem == "moc") {
    sense = Sense::Maximize;
  } else if (p.problem == "pca") {
    sense = Sense::Minimize;
  } else if (p.problem.rfind("file:", 0) == 0) {
    sense = Sense::Minimize;
    path = p.problem.substr(5);
    name = "file";
    if (path.empty())
      throw UsageError("--problem file:<path> needs a path");
  } else {
    throw UsageError("unknown problem '" + p.problem + "'");
  }
  const Matrix a = path.empty() ? sample_goe(m.ambient_rows(), p.instance_seed)
                                : load_matrix(path);
  if (a.rows() != m.ambient_rows())
    throw UsageError("matrix has " + std::to_string(a.rows()) + " rows, manifold " +
                     m.to_string() + " needs " + std::to_string(m.ambient_rows()));
  return make_quadratic_problem(a, sense, name);
}

Retraction parse_retraction(const std::string &s) {
  if (s == "polar")
    return Retraction::Polar;
  if (s == "qr")
    return Retraction::QR;
  if (s == "normalize")
    return Retraction::Normalize;
  throw UsageError("unknown retraction '" + s + "'");
}

// --------------------------------------------------------------- constants

struct ConstantArgs {
  std::string sigma = "auto";
  std::string mode = "analytic";
  std::optional<double> k_B;
  double margin = 0.01;
  std::uint64_t seed = 0;
};

void add_constant_options(CLI::App *cmd, ConstantArgs &c) {
  cmd->add_option("--sigma", c.sigma, "auto (regularization rule) or a positive value")
      ->capture_default_str();
  cmd->add_option("--constants", c.mode, "analytic | sampled")->capture_default_str();
  cmd->add_option("--k-b", c.k_B, "override the Hessian-norm bound k_B");
  cmd->add_option("--sigma-margin", c.margin, "relative margin above the sigma lower bound")
      ->capture_default_str();
  cmd->add_option("--constants-seed", c.seed, "seed for sampled constants")
      ->capture_default_str();
}

ConstantSet build_constants(const ConstantArgs &c, const ObjectiveHandle &obj,
                            const ManifoldDescriptor &m) {
  ConstantsOptions o;
  if (c.mode == "analytic")
    o.mode = ConstantsMode::Analytic;
  else if (c.mode == "sampled")
    o.mode = ConstantsMode::Sampled;
  else
    throw UsageError("unknown constants mode '" + c.mode + "'");
  o.k_B_override = c.k_B;
  o.sigma_margin = c.margin;
  o.seed = c.seed;
  if (c.sigma != "auto") {
    double v;
    try {
      std::size_t used = 0;
      v = std::stod(c.sigma, &used);
      if (used != c.sigma.size())
        throw std::invalid_argument(c.sigma);
    } catch (const std::exception &) {
      throw UsageError("--sigma must be 'auto' or a number");
    }
    if (!(v > 0.0))
      throw UsageError("--sigma must be positive");
    o.sigma_override = v;
  }
  return compute_constants(obj, m, o);
}

json constant_json(const Constant &c) {
  return json{{"value", c.value}, {"provenance", to_string(c.provenance)}};
}

json constants_json(const ConstantSet &c, const ManifoldDescriptor &m) {
  json j;
  j["manifold"] = m.to_string();
  j["G"] = constant_json(c.G);
  j["ell_f"] = constant_json(c.ell_f);
  j["ell_H"] = constant_json(c.ell_H);
  j["k_B"] = constant_json(c.k_B);
  j["L1"] = constant_json(c.L1);
  j["L2"] = constant_json(c.L2);
  j["L_H"] = constant_json(c.L_H);
  j["C_g"] = constant_json(c.C_g);
  j["R"] = constant_json(c.R);
  j["sigma"] = constant_json(c.sigma);
  j["tau1"] = constant_json(c.tau1);
  j["tau2"] = constant_json(c.tau2);
  j["sigma_lower_bound"] = c.sigma_lower_bound;
  j["theory_compliant"] = c.theory_compliant;
  return j;
}

// ----------------------------------------------------------------- solving

struct AlgoArgs {
  std::string algo = "crrn";
  double epsilon = 1e-6;
  std::optional<Index> max_iters;
  std::string subsolver = "exact";
  double gd_c = 0.1;
  double gd_step = 0.0;
  Index gd_max_iters = 10000;
  std::string stop_rule = "early";
  std::optional<double> step_size;
  std::optional<double> grad_tol;
  Index dense_limit = 2000;
  std::string retraction = "polar";
  bool timings = false;
};

void add_algo_options(CLI::App *cmd, AlgoArgs &a, bool with_algo) {
  if (with_algo)
    cmd->add_option("--algo", a.algo, "crrn | rgd | rtr")->capture_default_str();
  cmd->add_option("--epsilon", a.epsilon, "target epsilon (crrn)")->capture_default_str();
  cmd->add_option("--max-iters", a.max_iters,
                  "outer iteration budget (default 1000; 10000 for rgd)");
  cmd->add_option("--subsolver", a.subsolver, "exact | gd")->capture_default_str();
  cmd->add_option("--gd-c", a.gd_c, "gradient subsolver stopping constant c")
      ->capture_default_str();
  cmd->add_option("--gd-step", a.gd_step, "gradient subsolver step (0 = default)")
      ->capture_default_str();
  cmd->add_option("--gd-max-iters", a.gd_max_iters, "gradient subsolver budget")
      ->capture_default_str();
  cmd->add_option("--stop-rule", a.stop_rule, "early | fixed")->capture_default_str();
  cmd->add_option("--step-size", a.step_size, "rgd step (default 1/(2 ell_f + 2 G L2))");
  cmd->add_option("--grad-tol", a.grad_tol, "baseline gradient tolerance (default epsilon)");
  cmd->add_option("--dense-limit", a.dense_limit,
                  "largest intrinsic dimension solved with dense coordinates")
      ->capture_default_str();
  cmd->add_option("--retraction", a.retraction, "polar | qr | normalize")
      ->capture_default_str();
  cmd->add_flag("--timings", a.timings, "record wall-clock times in the trace");
}

struct RunOutcome {
  std::string algo;
  std::vector<IterationRecord> records;
  Matrix x;
  StationarityReport report;
  bool met = false;
};

RunOutcome run_algorithm(const std::string &algo, const AlgoArgs &a,
                         const ObjectiveHandle &obj, const ManifoldDescriptor &m,
                         const ConstantSet &constants, std::uint64_t init_seed,
                         Execution exec) {
  const Point x0 = random_point(m, init_seed);
  const Retraction retraction = parse_retraction(a.retraction);
  const double grad_tol = a.grad_tol.value_or(a.epsilon);
  RunOutcome out;
  out.algo = algo;
  if (algo == "crrn") {
    SolverConfig cfg;
    cfg.constants = constants;
    cfg.epsilon = a.epsilon;
    cfg.max_iters = a.max_iters.value_or(1000);
    if (a.subsolver == "exact")
      cfg.subsolver = SubsolverKind::Exact;
    else if (a.subsolver == "gd")
      cfg.subsolver = SubsolverKind::GradientDescent;
    else
      throw UsageError("unknown subsolver '" + a.subsolver + "'");
    cfg.gd.c = a.gd_c;
    cfg.gd.step = a.gd_step;
    cfg.gd.max_iters = a.gd_max_iters;
    if (a.stop_rule == "early")
      cfg.stop_rule = StopRule::EarlySmallStep;
    else if (a.stop_rule == "fixed")
      cfg.stop_rule = StopRule::FixedT;
    else
      throw UsageError("unknown stop rule '" + a.stop_rule + "'");
    cfg.seed = init_seed;
    cfg.retraction = retraction;
    cfg.exec = exec;
    cfg.dense_limit = a.dense_limit;
    cfg.record_timings = a.timings;
    auto res = run(obj, x0, cfg);
    out.records = std::move(res.trace.records);
    out.x = std::move(res.x_out);
    out.report = res.certified;
    out.met = res.certified.second_order;
    return out;
  }
  SolveTrace t;
  if (algo == "rgd") {
    RgdConfig cfg;
    cfg.step_size = a.step_size.value_or(default_rgd_step(constants));
    cfg.max_iters = a.max_iters.value_or(10000);
    cfg.grad_tol = grad_tol;
    cfg.retraction = retraction;
    cfg.record_timings = a.timings;
    t = run_rgd(obj, x0, cfg);
  } else if (algo == "rtr") {
    RtrConfig cfg;
    cfg.max_iters = a.max_iters.value_or(1000);
    cfg.grad_tol = grad_tol;
    cfg.retraction = retraction;
    cfg.record_timings = a.timings;
    t = run_rtr(obj, x0, cfg);
  } else {
    throw UsageError("unknown algorithm '" + algo + "'");
  }
  out.records = std::move(t.records);
  out.x = std::move(t.x_final);
  out.report = certify_stationarity(obj, m, out.x, grad_tol, a.dense_limit);
  out.met = t.status == SolveStatus::Converged;
  return out;
}

std::string summary_line(const RunOutcome &r, const ObjectiveHandle &obj) {
  std::ostringstream s;
  s << "algo=" << r.algo << " iters=" << r.records.size()
    << " f=" << format_double(obj.eval_f(r.x)) << " grad=" << format_double(r.report.grad_norm)
    << " lmin=" << format_double(r.report.lambda_min)
    << " certified=" << (r.report.second_order ? "true" : "false");
  return s.str();
}

void write_file(const std::string &path, const std::string &content) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw IoError("cannot write " + path);
  f << content;
  if (!f)
    throw IoError("write failed: " + path);
}

// ------------------------------------------------------------------- bench

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Cubic-regularized Riemannian Newton solver and benchmarks", "crrn"};
  app.set_config("--config", "", "INI file; [section] names match subcommands");
  app.require_subcommand(1);
  app.fallthrough(); // lets --config follow the subcommand name

  // gen
  auto *gen = app.add_subcommand("gen", "Write a GOE instance as MatrixMarket");
  Index goe_n = 0;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  std::string gen_format = "mtx";
  gen->add_option("--goe", goe_n, "matrix size n")->required();
  gen->add_option("--seed", gen_seed, "instance seed")->capture_default_str();
  gen->add_option("-o,--output", gen_out, "output path")->required();
  gen->add_option("--format", gen_format, "mtx | bin")->capture_default_str();

  // solve
  auto *solve = app.add_subcommand("solve", "Run one algorithm and write its trace");
  ProblemArgs solve_problem;
  ConstantArgs solve_constants;
  AlgoArgs solve_algo;
  std::uint64_t solve_seed = 0;
  std::string solve_trace;
  std::string solve_format = "csv";
  add_problem_options(solve, solve_problem, true);
  add_constant_options(solve, solve_constants);
  add_algo_options(solve, solve_algo, true);
  solve->add_option("--seed", solve_seed, "initial point seed")->capture_default_str();
  solve->add_option("--trace", solve_trace, "trace output path");
  solve->add_option("--format", solve_format, "csv | jsonl")->capture_default_str();

  // bench
  auto *bench = app.add_subcommand("bench", "Compare algorithms over several initial points");
  ProblemArgs bench_problem;
  ConstantArgs bench_constants;
  AlgoArgs bench_algo;
  Index bench_n = 300;
  Index bench_d = 1;
  Index bench_k = 0;
  std::string bench_seeds = "1,2,3";
  std::string bench_algos = "crrn,rgd,rtr";
  std::string bench_out;
  std::optional<Index> iters_crrn, iters_rgd, iters_rtr;
  add_problem_options(bench, bench_problem, false);
  add_constant_options(bench, bench_constants);
  add_algo_options(bench, bench_algo, false);
  bench->add_option("--n", bench_n, "number of blocks")->capture_default_str();
  bench->add_option("--d", bench_d, "block width (1 = spheres)")->capture_default_str();
  bench->add_option("--k", bench_k, "rank (0 = ceil(sqrt(2 n d)))")->capture_default_str();
  bench->add_option("--seeds", bench_seeds, "comma-separated initial point seeds")
      ->capture_default_str();
  bench->add_option("--algos", bench_algos, "comma-separated algorithms")
      ->capture_default_str();
  bench->add_option("--crrn-iters", iters_crrn, "crrn budget");
  bench->add_option("--rgd-iters", iters_rgd, "rgd budget");
  bench->add_option("--rtr-iters", iters_rtr, "rtr budget");
  bench->add_option("-o,--output", bench_out, "combined CSV path")->required();

  // subsolve
  auto *sub = app.add_subcommand("subsolve", "Solve one cubic subproblem from files");
  std::string sub_g, sub_b, sub_solver = "exact";
  double sub_sigma = 1.0, sub_c = 0.1;
  sub->add_option("--g", sub_g, "gradient coordinates (n x 1 matrix file)")->required();
  sub->add_option("--B", sub_b, "symmetric Hessian coordinates (n x n)")->required();
  sub->add_option("--sigma", sub_sigma, "regularization")->required();
  sub->add_option("--solver", sub_solver, "exact | gd")->capture_default_str();
  sub->add_option("--gd-c", sub_c, "gd stopping constant")->capture_default_str();

  // constants
  auto *cons = app.add_subcommand("constants", "Print the constant set as JSON");
  ProblemArgs cons_problem;
  ConstantArgs cons_constants;
  add_problem_options(cons, cons_problem, true);
  add_constant_options(cons, cons_constants);

  // verify
  auto *ver = app.add_subcommand("verify", "Run numerical verification suites");
  std::vector<std::string> suites;
  ProblemArgs ver_problem;
  ver_problem.manifold = "stiefel:6,3";
  ver_problem.problem = "pca";
  Index ver_samples = 1000;
  std::uint64_t ver_seed = 0;
  std::string ver_retraction = "polar";
  ver->add_option("--suite", suites,
                  "lipschitz | cg | curve | projdiff | regularity | all (repeatable)")
      ->required();
  add_problem_options(ver, ver_problem, false);
  ver->add_option("--samples", ver_samples, "samples per suite")->capture_default_str();
  ver->add_option("--seed", ver_seed, "sampling seed")->capture_default_str();
  ver->add_option("--retraction", ver_retraction, "polar | qr | normalize")
      ->capture_default_str();

  std::vector<const char *> argv;
  argv.reserve(args.size());
  for (const auto &a : args)
    argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return kError;
  }

  try {
    if (gen->parsed()) {
      if (goe_n < 1)
        throw UsageError("--goe must be >= 1");
      const Matrix a = sample_goe(goe_n, gen_seed);
      if (gen_format == "mtx") {
        write_matrix_market(gen_out, a);
      } else if (gen_format == "bin") {
        std::ofstream f(gen_out, std::ios::binary);
        if (!f)
          throw IoError("cannot write " + gen_out);
        write_raw_binary(f, a);
      } else {
        throw UsageError("unknown format '" + gen_format + "'");
      }
      return kOk;
    }

    if (solve->parsed()) {
      const auto m = parse_manifold(solve_problem.manifold);
      const auto obj = build_problem(solve_problem, m);
      if (solve_format != "csv" && solve_format != "jsonl")
        throw UsageError("unknown trace format '" + solve_format + "'");
      if (!(solve_algo.epsilon > 0.0))
        throw UsageError("--epsilon must be positive");
      const ConstantSet c = build_constants(solve_constants, obj, m);
      const RunOutcome r =
          run_algorithm(solve_algo.algo, solve_algo, obj, m, c, solve_seed, Execution::Parallel);
      if (!solve_trace.empty()) {
        std::ostringstream s;
        if (solve_format == "csv")
          write_trace_csv(s, r.records);
        else
          write_trace_jsonl(s, r.records, r.report);
        write_file(solve_trace, s.str());
      }
      out << summary_line(r, obj) << "\n";
      return r.met ? kOk : kNotMet;
    }

    if (bench->parsed()) {
      const auto seeds_text = split_list(bench_seeds);
      if (seeds_text.empty())
        throw UsageError("--seeds must list at least one seed");
      std::vector<std::uint64_t> seeds;
      for (const auto &s : seeds_text) {
        try {
          std::size_t used = 0;
          seeds.push_back(std::stoull(s, &used));
          if (used != s.size())
            throw std::invalid_argument(s);
        } catch (const std::exception &) {
          throw UsageError("invalid seed '" + s + "'");
        }
      }
      const auto algos = split_list(bench_algos);
      if (algos.empty())
        throw UsageError("--algos must list at least one algorithm");
      for (const auto &a : algos)
        if (a != "crrn" && a != "rgd" && a != "rtr")
          throw UsageError("unknown algorithm '" + a + "'");
      if (bench_problem.manifold.empty()) {
        if (bench_n < 1 || bench_d < 1)
          throw UsageError("--n and --d must be >= 1");
        const Index k = bench_k > 0 ? bench_k
                                    : static_cast<Index>(std::ceil(
                                          std::sqrt(2.0 * static_cast<double>(bench_n * bench_d))));
        if (k < bench_d)
          throw UsageError("--k must be >= --d");
        bench_problem.manifold = "product:" + std::to_string(bench_n) + "x" +
                                 (bench_d == 1 ? "sphere:" + std::to_string(k)
                                               : "stiefel:" + std::to_string(k) + "," +
                                                     std::to_string(bench_d));
        if (bench_problem.problem == "maxcut" && bench_d > 1)
          bench_problem.problem = "moc";
      }
      const auto m = parse_manifold(bench_problem.manifold);
      const auto obj = build_problem(bench_problem, m);
      const ConstantSet c = build_constants(bench_constants, obj, m);

      struct Cell {
        std::string algo;
        std::uint64_t seed;
      };
      std::vector<Cell> cells;
      for (const auto &a : algos)
        for (auto s : seeds)
          cells.push_back({a, s});
      std::vector<std::optional<RunOutcome>> results(cells.size());
      std::vector<std::string> failures(cells.size());
      parallel_for(static_cast<Index>(cells.size()), [&](Index i) {
        const auto &cell = cells[static_cast<std::size_t>(i)];
        AlgoArgs a = bench_algo;
        if (cell.algo == "crrn" && iters_crrn)
          a.max_iters = iters_crrn;
        if (cell.algo == "rgd" && iters_rgd)
          a.max_iters = iters_rgd;
        if (cell.algo == "rtr" && iters_rtr)
          a.max_iters = iters_rtr;
        try {
          results[static_cast<std::size_t>(i)] =
              run_algorithm(cell.algo, a, obj, m, c, cell.seed, Execution::Serial);
        } catch (const std::exception &e) {
          failures[static_cast<std::size_t>(i)] = e.what();
        }
      });

      double best = std::numeric_limits<double>::infinity();
      for (const auto &r : results)
        if (r)
          for (const auto &rec : r->records)
            best = std::min(best, rec.f);
      std::ostringstream csv;
      csv << "algo,init," << kTraceHeader << ",f_minus_best,rel_subopt\n";
      bool all_met = true;
      std::string failure;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!results[i]) {
          failure = cells[i].algo + " init=" + std::to_string(cells[i].seed) + ": " + failures[i];
          break;
        }
        const auto &r = *results[i];
        all_met = all_met && r.met;
        std::ostringstream rows;
        write_trace_csv(rows, r.records);
        std::istringstream lines(rows.str());
        std::string line;
        std::getline(lines, line); // header
        std::size_t row = 0;
        while (std::getline(lines, line)) {
          const double f = r.records[row++].f;
          csv << r.algo << "," << cells[i].seed << "," << line << ","
              << format_double(f - best) << ","
              << format_double((f - best) / std::max(1.0, std::abs(best))) << "\n";
        }
        out << summary_line(r, obj) << " init=" << cells[i].seed << "\n";
      }
      if (!failure.empty())
        csv << "# incomplete: " << failure << "\n";
      write_file(bench_out, csv.str());
      if (!failure.empty()) {
        err << "error: bench aborted, " << failure << "\n";
        return kError;
      }
      return all_met ? kOk : kNotMet;
    }

    if (sub->parsed()) {
      const Matrix g = load_matrix(sub_g);
      const Matrix b = load_matrix(sub_b);
      if (g.cols() != 1)
        throw UsageError("--g must be a column vector");
      const auto sp = CubicSubproblem::dense(Vector(g.col(0)), b, sub_sigma);
      SubproblemSolution sol;
      if (sub_solver == "exact") {
        sol = solve_exact(sp);
      } else if (sub_solver == "gd") {
        GdOptions o;
        o.c = sub_c;
        sol = solve_gd(sp, sp.g.norm(), o);
      } else {
        throw UsageError("unknown solver '" + sub_solver + "'");
      }
      json j;
      j["xi"] = std::vector<double>(sol.xi.data(), sol.xi.data() + sol.xi.size());
      j["lambda_star"] = sol.lambda_star;
      j["model_decrease"] = sol.model_decrease;
      j["iterations"] = sol.iterations;
      j["hard_case"] = sol.hard_case;
      j["certificate"] = {{"stationarity", sol.certificate.stationarity},
                          {"multiplier", sol.certificate.multiplier},
                          {"curvature", sol.certificate.curvature},
                          {"passed", sol.certificate.all()}};
      out << j.dump() << "\n";
      return kOk;
    }

    if (cons->parsed()) {
      const auto m = parse_manifold(cons_problem.manifold);
      const auto obj = build_problem(cons_problem, m);
      out << constants_json(build_constants(cons_constants, obj, m), m).dump(2) << "\n";
      return kOk;
    }

    if (ver->parsed()) {
      std::vector<std::string> names;
      for (const auto &s : suites)
        for (const auto &n : split_list(s)) {
          if (n == "all") {
            for (const char *x : {"lipschitz", "cg", "curve", "projdiff", "regularity"})
              names.emplace_back(x);
          } else if (n == "lipschitz" || n == "cg" || n == "curve" || n == "projdiff" ||
                     n == "regularity") {
            names.push_back(n);
          } else {
            throw UsageError("unknown suite '" + n + "'");
          }
        }
      if (ver_samples < 1)
        throw UsageError("--samples must be >= 1");
      const auto m = parse_manifold(ver_problem.manifold);
      VerifyOptions o;
      o.samples = ver_samples;
      o.seed = ver_seed;
      o.scheme = parse_retraction(ver_retraction);
      std::optional<ObjectiveHandle> obj;
      auto objective = [&]() -> const ObjectiveHandle & {
        if (!obj)
          obj = build_problem(ver_problem, m);
        return *obj;
      };
      bool ok = true;
      for (const auto &n : names) {
        SampleReport r;
        if (n == "lipschitz")
          r = verify_pullback_lipschitz(objective(), m, o);
        else if (n == "cg")
          r = verify_cg_bound(objective(), m, o);
        else if (n == "curve")
          r = verify_curve(m, o);
        else if (n == "projdiff")
          r = verify_projection_difference(m, o);
        else
          r = verify_regularity(m, o);
        ok = ok && r.passed();
        out << r.to_json() << "\n";
      }
      return ok ? kOk : kNotMet;
    }
  } catch (const UsageError &e) {
    err << "usage error: " << e.what() << "\n";
    return kError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

} // namespace crrn::cli
