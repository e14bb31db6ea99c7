// grassmpc: data generation, subspace design and closed-loop benchmark.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 infeasible design, 5 invariant failure.

#include "grassmpc/errors.hpp"
#include "grassmpc/experiment.hpp"
#include "grassmpc/io.hpp"
#include "grassmpc/selftest.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace grassmpc;
using io::Json;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kInfeasibleDesign = 4, kInvariant = 5 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

ExperimentConfig load(const Options& opt) {
  ExperimentConfig cfg = load_config(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  fs::create_directories(opt.out);
  return cfg;
}

fs::path out_path(const Options& opt, const char* name) { return fs::path(opt.out) / name; }

Json grassmann_json(const Matrix& U, double violation, double objective) {
  return {{"U", io::to_json(U)}, {"r", U.cols()}, {"d", U.rows()},
          {"max_violation", violation}, {"objective", objective}};
}

int design_explicit(const ExperimentConfig& cfg, const Options& opt) {
  const ExplicitDesign& ex = *cfg.explicit_design;
  if (cfg.mode == DesignMode::Euclidean) {
    const Matrix U0 = ex.initial ? *ex.initial : pca_subspace(ex.problem.deltas, ex.problem.r);
    const auto res = design_subspace_euclidean(ex.problem, U0, cfg.euclidean_iterations);
    io::write_json(out_path(opt, "design.json"),
                   {{"mode", "euclidean"},
                    {"feasible", res.feasible},
                    {"infeasible_iteration", res.infeasible_iteration},
                    {"iterations", res.iterations},
                    {"converged", res.converged},
                    {"U", io::to_json(res.U)}});
    if (res.infeasible_iteration >= 0) {
      std::cout << "euclidean alternation infeasible at iteration " << res.infeasible_iteration
                << '\n';
      return kInfeasibleDesign;
    }
    std::cout << "euclidean alternation feasible after " << res.iterations << " iterations\n";
    return kOk;
  }
  RiemannianDesignConfig alm = cfg.alm;
  if (ex.initial) alm.initial = *ex.initial;
  const auto res = design_subspace_riemannian(ex.problem, alm);
  Json witnesses = Json::array();
  for (const auto& c : ex.problem.centers) witnesses.push_back(io::to_json(Vector(res.U.transpose() * c)));
  Json out = grassmann_json(res.U, res.max_violation, res.objective);
  out["mode"] = "riemannian";
  out["certificate"] = {{"witnesses", witnesses}};
  io::write_json(out_path(opt, "design.json"), out);
  std::cout << "riemannian design feasible, max violation " << res.max_violation << '\n';
  return kOk;
}

int cmd_generate(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const Study study = build_study(cfg);
  const DataSet data = generate_dataset(study.problem, study.initial_vertices, cfg.L, cfg.seed);
  io::write_dataset(out_path(opt, "dataset.csv"), out_path(opt, "dataset.json"), data);
  io::write_json(out_path(opt, "initial_set.json"),
                 {{"vertices", io::to_json(study.initial_vertices)},
                  {"polytope", io::to_json(hull_polytope_2d(study.initial_vertices))}});
  std::cout << "wrote " << data.size() << " samples to " << out_path(opt, "dataset.csv").string() << '\n';
  return kOk;
}

int cmd_design(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  if (cfg.explicit_design) return design_explicit(cfg, opt);
  const Study study = build_study(cfg);
  const DataSet data = io::read_dataset(out_path(opt, "dataset.csv"), out_path(opt, "dataset.json"));
  if (data.X.rows() != study.problem.n() || data.Z.rows() != study.problem.d())
    throw ConfigError("dataset dimensions do not match the config");
  for (int i = 0; i < data.size(); ++i) {
    if (!study.problem.admissible.contains(data.X.col(i), data.Z.col(i), cfg.admissibility_tol)) {
      std::cerr << "dataset row " << i << " fails the admissibility check\n";
      return kInvariant;
    }
  }
  SubspacePair pair;
  if (cfg.mode == DesignMode::Euclidean) {
    const OffsetFit off = fit_offset(data);
    const DesignProblem prob =
        make_design_problem(study.problem.admissible, off, study.initial_vertices,
                            data.shifted(off.Gamma, off.xi), cfg.r, cfg.center);
    const auto res = design_subspace_euclidean(prob, pca_subspace(prob.deltas, cfg.r),
                                               cfg.euclidean_iterations);
    if (res.infeasible_iteration >= 0) {
      std::cout << "euclidean alternation infeasible at iteration " << res.infeasible_iteration
                << '\n';
      return kInfeasibleDesign;
    }
    pair = {res.U, off.Gamma, off.xi};
  } else {
    const DesignOutcome outcome = design_from_data(study, data);
    pair = outcome.pair;
    std::cout << "design objective " << outcome.result.objective << ", max violation "
              << outcome.result.max_violation << ", " << outcome.result.outer_iterations
              << " outer iterations\n";
  }
  const auto cert =
      check_initial_admissibility(study.problem.admissible, pair, study.initial_vertices);
  io::write_json(out_path(opt, "subspace.json"), io::subspace_to_json(pair, cert));
  if (!cert.admissible) {
    std::cerr << "subspace is not initially admissible at vertex " << cert.violated_vertex << '\n';
    return kInvariant;
  }
  std::cout << "certificate: witnesses for all " << cert.witnesses.size() << " vertices\n";
  return kOk;
}

int cmd_benchmark(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const Study study = build_study(cfg);
  const Json sub = io::read_json(out_path(opt, "subspace.json"));
  const SubspacePair pair = io::subspace_from_json(sub);
  validate_pair(pair, study.problem.d(), study.problem.n());
  if (!check_initial_admissibility(study.problem.admissible, pair, study.initial_vertices)
           .admissible) {
    std::cerr << "subspace certificate is not valid for this config\n";
    return kInvariant;
  }
  const BenchmarkReport report = run_benchmark(study, pair);

  std::ofstream grid(out_path(opt, "grid.csv"));
  grid << "x0,x1,skipped,converged,epsilon,reduced_cost,full_cost,initial_value,steps,"
          "lyapunov_violations,feasibility_violations,cost_bound_ok\n";
  for (const auto& p : report.points) {
    grid << io::format_double(p.x(0)) << ',' << io::format_double(p.x(1)) << ',' << p.skipped
         << ',' << p.converged << ',' << io::format_double(p.epsilon) << ','
         << io::format_double(p.reduced_cost) << ',' << io::format_double(p.full_cost) << ','
         << io::format_double(p.initial_value) << ',' << p.steps << ',' << p.lyapunov_violations
         << ',' << p.feasibility_violations << ',' << p.cost_bound_ok << '\n';
  }
  io::write_json(out_path(opt, "report.json"),
                 {{"mean_epsilon", report.mean_epsilon},
                  {"std_epsilon", report.std_epsilon},
                  {"max_epsilon", report.max_epsilon},
                  {"evaluated", report.evaluated},
                  {"skipped", report.skipped},
                  {"not_converged", report.not_converged},
                  {"total_steps", report.total_steps},
                  {"lyapunov_violations", report.lyapunov_violations},
                  {"feasibility_violations", report.feasibility_violations},
                  {"cost_bound_violations", report.cost_bound_violations},
                  {"invariants_ok", report.invariants_ok()}});
  std::cout << "grid points " << report.evaluated << " (skipped " << report.skipped
            << "), mean epsilon " << 100 * report.mean_epsilon << "%, std "
            << 100 * report.std_epsilon << "%, max " << 100 * report.max_epsilon << "%\n"
            << "lyapunov violations " << report.lyapunov_violations << ", feasibility violations "
            << report.feasibility_violations << ", cost bound violations "
            << report.cost_bound_violations << ", not converged " << report.not_converged << '\n';
  return report.invariants_ok() ? kOk : kInvariant;
}

int cmd_selftest(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const Study study = build_study(cfg);
  const auto checks = run_selftest(study, cfg.seed, std::cout);
  int failed = 0;
  for (const auto& c : checks) failed += !c.passed;
  std::cout << checks.size() - failed << '/' << checks.size() << " checks passed\n";
  return failed ? kInvariant : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-order MPC subspace design and benchmark"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON experiment config")->required();
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
  };
  auto* gen = app.add_subcommand("generate", "sample the data set");
  auto* des = app.add_subcommand("design", "design the subspace from the data set");
  auto* ben = app.add_subcommand("benchmark", "compare reduced and full-order closed loops");
  auto* sel = app.add_subcommand("selftest", "run the invariant suite");
  for (auto* sub : {gen, des, ben, sel}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) return cmd_generate(opt);
    if (*des) return cmd_design(opt);
    if (*ben) return cmd_benchmark(opt);
    return cmd_selftest(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InfeasibleDesign& e) {
    std::cerr << "infeasible design: " << e.what() << " (worst set " << e.worst_set()
              << ", violation " << e.violation() << ")\n";
    return kInfeasibleDesign;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }
}
