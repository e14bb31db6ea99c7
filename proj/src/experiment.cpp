#include "grassmpc/experiment.hpp"

#include "grassmpc/errors.hpp"
#include "grassmpc/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace grassmpc {

ExperimentConfig pendulum_config() {
  ExperimentConfig cfg;
  Matrix Ac(2, 2);
  Ac << 0, 1, 1, 0;
  Matrix Bc(2, 1);
  Bc << 0, 1;
  const DiscreteModel dm = discretize_zoh(Ac, Bc, 0.1);
  cfg.sys = {dm.A, dm.B, Matrix::Identity(2, 2), Matrix::Constant(1, 1, 0.1)};
  cfg.x_lower = Vector{{-1.0, -0.35}};
  cfg.x_upper = Vector{{1.0, 0.35}};
  cfg.u_lower = Vector{{-1.0}};
  cfg.u_upper = Vector{{1.0}};
  return cfg;
}

namespace {

using io::Json;

void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

template <class T>
void read_if(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

void require_positive(int v, const char* name) {
  if (v < 1) throw ConfigError(std::string(name) + " must be positive");
}

void parse_model(const Json& j, ExperimentConfig& cfg) {
  reject_unknown_keys(j, {"type", "A", "B", "Ts"}, "model");
  const std::string type = j.value("type", "");
  if (!j.contains("A") || !j.contains("B")) throw ConfigError("model needs A and B");
  const Matrix A = io::matrix_from_json(j.at("A"));
  const Matrix B = io::matrix_from_json(j.at("B"));
  if (A.rows() != A.cols() || B.rows() != A.rows() || B.cols() < 1)
    throw ConfigError("model matrices have inconsistent dimensions");
  if (type == "continuous") {
    double Ts = 0.0;
    read_if(j, "Ts", Ts);
    if (!(Ts > 0.0)) throw ConfigError("continuous model needs a positive sampling time Ts");
    const DiscreteModel dm = discretize_zoh(A, B, Ts);
    cfg.sys.A = dm.A;
    cfg.sys.B = dm.B;
  } else if (type == "discrete") {
    if (j.contains("Ts")) throw ConfigError("discrete model does not take Ts");
    cfg.sys.A = A;
    cfg.sys.B = B;
  } else {
    throw ConfigError("model type must be 'continuous' or 'discrete'");
  }
}

void parse_bounds(const Json& j, const char* where, Vector& lo, Vector& hi, Eigen::Index dim) {
  reject_unknown_keys(j, {"lower", "upper"}, where);
  if (!j.contains("lower") || !j.contains("upper"))
    throw ConfigError(std::string(where) + " needs lower and upper");
  lo = io::vector_from_json(j.at("lower"));
  hi = io::vector_from_json(j.at("upper"));
  if (lo.size() != dim || hi.size() != dim)
    throw ConfigError(std::string(where) + " has the wrong dimension");
  if (!(lo.array() < 0.0).all() || !(hi.array() > 0.0).all())
    throw ConfigError(std::string(where) + " must contain the origin in its interior");
}

void parse_design(const Json& j, ExperimentConfig& cfg) {
  reject_unknown_keys(j,
                      {"mode", "initial_penalty", "penalty_growth", "required_reduction",
                       "penalty_cap", "multiplier_cap", "inner_iterations", "outer_iterations",
                       "violation_tol", "stationarity_tol", "euclidean_iterations"},
                      "design");
  const std::string mode = j.value("mode", "riemannian");
  if (mode == "riemannian") cfg.mode = DesignMode::Riemannian;
  else if (mode == "euclidean") cfg.mode = DesignMode::Euclidean;
  else throw ConfigError("design mode must be 'riemannian' or 'euclidean'");
  auto& a = cfg.alm;
  read_if(j, "initial_penalty", a.initial_penalty);
  read_if(j, "penalty_growth", a.penalty_growth);
  read_if(j, "required_reduction", a.required_reduction);
  read_if(j, "penalty_cap", a.penalty_cap);
  read_if(j, "multiplier_cap", a.multiplier_cap);
  read_if(j, "inner_iterations", a.inner_iterations);
  read_if(j, "outer_iterations", a.outer_iterations);
  read_if(j, "violation_tol", a.violation_tol);
  read_if(j, "stationarity_tol", a.stationarity_tol);
  read_if(j, "euclidean_iterations", cfg.euclidean_iterations);
  if (!(a.initial_penalty > 0.0) || !(a.penalty_growth > 1.0) || !(a.penalty_cap > 0.0))
    throw ConfigError("penalty schedule must be positive and growing");
  require_positive(a.inner_iterations, "inner_iterations");
  require_positive(a.outer_iterations, "outer_iterations");
  require_positive(cfg.euclidean_iterations, "euclidean_iterations");
}

ExplicitDesign parse_explicit_design(const Json& j) {
  reject_unknown_keys(j, {"deltas", "centers", "sets", "r", "initial"}, "design_problem");
  ExplicitDesign ex;
  try {
    ex.problem.deltas = io::matrix_from_json(j.at("deltas"));
    for (const auto& c : j.at("centers")) ex.problem.centers.push_back(io::vector_from_json(c));
    for (const auto& s : j.at("sets")) ex.problem.sets.push_back(io::polytope_from_json(s));
    ex.problem.r = j.at("r").get<int>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("design_problem: ") + e.what());
  }
  if (j.contains("initial")) ex.initial = io::matrix_from_json(j.at("initial"));
  try {
    validate_design_problem(ex.problem);
  } catch (const Error& e) {
    throw ConfigError(std::string("design_problem: ") + e.what());
  }
  return ex;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown_keys(j,
                      {"model", "Q", "R", "state_bounds", "input_bounds", "N", "N_desired", "r",
                       "L", "seed", "directions", "center", "grid", "design", "closed_loop",
                       "tolerances", "design_problem"},
                      "config");
  ExperimentConfig cfg;
  if (j.contains("design_problem")) cfg.explicit_design = parse_explicit_design(j["design_problem"]);
  if (j.contains("design")) parse_design(j["design"], cfg);

  if (!j.contains("model")) {
    if (!cfg.explicit_design) throw ConfigError("config needs a model or a design_problem");
    return cfg;
  }
  parse_model(j["model"], cfg);
  const auto n = cfg.sys.A.rows(), m = cfg.sys.B.cols();
  if (!j.contains("Q") || !j.contains("R")) throw ConfigError("config needs weights Q and R");
  cfg.sys.Q = io::matrix_from_json(j["Q"]);
  cfg.sys.R = io::matrix_from_json(j["R"]);
  if (cfg.sys.Q.rows() != n || cfg.sys.Q.cols() != n || cfg.sys.R.rows() != m ||
      cfg.sys.R.cols() != m)
    throw ConfigError("weights have the wrong dimension");
  if (!j.contains("state_bounds") || !j.contains("input_bounds"))
    throw ConfigError("config needs state_bounds and input_bounds");
  parse_bounds(j["state_bounds"], "state_bounds", cfg.x_lower, cfg.x_upper, n);
  parse_bounds(j["input_bounds"], "input_bounds", cfg.u_lower, cfg.u_upper, m);

  read_if(j, "N", cfg.N);
  read_if(j, "N_desired", cfg.N_desired);
  read_if(j, "r", cfg.r);
  read_if(j, "L", cfg.L);
  read_if(j, "seed", cfg.seed);
  read_if(j, "directions", cfg.directions);
  read_if(j, "grid", cfg.grid);
  require_positive(cfg.N, "N");
  require_positive(cfg.N_desired, "N_desired");
  require_positive(cfg.L, "L");
  if (cfg.r < 1 || cfg.r > cfg.N * m) throw ConfigError("r must lie in [1, N m]");
  if (cfg.directions < 3) throw ConfigError("directions must be at least 3");
  if (cfg.grid < 2) throw ConfigError("grid must be at least 2");
  if (n != 2) throw ConfigError("the plant pipeline supports two states only");

  const std::string center = j.value("center", "analytic");
  if (center == "chebyshev") cfg.center = CenterMethod::Chebyshev;
  else if (center == "analytic") cfg.center = CenterMethod::Analytic;
  else throw ConfigError("center must be 'chebyshev' or 'analytic'");

  if (j.contains("closed_loop")) {
    const Json& c = j["closed_loop"];
    reject_unknown_keys(c, {"max_steps", "convergence_eps", "terminal_switch"}, "closed_loop");
    read_if(c, "max_steps", cfg.loop.max_steps);
    read_if(c, "convergence_eps", cfg.loop.convergence_eps);
    read_if(c, "terminal_switch", cfg.loop.terminal_switch);
    require_positive(cfg.loop.max_steps, "max_steps");
    if (!(cfg.loop.convergence_eps > 0.0)) throw ConfigError("convergence_eps must be positive");
  }
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    reject_unknown_keys(t, {"admissibility", "lyapunov", "cost_bound"}, "tolerances");
    read_if(t, "admissibility", cfg.admissibility_tol);
    read_if(t, "lyapunov", cfg.loop.lyapunov_tol);
    read_if(t, "cost_bound", cfg.cost_bound_tol);
  }
  cfg.loop.admissibility_tol = cfg.admissibility_tol;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Study build_study(const ExperimentConfig& config) {
  if (config.sys.A.size() == 0) throw ConfigError("study needs a plant model");
  const Polytope X = Polytope::box(config.x_lower, config.x_upper);
  const Polytope U = Polytope::box(config.u_lower, config.u_upper);
  const MpcSetup setup = make_lqr_setup(config.sys, X, U, config.N);
  const MpcSetup desired = setup.with_horizon(config.N_desired);
  return {config, condense(setup), condense(desired),
          feasible_set_inner(desired, config.directions)};
}

DesignOutcome design_from_data(const Study& study, const DataSet& data) {
  const ExperimentConfig& cfg = study.config;
  DesignOutcome out;
  out.offset = fit_offset(data);
  out.problem = make_design_problem(study.problem.admissible, out.offset, study.initial_vertices,
                                    data.shifted(out.offset.Gamma, out.offset.xi), cfg.r,
                                    cfg.center);
  if (cfg.r >= study.problem.d()) {
    out.result.U = Matrix::Identity(study.problem.d(), study.problem.d());
  } else {
    out.result = design_subspace_riemannian(out.problem, cfg.alm);
  }
  out.pair = {out.result.U, out.offset.Gamma, out.offset.xi};
  out.certificate =
      check_initial_admissibility(study.problem.admissible, out.pair, study.initial_vertices);
  return out;
}

std::vector<Vector> benchmark_grid(const Matrix& vertices, int resolution) {
  require_dims(vertices.rows() == 2, "grid needs planar vertices");
  if (resolution < 2) throw InvalidArgument("grid resolution must be at least 2");
  const Polytope hull = hull_polytope_2d(vertices);
  const Vector lo = vertices.rowwise().minCoeff(), hi = vertices.rowwise().maxCoeff();
  std::vector<Vector> points;
  for (int i = 0; i < resolution; ++i) {
    for (int k = 0; k < resolution; ++k) {
      const Vector x{{lo(0) + (hi(0) - lo(0)) * i / (resolution - 1.0),
                      lo(1) + (hi(1) - lo(1)) * k / (resolution - 1.0)}};
      if (hull.contains(x, 1e-12)) points.push_back(x);
    }
  }
  return points;
}

BenchmarkReport run_benchmark(const Study& study, const SubspacePair& pair) {
  const ExperimentConfig& cfg = study.config;
  BenchmarkReport report;
  double sum = 0.0, sum_sq = 0.0;
  for (const Vector& x : benchmark_grid(study.initial_vertices, cfg.grid)) {
    GridPoint pt;
    pt.x = x;
    ClosedLoopTrace full;
    try {
      full = run_full_closed_loop(study.desired, x, cfg.loop);
    } catch (const InfeasibleProblem&) {
      pt.skipped = true;
      ++report.skipped;
      report.points.push_back(pt);
      continue;
    }
    const ClosedLoopTrace reduced = run_closed_loop(study.problem, pair, x, cfg.loop);
    pt.converged = reduced.converged && full.converged;
    pt.steps = static_cast<int>(reduced.steps.size());
    pt.lyapunov_violations = reduced.lyapunov_violations;
    pt.feasibility_violations = reduced.feasibility_violations;
    pt.initial_value = reduced.initial_value();
    report.total_steps += pt.steps;
    report.lyapunov_violations += pt.lyapunov_violations;
    report.feasibility_violations += pt.feasibility_violations;
    if (!pt.converged) {
      ++report.not_converged;
      report.points.push_back(pt);
      continue;
    }
    pt.reduced_cost = closed_loop_cost(reduced, study.problem.setup.term).cost;
    pt.full_cost = closed_loop_cost(full, study.desired.setup.term).cost;
    pt.epsilon = pt.full_cost > 0.0 ? (pt.reduced_cost - pt.full_cost) / pt.full_cost : 0.0;
    pt.cost_bound_ok =
        pt.reduced_cost <= pt.initial_value + cfg.cost_bound_tol * (1.0 + pt.initial_value);
    if (!pt.cost_bound_ok) ++report.cost_bound_violations;
    ++report.evaluated;
    sum += pt.epsilon;
    sum_sq += pt.epsilon * pt.epsilon;
    report.max_epsilon = report.evaluated == 1 ? pt.epsilon : std::max(report.max_epsilon, pt.epsilon);
    report.points.push_back(pt);
  }
  if (report.evaluated > 0) {
    report.mean_epsilon = sum / report.evaluated;
    report.std_epsilon =
        std::sqrt(std::max(0.0, sum_sq / report.evaluated - report.mean_epsilon * report.mean_epsilon));
  }
  return report;
}

}  // namespace grassmpc
