#pragma once

#include "grassmpc/design.hpp"
#include "grassmpc/reduced.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace grassmpc {

enum class DesignMode { Riemannian, Euclidean };

/// Explicit design problem that bypasses the plant pipeline.
struct ExplicitDesign {
  DesignProblem problem;
  std::optional<Matrix> initial;
};

struct ExperimentConfig {
  LinearSystem sys;
  Vector x_lower, x_upper, u_lower, u_upper;
  int N = 13;
  int N_desired = 12;
  int r = 2;
  int L = 450;
  std::uint64_t seed = 1;
  int directions = 32;
  CenterMethod center = CenterMethod::Analytic;
  int grid = 21;
  DesignMode mode = DesignMode::Riemannian;
  RiemannianDesignConfig alm;
  int euclidean_iterations = 100;
  ClosedLoopOptions loop;
  double admissibility_tol = 1e-8;
  double cost_bound_tol = 1e-6;
  std::optional<ExplicitDesign> explicit_design;
};

/// Inverted pendulum with the defaults used throughout the README.
ExperimentConfig pendulum_config();

/// JSON schema: see README. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Plant, constraint sets and terminal ingredients for both horizons plus
/// the initial set, an inner approximation of the feasible set at N_desired.
struct Study {
  ExperimentConfig config;
  CondensedProblem problem;
  CondensedProblem desired;
  Matrix initial_vertices;
};

Study build_study(const ExperimentConfig& config);

struct DesignOutcome {
  OffsetFit offset;
  DesignProblem problem;
  RiemannianDesignResult result;
  SubspacePair pair;
  AdmissibilityCertificate certificate;
};

/// Offset fit, shifted sets, centers and Riemannian design. Throws
/// InfeasibleDesign; the certificate is recomputed and may be negative.
DesignOutcome design_from_data(const Study& study, const DataSet& data);

/// Grid over the bounding box of conv(vertices), points outside dropped.
std::vector<Vector> benchmark_grid(const Matrix& vertices, int resolution);

struct GridPoint {
  Vector x;
  bool skipped = false;  // full-order problem infeasible
  bool converged = false;
  double reduced_cost = 0.0;
  double full_cost = 0.0;
  double epsilon = 0.0;
  double initial_value = 0.0;
  int steps = 0;
  int lyapunov_violations = 0;
  int feasibility_violations = 0;
  bool cost_bound_ok = true;
};

struct BenchmarkReport {
  std::vector<GridPoint> points;
  double mean_epsilon = 0.0;
  double std_epsilon = 0.0;
  double max_epsilon = 0.0;
  int evaluated = 0;
  int skipped = 0;
  int not_converged = 0;
  int total_steps = 0;
  int lyapunov_violations = 0;
  int feasibility_violations = 0;
  int cost_bound_violations = 0;

  bool invariants_ok() const {
    return not_converged == 0 && lyapunov_violations == 0 && feasibility_violations == 0 &&
           cost_bound_violations == 0;
  }
};

/// Reduced loop at horizon N against the full-order loop at N_desired on
/// the grid; epsilon = (J_reduced - J_full) / J_full, 0 when J_full = 0.
BenchmarkReport run_benchmark(const Study& study, const SubspacePair& pair);

}  // namespace grassmpc
