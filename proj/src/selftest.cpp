#include "grassmpc/selftest.hpp"

#include "grassmpc/errors.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace grassmpc {

namespace {

Vector uniform_in_box(const Vector& lo, const Vector& hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(lo.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = lo(i) + (hi(i) - lo(i)) * u(rng);
  return x;
}

Vector random_in_hull(const Matrix& V, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Vector w(V.cols());
  for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = e(rng);
  return V * (w / w.sum());
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix M(rows, cols);
  for (Eigen::Index k = 0; k < M.size(); ++k) M.data()[k] = n(rng);
  return M;
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

std::vector<SelftestCheck> run_selftest(const Study& study, std::uint64_t seed,
                                        std::ostream& log) {
  std::vector<SelftestCheck> checks;
  std::mt19937_64 rng(seed);
  const CondensedProblem& cp = study.problem;
  const MpcSetup& setup = cp.setup;
  const Matrix& V = study.initial_vertices;

  auto run = [&](const std::string& name, const std::function<std::string(bool&)>& body) {
    SelftestCheck c{name, false, ""};
    try {
      c.detail = body(c.passed);
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = std::string("threw: ") + e.what();
    }
    log << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
    checks.push_back(std::move(c));
  };

  run("terminal_ingredients", [&](bool& ok) {
    const TerminalCheck tc = check_terminal_ingredients(setup, 1000, seed);
    ok = tc.ok();
    return "worst decrease margin " + sci(tc.worst_decrease_margin);
  });

  run("riccati_residual", [&](bool& ok) {
    const double res = riccati_residual(setup.sys, setup.term.Pf);
    ok = res <= 1e-9;
    return "residual " + sci(res);
  });

  run("admissible_set_vs_rollout", [&](bool& ok) {
    int mismatches = 0;
    for (int k = 0; k < 200; ++k) {
      const Vector x = uniform_in_box(study.config.x_lower, study.config.x_upper, rng);
      const Vector z = 0.5 * gaussian(cp.d(), 1, rng);
      if (cp.admissible.contains(x, z, 1e-9) != admissible_by_rollout(setup, x, z, 1e-9))
        ++mismatches;
    }
    ok = mismatches == 0;
    return std::to_string(mismatches) + " mismatches in 200 pairs";
  });

  run("condensed_cost_vs_rollout", [&](bool& ok) {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Vector x = uniform_in_box(study.config.x_lower, study.config.x_upper, rng);
      const Vector z = gaussian(cp.d(), 1, rng);
      const double ref = open_loop_cost(setup.sys, setup.K, setup.term, x, z);
      worst = std::max(worst, std::abs(cp.cost(x, z) - ref) / std::max(1.0, std::abs(ref)));
    }
    ok = worst <= 1e-8;
    return "worst relative error " + sci(worst);
  });

  run("admissible_shift", [&](bool& ok) {
    int failures = 0;
    for (int k = 0; k < 20; ++k) {
      const Vector x = random_in_hull(V, rng);
      const Vector z = solve_full(cp, x).z;
      const Vector s = admissible_shift(cp, x, z);
      const Vector next = rollout(setup.sys, setup.K, x, z).states.col(1);
      if (!cp.admissible.contains(next, s, 1e-8)) ++failures;
    }
    ok = failures == 0;
    return std::to_string(failures) + " inadmissible shifts in 20";
  });

  run("full_span_exactness", [&](bool& ok) {
    const SubspacePair full{Matrix::Identity(cp.d(), cp.d()), Matrix::Zero(cp.d(), cp.n()),
                            Vector::Zero(cp.d())};
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Vector x = random_in_hull(V, rng);
      const double v = solve_full(cp, x).value;
      const double vr = solve_reduced(cp, full, x, Vector::Zero(cp.d())).value;
      worst = std::max(worst, std::abs(vr - v) / (1.0 + v));
    }
    ok = worst <= 1e-7;
    return "worst relative gap " + sci(worst);
  });

  run("basis_rotation_invariance", [&](bool& ok) {
    const int r = std::min(3, cp.d());
    const SubspacePair pair{qr_orthonormalize(gaussian(cp.d(), r, rng)),
                            Matrix::Zero(cp.d(), cp.n()), Vector::Zero(cp.d())};
    const Vector x = random_in_hull(V, rng);
    const Vector guess = solve_full(cp, x).z;
    const double base = solve_reduced(cp, pair, x, guess).value;
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      SubspacePair rotated = pair;
      rotated.U = pair.U * random_orthogonal(r, rng);
      worst = std::max(worst, std::abs(solve_reduced(cp, rotated, x, guess).value - base) /
                                  std::max(1.0, std::abs(base)));
    }
    ok = worst <= 1e-7;
    return "worst relative change " + sci(worst);
  });

  run("objective_gradient", [&](bool& ok) {
    const Matrix D = gaussian(cp.d(), 40, rng);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const Matrix U = qr_orthonormalize(gaussian(cp.d(), 2, rng));
      Matrix xi = gaussian(cp.d(), 2, rng);
      xi -= U * (U.transpose() * xi);
      const double h = 1e-5;
      const double fd =
          (objective_f(retract_qr(U, h * xi), D) - objective_f(retract_qr(U, -h * xi), D)) /
          (2 * h);
      const double exact = (riemannian_grad_f(U, D).array() * xi.array()).sum();
      worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
    }
    ok = worst <= 1e-5;
    return "worst relative error " + sci(worst);
  });

  run("two_box_design_geometry", [&](bool& ok) {
    DesignProblem prob;
    const Vector diag = Vector{{1.0, 1.0}} / std::sqrt(2.0);
    const Vector anti = Vector{{1.0, -1.0}} / std::sqrt(2.0);
    prob.deltas.resize(2, 4);
    prob.deltas << diag, -diag, 2.0 * anti, -2.0 * anti;
    prob.centers = {Vector{{3.0, 1.0}}, Vector{{3.0, 5.0}}};
    prob.sets = {Polytope::box(Vector{{2.0, 0.0}}, Vector{{4.0, 2.0}}),
                 Polytope::box(Vector{{2.0, 4.0}}, Vector{{4.0, 6.0}})};
    prob.r = 1;
    const auto eucl = design_subspace_euclidean(prob, Vector{{1.0, 0.0}});
    const auto riem = design_subspace_riemannian(prob);
    ok = eucl.infeasible_iteration == 0 && riem.max_violation <= 1e-6;
    return "euclidean infeasible at k=" + std::to_string(eucl.infeasible_iteration) +
           ", riemannian violation " + sci(riem.max_violation);
  });

  return checks;
}

}  // namespace grassmpc
