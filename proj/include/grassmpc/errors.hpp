#pragma once

#include <stdexcept>
#include <string>

namespace grassmpc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GRASSMPC_DEFINE_ERROR(Name)        \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

GRASSMPC_DEFINE_ERROR(DimensionMismatch);
GRASSMPC_DEFINE_ERROR(InvalidArgument);
GRASSMPC_DEFINE_ERROR(NoStabilizingSolution);
GRASSMPC_DEFINE_ERROR(EmptyPolytope);
GRASSMPC_DEFINE_ERROR(IterationCapExceeded);
GRASSMPC_DEFINE_ERROR(OriginInfeasible);
GRASSMPC_DEFINE_ERROR(InfeasibleProblem);
GRASSMPC_DEFINE_ERROR(PreconditionViolated);
GRASSMPC_DEFINE_ERROR(DivergenceDetected);
GRASSMPC_DEFINE_ERROR(NotConverged);
GRASSMPC_DEFINE_ERROR(RejectionStall);
GRASSMPC_DEFINE_ERROR(NonConvergence);
GRASSMPC_DEFINE_ERROR(ConfigError);

#undef GRASSMPC_DEFINE_ERROR

/// Raised when the augmented Lagrangian cannot reach a feasible subspace.
class InfeasibleDesign : public Error {
 public:
  InfeasibleDesign(const std::string& what, int worst_set, double violation)
      : Error(what), worst_set_(worst_set), violation_(violation) {}
  int worst_set() const { return worst_set_; }
  double violation() const { return violation_; }

 private:
  int worst_set_;
  double violation_;
};

}  // namespace grassmpc
