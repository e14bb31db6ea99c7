#pragma once

#include "grassmpc/experiment.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace grassmpc {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Invariant suite on a study: terminal ingredients, condensation,
/// admissibility, shift, full-span exactness, basis rotation, objective
/// gradient and the two-box design geometry. Prints one line per check.
std::vector<SelftestCheck> run_selftest(const Study& study, std::uint64_t seed,
                                        std::ostream& log);

}  // namespace grassmpc
