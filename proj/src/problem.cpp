#include "cluslasso/problem.hpp"

#include <cmath>

namespace cluslasso {

ProblemData::ProblemData(DesignMatrix a, Vec rhs, Penalties p)
    : A(std::move(a)), b(std::move(rhs)), pen(p) {
  validate();
}

void ProblemData::validate() const {
  if (A.cols() < 2) {
    throw std::invalid_argument("ProblemData: need n >= 2 (pairwise penalty is vacuous for n = 1)");
  }
  require_dim(b.size(), A.rows(), "ProblemData b");
  if (!b.allFinite()) throw std::invalid_argument("ProblemData: non-finite entry in b");
  if (!(pen.beta >= 0.0) || !(pen.rho >= 0.0) || !std::isfinite(pen.beta) || !std::isfinite(pen.rho)) {
    throw std::invalid_argument("ProblemData: penalties must be finite and >= 0");
  }
}

}  // namespace cluslasso
