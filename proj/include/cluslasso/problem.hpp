#pragma once

#include "cluslasso/linalg.hpp"

namespace cluslasso {

// min_x 0.5 * ||A x - b||^2 + p(x)
struct ProblemData {
  DesignMatrix A;
  Vec b;
  Penalties pen;

  ProblemData() = default;
  ProblemData(DesignMatrix a, Vec rhs, Penalties p);

  Index m() const { return A.rows(); }
  Index n() const { return A.cols(); }

  // Throws on n < 2, size mismatch, negative or non-finite penalties.
  void validate() const;
};

}  // namespace cluslasso
