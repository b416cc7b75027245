#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "cluslasso/problem.hpp"

namespace cluslasso {

// ---- LIBSVM text format: "label idx:val idx:val ..." with 1-based, increasing indices.

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabeledMatrix {
  DesignMatrix A;
  Vec b;
};

// n = max(largest index seen, min_cols). Blank lines and lines starting with
// '#' are skipped; a label with no features is a zero row.
LabeledMatrix read_libsvm(const std::string& path, Index min_cols = 0);
LabeledMatrix parse_libsvm(std::istream& in, Index min_cols = 0);

// Writes nonzeros with shortest round-trip formatting.
void write_libsvm(const std::string& path, const DesignMatrix& a, const Vec& b);
void write_libsvm(std::ostream& out, const DesignMatrix& a, const Vec& b);

// Sparse storage is swapped for dense above this fill fraction.
DesignMatrix densify_if_full(DesignMatrix a, double max_density = 0.3);

// ---- Synthetic scenarios 1..7.

struct ScenarioSpec {
  int id = 1;
  int k = 1;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  Index m_override = 0;  // total rows; 0 keeps max(80000, 0.5 n k)

  void validate() const;
};

struct SyntheticProblem {
  ScenarioSpec spec;
  ProblemData data;  // training rows, zero penalties
  Vec x_true;
  DesignMatrix a_test;  // empty (0 rows) when every row trains
  Vec b_test;
  double sigma_noise = 0.0;
};

// Length of the base coefficient vector of a scenario (20 for scenario 7).
Index base_length(int id);
// Predictor count for (id, k).
Index scenario_cols(int id, int k);

// Base vector repeated k times per entry (ids 1-6), or the histogram vector
// tiled 2k times (id 7, drawn with `seed`).
Vec true_coefficients(int id, int k, std::uint64_t seed = 0);

// Population correlation of the predictors.
Mat scenario_correlation(int id, int k);

SyntheticProblem generate_scenario(const ScenarioSpec& spec);

// beta = alpha1 * ||A^T b||_inf, rho = alpha2 * beta.
Penalties penalties_from_alphas(double alpha1, double alpha2, const DesignMatrix& a, const Vec& b);

// JSON sidecar with the spec, x_true and split sizes.
void write_sidecar(const std::string& path, const SyntheticProblem& p);

}  // namespace cluslasso
