#pragma once

// One computable element M of the generalized Jacobian of Prox_p at y:
//
//   M = Theta * P^T * Gamma * P,   Gamma = I - B^T (Sigma B B^T Sigma)^+ B
//
// where P sorts y non-increasingly, Sigma marks the active constraints of the
// isotone projection (equal consecutive sorted values) and Theta marks the
// coordinates that survive soft-thresholding. Gamma is block diagonal:
// each run of active constraints of length n_j gives an averaging block
// (1/(n_j+1)) E on n_j+1 coordinates, everything else is identity. M is kept
// in this implicit form and applied in O(n).

#include <cstdint>
#include <vector>

#include "cluslasso/linalg.hpp"
#include "cluslasso/prox.hpp"

namespace cluslasso {

// Block of the diagonal 0/1 matrix Sigma, in constraint (edge) coordinates:
// edge e links sorted coordinates e and e+1.
struct SigmaBlock {
  Index start = 0;
  Index len = 0;
  bool in_j = false;  // identity block (active constraints)
};

// Sorted coordinates [start, start + len) averaged together by Gamma.
struct AveragingGroup {
  Index start = 0;
  Index len = 0;
  bool active = false;  // theta is all ones on the group
};

struct JacobianM {
  Index n = 0;
  std::vector<Index> perm;
  std::vector<std::uint8_t> theta;       // original coordinates
  std::vector<SigmaBlock> sigma_blocks;  // alternate in_j, cover [0, n-1)
  std::vector<AveragingGroup> groups;    // one per in_j sigma block
  std::vector<std::uint8_t> h_tilde;     // diag of P^T H P, original coordinates

  // Number of columns of U_J that survive Theta.
  Index rank() const;
};

class InconsistentProxResult : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kDefaultTiesTol = 1e-10;

// ties_tol is relative to ||y||_inf; |S_i| == beta resolves to theta_i = 0.
JacobianM build_jacobian(const ProxResult& pr, const Penalties& pen, double ties_tol = kDefaultTiesTol);

Vec apply_M(const JacobianM& jac, const Vec& v);
Vec apply_I_minus_M(const JacobianM& jac, const Vec& v);

// A M A^T = A_gamma A_gamma^T + AU AU^T.
struct AmaFactors {
  std::vector<Index> gamma;  // theta_i = 1 and h_tilde_i = 1, ascending
  DesignMatrix a_gamma;      // empty (m x 0) when gamma is empty
  Mat au;                    // m x t, t = jac.rank()
};

AmaFactors ama_factors(const JacobianM& jac, const DesignMatrix& a);

// target += alpha * M, touching only the nonzero pattern of M.
void add_scaled_M(const JacobianM& jac, double alpha, Mat& target);

}  // namespace cluslasso
