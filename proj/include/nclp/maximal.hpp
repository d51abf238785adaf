#pragma once

#include <optional>

#include "nclp/operators.hpp"

namespace nclp {

struct MaxNormOptions {
  int max_iter = 10000;          // projected-gradient iteration budget
  double gap_tol = 1e-6;         // relative duality-gap target
  int dykstra_max_cycles = 600;
  double dykstra_tol = 1e-14;
  int dual_iters = 150;          // projected-ascent polish steps
  int barrier_stages = 14;       // interior polish: mu reductions
  unsigned seed = 5;
  std::optional<AlgElement> init;  // feasible warm start (projected if not)
};

/// Certified bracket for || sup+ x_n ||_p = inf { ||a||_p : a >= x_n }.
/// `upper` is the norm of the returned feasible point (shifted to exact
/// feasibility, so it is a true upper bound); `lower` comes from a feasible
/// point of the dual program over L_{p'}(M; l_1), so it is a true lower bound.
struct MaximalNormResult {
  double upper = 0.0;
  double lower = 0.0;
  std::optional<AlgElement> a_star;
  double feasibility_slack = 0.0;  // most negative eigenvalue over a_star - x_n
  int iterations = 0;
  bool converged = false;
};

/// Solve the positive-sequence maximal norm by projected gradient descent on
/// tau(a^p) over the spectrahedron { a : a >= x_n for all n } (Dykstra's
/// alternating projections for the intersection), with a dual lower bound from
/// projected ascent plus a complementary-slackness candidate built from the
/// primal active sets. Requires p in (1, inf) and every x_n PSD within tol.
MaximalNormResult maximal_norm_pos(const std::vector<AlgElement>& xs, double p,
                                   const MaxNormOptions& opts = {});

/// Exact value for a simultaneously diagonalizable PSD family: joint
/// diagonalization, entrywise max of the eigenvalue profiles, then its p-norm.
double oracle_commuting(const std::vector<AlgElement>& xs, double p,
                        double comm_tol = 1e-8);

struct GridOracle {
  double value = 0.0;
  double accuracy = 0.0;  // bound on |value - true|, from the final grid spacing
};

/// Brute-force oracle for two PSD elements of a single 2x2 block: exhaustive
/// grid over the four real parameters of Hermitian a with shrinking
/// refinement. Independent of the convex solver.
GridOracle oracle_grid_2x2(const AlgElement& x1, const AlgElement& x2, double p,
                           int grid = 17, int rounds = 12);

/// Cesaro averages A_0 x .. A_N x with A_n = (1/(n+1)) sum_{k<=n} T^k.
std::vector<AlgElement> ergodic_averages(const LpOperator& t, const AlgElement& x, int n);

/// Two-sided averages (1/(2n+1)) sum_{k=-n}^{n} T^k x for n = 0..N; requires
/// an invertible dense matrix within the conditioning bound.
std::vector<AlgElement> two_sided_averages(const LpOperator& t, const AlgElement& x,
                                           int n, double cond_threshold = 1e12);

/// Spectral projection of the dense matrix onto the eigenvalue-1 cluster along
/// the complementary spectral subspace; P = lim A_n for power-bounded T.
/// Eigenvalues inside (cluster_tol, ambiguity_tol) of 1 raise a diagnostic.
LpOperator mean_ergodic_projection(const LpOperator& t, double cluster_tol = 1e-9,
                                   double ambiguity_tol = 1e-6,
                                   double verify_tol = 1e-8);

struct ErgodicReport {
  std::vector<int> profile_grid;        // N values at which the ratio was solved
  std::vector<double> profile_upper;    // certified upper bounds on ratio(N)
  std::vector<double> profile_lower;    // certified lower bounds on ratio(N)
  MaximalNormResult maximal;            // full result at the final N
  double ratio = 0.0;                   // maximal.upper / ||x||_p
  double x_norm = 0.0;
  double projection_distance = 0.0;     // ||A_N x - P x||_p
  bool two_sided = false;
};

/// Assemble the (one- or two-sided) averages of a positive operator applied to
/// a PSD x, solve the maximal norm over them on a dyadic-style grid up to N,
/// and report the stabilization profile of ratio(N).
ErgodicReport maximal_ergodic_report(const LpOperator& t, const AlgElement& x, int n,
                                     double p, bool two_sided,
                                     const MaxNormOptions& opts = {});

struct LinfCheckReport {
  MaximalNormResult source;
  MaximalNormResult image;
  double combined_gap = 0.0;
  bool contraction_ok = false;
  bool isometry_match = false;
};

/// Evidence that T extends to a contraction on L_p(M; l_inf): the image
/// maximal norm must not exceed the source one beyond the combined duality
/// gaps of the two solves.
bool linf_contraction_check(const LpOperator& t, const std::vector<AlgElement>& xs,
                            double p, const MaxNormOptions& opts = {},
                            LinfCheckReport* report = nullptr);

}  // namespace nclp
