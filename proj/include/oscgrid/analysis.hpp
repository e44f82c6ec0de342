#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oscgrid/controller.hpp"
#include "oscgrid/graph.hpp"

namespace oscgrid {

struct StabilityReport {
  double lhs = 0.0;            // heterogeneity + alpha / eta
  double rhs = 0.0;            // (1/2) (vmin^2 / vmax^2) lambda2
  double heterogeneity = 0.0;  // max_k sum_j w_jk |1 - (v_j / v_k) cos theta_jk|
  double lambda2 = 0.0;
  double decay_rate = 0.0;     // smallest nonzero singular value of Q
  bool satisfied = false;      // lhs < rhs
  bool angles_in_range = false;      // every theta_k1 in [0, pi/2]
  bool angles_in_range_abs = false;  // every |theta_k1| <= pi/2
  std::optional<double> inductive_form_lhs;
  std::vector<std::string> warnings;
};

StabilityReport check_condition1(const Graph& graph, const Vec& v_star, const Vec& theta_rel, double eta,
                                 double alpha, bool pure_inductive = false);

// Orthonormal 2N x 2 basis of the set of correct relative phases.
Mat subspace_basis(const Vec& v_star, const Vec& theta_rel);

// P = I - S S^T.
Mat projector(const Vec& v_star, const Vec& theta_rel);

// V = v^T P v.
double lyapunov_v(const Vec& v, const Mat& p);

// Q = eta (P A + A^T P) + 2 alpha P.
Mat decay_matrix(const Mat& a, const Mat& p, double eta, double alpha);

// Smallest singular value above 1e-9 times the largest.
double smallest_nonzero_singular_value(const Mat& m);

double w_k(const Vec2& v_k, double v_star_k);

struct OriginJacobian {
  Mat matrix;
  Eigen::VectorXcd eigenvalues;
  int unstable_count;  // eigenvalues with Re >= alpha (relative slack 1e-9); at least 2 for consistent setpoints
};

// eta (K - L) + alpha I.
OriginJacobian jacobian_at_origin(double eta, double alpha, const Mat& k_ext, const Mat& l_ext);

struct TargetSetDistances {
  double dist_s = 0.0;
  Vec dist_a;
  double freq_residual = 0.0;
};

TargetSetDistances target_distances(const Vec& v, const FieldContext& ctx, const Mat& p);

// Largest phase distance of the invariant set for magnitude tolerance gamma_a.
double gamma_s(double gamma_a, const Vec& v_star, const Mat& a);

bool invariant_set_membership(const Vec& v_bar, double gamma_a, const FieldContext& ctx, const Mat& p);

// Upper bound on W_k along a trajectory started at v0.
Vec w_bound(const Vec& v0, const Vec& v_star, const Mat& a, const Mat& p);

inline constexpr double kSingularValueCutoff = 1e-9;

}  // namespace oscgrid
