#include "oscgrid/analysis.hpp"

#include <cmath>

#include "oscgrid/errors.hpp"
#include "oscgrid/setpoints.hpp"

namespace oscgrid {

Mat subspace_basis(const Vec& v_star, const Vec& theta_rel) {
  const Index n = v_star.size();
  const Vec th = absolute_angles(theta_rel);
  Mat s(2 * n, 2);
  for (Index k = 0; k < n; ++k) s.block<2, 2>(2 * k, 0) = v_star(k) * rotation(th(k));
  return s / v_star.norm();
}

Mat projector(const Vec& v_star, const Vec& theta_rel) {
  const Mat s = subspace_basis(v_star, theta_rel);
  return Mat::Identity(s.rows(), s.rows()) - s * s.transpose();
}

// P is a symmetric projector, so v^T P v = |Pv|^2; the norm form avoids cancellation near S.
double lyapunov_v(const Vec& v, const Mat& p) { return (p * v).squaredNorm(); }

Mat decay_matrix(const Mat& a, const Mat& p, double eta, double alpha) {
  return eta * (p * a + a.transpose() * p) + 2.0 * alpha * p;
}

double smallest_nonzero_singular_value(const Mat& m) {
  const Vec sv = Eigen::JacobiSVD<Mat>(m).singularValues();
  const double cutoff = kSingularValueCutoff * sv(0);
  double smallest = sv(0);
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) smallest = sv(i);
  }
  return smallest;
}

StabilityReport check_condition1(const Graph& graph, const Vec& v_star, const Vec& theta_rel, double eta,
                                 double alpha, bool pure_inductive) {
  if (!(eta > 0.0) || !(alpha > 0.0)) throw InputError("gains must be positive");
  const Index n = graph.n_nodes();
  const Vec th = absolute_angles(theta_rel);
  StabilityReport rep;

  double inductive = 0.0;
  for (Index k = 0; k < n; ++k) {
    double row = 0.0;
    double branch = 0.0;
    for (const auto& nb : graph.neighbors(k)) {
      const Index j = nb.node;
      const double c = std::cos(th(j) - th(k));
      row += nb.weight * std::abs(1.0 - v_star(j) / v_star(k) * c);
      // Steady-state reactive branch power q_jk normalized by v_k^2.
      const double q_branch = nb.weight * v_star(k) * (v_star(k) - v_star(j) * c);
      branch += std::abs(q_branch) / (v_star(k) * v_star(k));
    }
    rep.heterogeneity = std::max(rep.heterogeneity, row);
    inductive = std::max(inductive, branch);
  }
  rep.lhs = rep.heterogeneity + alpha / eta;
  if (pure_inductive) rep.inductive_form_lhs = inductive + alpha / eta;

  rep.lambda2 = algebraic_connectivity(laplacian(graph));
  const double vmin = v_star.minCoeff();
  const double vmax = v_star.maxCoeff();
  rep.rhs = 0.5 * (vmin * vmin) / (vmax * vmax) * rep.lambda2;
  rep.satisfied = rep.lhs < rep.rhs;

  rep.angles_in_range = true;
  rep.angles_in_range_abs = true;
  for (Index k = 0; k < theta_rel.size(); ++k) {
    const double a = wrap_angle(theta_rel(k));
    if (a < 0.0 || a > kPi / 2.0) rep.angles_in_range = false;
    if (std::abs(a) > kPi / 2.0) rep.angles_in_range_abs = false;
  }
  if (!rep.angles_in_range) rep.warnings.push_back("angle outside Condition 1 range");

  const Mat a = block_diagonal(k_from_angles(graph, v_star, theta_rel)) - extend(laplacian(graph));
  const Mat p = projector(v_star, theta_rel);
  rep.decay_rate = smallest_nonzero_singular_value(decay_matrix(a, p, eta, alpha));
  return rep;
}

double w_k(const Vec2& v_k, double v_star_k) {
  const double f = phi(v_k, v_star_k);
  return f * f;
}

OriginJacobian jacobian_at_origin(double eta, double alpha, const Mat& k_ext, const Mat& l_ext) {
  OriginJacobian out;
  out.matrix = eta * (k_ext - l_ext) + alpha * Mat::Identity(k_ext.rows(), k_ext.cols());
  out.eigenvalues = Eigen::EigenSolver<Mat>(out.matrix, false).eigenvalues();
  out.unstable_count = 0;
  for (Index i = 0; i < out.eigenvalues.size(); ++i) {
    if (out.eigenvalues(i).real() >= alpha - 1e-9 * std::max(1.0, std::abs(alpha))) ++out.unstable_count;
  }
  return out;
}

TargetSetDistances target_distances(const Vec& v, const FieldContext& ctx, const Mat& p) {
  TargetSetDistances d;
  d.dist_s = std::sqrt(lyapunov_v(v, p));
  d.dist_a.resize(ctx.n);
  for (Index k = 0; k < ctx.n; ++k) d.dist_a(k) = std::abs(node_of(v, k).norm() - ctx.v_star(k));
  d.freq_residual = (ctx.gains.eta * (ctx.a * v) + ctx.gains.alpha * magnitude_error(v, ctx.v_star)).norm();
  return d;
}

double gamma_s(double gamma_a, const Vec& v_star, const Mat& a) {
  const double vmin = v_star.minCoeff();
  const double vmax = v_star.maxCoeff();
  if (!(gamma_a >= 0.0) || !(gamma_a < vmin / 2.0)) throw InputError("gamma_A must lie in [0, vmin / 2)");
  const double sigma_max = Eigen::JacobiSVD<Mat>(a).singularValues()(0);
  return (vmin / vmax) * gamma_a * (vmin - gamma_a) / sigma_max;
}

bool invariant_set_membership(const Vec& v_bar, double gamma_a, const FieldContext& ctx, const Mat& p) {
  const double gs = gamma_s(gamma_a, ctx.v_star, ctx.a);
  const TargetSetDistances d = target_distances(v_bar, ctx, p);
  return d.dist_s <= gs && d.dist_a.maxCoeff() <= gamma_a;
}

Vec w_bound(const Vec& v0, const Vec& v_star, const Mat& a, const Mat& p) {
  const double sigma_max = Eigen::JacobiSVD<Mat>(a).singularValues()(0);
  const double dist_s0 = std::sqrt(lyapunov_v(v0, p));
  Vec bound(v_star.size());
  for (Index k = 0; k < v_star.size(); ++k) {
    const double transient = sigma_max * dist_s0 / (2.0 * v_star(k) * v_star(k));
    bound(k) = std::max({w_k(node_of(v0, k), v_star(k)), transient * transient, 1.0}) + 1e-6;
  }
  return bound;
}

}  // namespace oscgrid
