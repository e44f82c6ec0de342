#pragma once

#include <optional>
#include <vector>

#include "oscgrid/graph.hpp"
#include "oscgrid/network.hpp"
#include "oscgrid/setpoints.hpp"

namespace oscgrid {

struct GainSet {
  double eta = 1.0;
  double alpha = 1.0;
  double omega0 = 0.0;
};

void validate(const GainSet& gains);

struct PolarState {
  Vec nu;
  Vec theta;
};

PolarState to_polar(const Vec& v);
Vec to_cartesian(const PolarState& s);

// Scaled magnitude error (v* - |v_k|) / v*.
double phi(const Vec2& v_k, double v_star_k);

/// Sparse block row of a 2N x 2N operator: node k couples to `cols[i]` through `blocks[i]`.
struct BlockRow {
  std::vector<Index> cols;
  std::vector<Mat2> blocks;
};

/// Immutable evaluation context for every closed-loop field variant.
///
/// `coupling` maps the stacked state to the stacked local outputs y. For
/// networks with a uniform ell/r ratio it equals the extended Laplacian. The
/// synchronizing matrices K_k live in `k_blocks`; `a` is K - coupling.
struct FieldContext {
  Index n = 0;
  GainSet gains;
  Vec v_star;
  std::vector<Mat2> k_blocks;
  Mat coupling;
  Mat a;
  std::vector<BlockRow> a_rows;  // sparse view of `a` used by the kernels
  double kappa = 0.0;

  // Network-backed contexts only.
  std::optional<Mat> admittance;
  Vec p_star;
  Vec q_star;
  bool pure_inductive = false;

  // Graph-backed contexts (and network contexts with a uniform ratio).
  std::optional<Graph> graph;
  std::optional<Vec> theta;
  bool angle_based = false;  // built by from_graph

  /// K from local power set-points, outputs through R(kappa) Y. With a
  /// non-uniform ell/r ratio `controller_kappa` must be supplied.
  static FieldContext from_network(const NetworkSpec& net, const SetpointBundle& sp, const GainSet& gains,
                                   std::optional<double> controller_kappa = std::nullopt);

  /// K from angle set-points, outputs through L (x) I2.
  static FieldContext from_graph(const Graph& graph, const Vec& v_star, const Vec& theta_rel,
                                 const GainSet& gains);
};

Mat block_k(const FieldContext& ctx);

// sum_j w_jk (v_j - (v*_j / v*_k) R(theta*_jk) v_k), checked against (K - L) v.
Vec phase_error(const Vec& v, const Graph& graph, const Vec& v_star, const Vec& theta_rel);

// Phi_k(v_k) v_k stacked.
Vec magnitude_error(const Vec& v, const Vec& v_star);

Vec2 control_law(const Vec2& v_k, const Vec2& y_k, const Mat2& k_k, const GainSet& gains, double v_star_k);

// f(v) = (omega0 J + eta (K - L) + alpha Phi(v)) v, verified against the
// error decomposition omega0 J v + eta e_theta + alpha e_v.
Vec closed_loop_field(const FieldContext& ctx, const Vec& v);

// Field in coordinates rotating at omega0.
Vec rotating_frame_field(const FieldContext& ctx, const Vec& v_bar);

Vec kuramoto_natural_frequencies(const Graph& graph, const Vec& theta_rel, double eta, double omega0);
Vec kuramoto_field(const Vec& theta, const Vec& natural_freqs, const Graph& graph, double eta);

// Closed-loop field projected onto the tangent of each node's circle.
Vec projected_field(const FieldContext& ctx, const Vec& v);

struct PolarRates {
  Vec nu_dot;
  Vec theta_dot;
};

// Polar form of the closed loop on purely inductive networks.
PolarRates droop_field(const FieldContext& ctx, const PolarState& state);

// Chain rule: (nu_dot, theta_dot) of a Cartesian velocity field.
PolarRates polar_rates(const Vec& v, const Vec& v_dot);

// (v_a dv_b - v_b dv_a) / |v|^2 in rad/s; NaN below the polar guard.
double instantaneous_frequency(const Vec2& v_k, const Vec2& v_dot_k);

inline constexpr double kPolarGuard = 1e-9;

}  // namespace oscgrid
