#include "oscgrid/controller.hpp"

#include <cmath>
#include <limits>

#include "oscgrid/errors.hpp"
#include "oscgrid/kernels.hpp"

namespace oscgrid {

void validate(const GainSet& gains) {
  // Zero gains are allowed for open-loop runs; the stability certificate needs them positive.
  if (!(gains.eta >= 0.0) || !std::isfinite(gains.eta)) throw InputError("eta must be non-negative");
  if (!(gains.alpha >= 0.0) || !std::isfinite(gains.alpha)) throw InputError("alpha must be non-negative");
  if (!(gains.omega0 >= 0.0) || !std::isfinite(gains.omega0)) throw InputError("omega0 must be non-negative");
}

PolarState to_polar(const Vec& v) {
  const Index n = v.size() / 2;
  PolarState s{Vec(n), Vec(n)};
  for (Index k = 0; k < n; ++k) {
    s.nu(k) = std::hypot(v(2 * k), v(2 * k + 1));
    s.theta(k) = std::atan2(v(2 * k + 1), v(2 * k));
  }
  return s;
}

Vec to_cartesian(const PolarState& s) {
  Vec v(2 * s.nu.size());
  for (Index k = 0; k < s.nu.size(); ++k) {
    v(2 * k) = s.nu(k) * std::cos(s.theta(k));
    v(2 * k + 1) = s.nu(k) * std::sin(s.theta(k));
  }
  return v;
}

double phi(const Vec2& v_k, double v_star_k) { return (v_star_k - v_k.norm()) / v_star_k; }

namespace {

void finish(FieldContext& ctx) {
  ctx.a = block_k(ctx) - ctx.coupling;
  ctx.a_rows.assign(static_cast<std::size_t>(ctx.n), BlockRow{});
  for (Index k = 0; k < ctx.n; ++k) {
    auto& row = ctx.a_rows[static_cast<std::size_t>(k)];
    for (Index j = 0; j < ctx.n; ++j) {
      const Mat2 block = ctx.a.block<2, 2>(2 * k, 2 * j);
      if (block.cwiseAbs().maxCoeff() == 0.0) continue;
      row.cols.push_back(j);
      row.blocks.push_back(block);
    }
  }
}

double field_scale(const FieldContext& ctx, const Vec& v) {
  const double a_norm = ctx.a.cwiseAbs().rowwise().sum().maxCoeff();
  return std::max(1.0, (ctx.gains.omega0 + ctx.gains.eta * a_norm + ctx.gains.alpha * 2.0) * v.norm());
}

}  // namespace

FieldContext FieldContext::from_network(const NetworkSpec& net, const SetpointBundle& sp, const GainSet& gains,
                                        std::optional<double> controller_kappa) {
  validate(net);
  validate(sp, net.n_nodes);
  validate(gains);

  const RatioCheck ratio = check_uniform_ratio(net);
  FieldContext ctx;
  ctx.n = net.n_nodes;
  ctx.gains = gains;
  ctx.v_star = sp.v;
  ctx.p_star = sp.p;
  ctx.q_star = sp.q;
  ctx.pure_inductive = is_pure_inductive(net);
  ctx.graph = weighted_graph(net);
  ctx.theta = sp.theta;

  if (controller_kappa) {
    ctx.kappa = *controller_kappa;
  } else if (ratio.uniform) {
    ctx.kappa = ratio.kappa;
  } else {
    (void)network_laplacian(net);  // throws with the offending lines listed
  }

  ctx.admittance = admittance_matrix(net);
  ctx.coupling = block_rotation(ctx.n, ctx.kappa) * *ctx.admittance;
  ctx.k_blocks.reserve(static_cast<std::size_t>(ctx.n));
  for (Index k = 0; k < ctx.n; ++k) ctx.k_blocks.push_back(k_from_power(sp.p(k), sp.q(k), sp.v(k), ctx.kappa));
  finish(ctx);
  return ctx;
}

FieldContext FieldContext::from_graph(const Graph& graph, const Vec& v_star, const Vec& theta_rel,
                                      const GainSet& gains) {
  validate(gains);
  if (v_star.size() != graph.n_nodes() || theta_rel.size() != graph.n_nodes() - 1) {
    throw InputError("set-point dimensions do not match the graph");
  }
  for (Index k = 0; k < v_star.size(); ++k) {
    if (!(v_star(k) > 0.0)) throw InputError("voltage set-points must be positive");
  }
  FieldContext ctx;
  ctx.n = graph.n_nodes();
  ctx.gains = gains;
  ctx.v_star = v_star;
  ctx.graph = graph;
  ctx.theta = theta_rel;
  ctx.angle_based = true;
  ctx.coupling = extend(laplacian(graph));
  ctx.k_blocks = k_from_angles(graph, v_star, theta_rel);
  finish(ctx);
  return ctx;
}

Mat block_k(const FieldContext& ctx) { return block_diagonal(ctx.k_blocks); }

Vec phase_error(const Vec& v, const Graph& graph, const Vec& v_star, const Vec& theta_rel) {
  const Index n = graph.n_nodes();
  const Vec th = absolute_angles(theta_rel);
  Vec e = Vec::Zero(2 * n);
  double scale = 1.0;
  for (Index k = 0; k < n; ++k) {
    Vec2 acc = Vec2::Zero();
    for (const auto& nb : graph.neighbors(k)) {
      const Index j = nb.node;
      acc += nb.weight * (node_of(v, j) - v_star(j) / v_star(k) * rotation(th(j) - th(k)) * node_of(v, k));
      scale += nb.weight * (node_of(v, j).norm() + v_star(j) / v_star(k) * node_of(v, k).norm());
    }
    e.segment<2>(2 * k) = acc;
  }
  const Mat a = block_diagonal(k_from_angles(graph, v_star, theta_rel)) - extend(laplacian(graph));
  detail::ensure((e - a * v).norm() <= 1e-12 * scale, "phase error equals (K - L) v");
  return e;
}

Vec magnitude_error(const Vec& v, const Vec& v_star) {
  Vec e(v.size());
  for (Index k = 0; k < v_star.size(); ++k) e.segment<2>(2 * k) = phi(node_of(v, k), v_star(k)) * node_of(v, k);
  return e;
}

Vec2 control_law(const Vec2& v_k, const Vec2& y_k, const Mat2& k_k, const GainSet& gains, double v_star_k) {
  return gains.omega0 * j_matrix() * v_k + gains.eta * (k_k * v_k - y_k) + gains.alpha * phi(v_k, v_star_k) * v_k;
}

Vec closed_loop_field(const FieldContext& ctx, const Vec& v) {
  Vec phi_v(v.size());
  for (Index k = 0; k < ctx.n; ++k) phi_v.segment<2>(2 * k) = phi(node_of(v, k), ctx.v_star(k)) * node_of(v, k);
  const Vec rot = ctx.gains.omega0 * (block_j(ctx.n) * v);
  const Vec f = rot + ctx.gains.eta * (ctx.a * v) + ctx.gains.alpha * phi_v;

  Vec e_theta;
  if (ctx.angle_based) {
    e_theta = phase_error(v, *ctx.graph, ctx.v_star, *ctx.theta);
  } else {
    e_theta = block_k(ctx) * v - ctx.coupling * v;
  }
  const Vec decomposition = rot + ctx.gains.eta * e_theta + ctx.gains.alpha * magnitude_error(v, ctx.v_star);
  detail::ensure((f - decomposition).norm() <= 1e-12 * field_scale(ctx, v),
                 "closed loop equals its error decomposition");
  return f;
}

Vec rotating_frame_field(const FieldContext& ctx, const Vec& v_bar) {
  Vec f_bar;
  kernels::closed_loop(ctx, v_bar, false, f_bar);
  const Vec reference = closed_loop_field(ctx, v_bar) - ctx.gains.omega0 * (block_j(ctx.n) * v_bar);
  detail::ensure((f_bar - reference).norm() <= 1e-12 * field_scale(ctx, v_bar),
                 "rotating-frame field equals static field minus rotation");
  return f_bar;
}

Vec kuramoto_natural_frequencies(const Graph& graph, const Vec& theta_rel, double eta, double omega0) {
  const Vec th = absolute_angles(theta_rel);
  Vec w = Vec::Constant(graph.n_nodes(), omega0);
  for (Index k = 0; k < graph.n_nodes(); ++k) {
    for (const auto& nb : graph.neighbors(k)) w(k) -= eta * nb.weight * std::sin(th(nb.node) - th(k));
  }
  return w;
}

Vec kuramoto_field(const Vec& theta, const Vec& natural_freqs, const Graph& graph, double eta) {
  Vec out = natural_freqs;
  for (Index k = 0; k < graph.n_nodes(); ++k) {
    for (const auto& nb : graph.neighbors(k)) out(k) += eta * nb.weight * std::sin(theta(nb.node) - theta(k));
  }
  return out;
}

Vec projected_field(const FieldContext& ctx, const Vec& v) {
  for (Index k = 0; k < ctx.n; ++k) {
    if (std::abs(ctx.v_star(k) - 1.0) > 1e-12) throw InputError("projected field requires unit voltage set-points");
    if (node_of(v, k).norm() < kPolarGuard) throw DomainError("projection undefined at origin");
  }
  Vec f = closed_loop_field(ctx, v);
  for (Index k = 0; k < ctx.n; ++k) {
    const Vec2 vk = node_of(v, k);
    const Mat2 proj = Mat2::Identity() - vk * vk.transpose() / vk.squaredNorm();
    f.segment<2>(2 * k) = proj * f.segment<2>(2 * k);
  }
  return f;
}

PolarRates droop_field(const FieldContext& ctx, const PolarState& state) {
  if (!ctx.admittance || !ctx.pure_inductive) throw InputError("droop form requires a purely inductive network");
  for (Index k = 0; k < ctx.n; ++k) {
    if (!(state.nu(k) >= kPolarGuard)) throw DomainError("polar chart singular");
  }
  const Vec v = to_cartesian(state);
  const Vec i = *ctx.admittance * v;
  const GainSet& g = ctx.gains;
  PolarRates out{Vec(ctx.n), Vec(ctx.n)};
  for (Index k = 0; k < ctx.n; ++k) {
    const Power pw = instantaneous_power(node_of(v, k), node_of(i, k));
    const double nu = state.nu(k);
    const double vs = ctx.v_star(k);
    out.nu_dot(k) = g.eta * (ctx.q_star(k) / (vs * vs) - pw.q / (nu * nu)) * nu + g.alpha / vs * (vs - nu) * nu;
    out.theta_dot(k) = g.omega0 + g.eta * (ctx.p_star(k) / (vs * vs) - pw.p / (nu * nu));
  }
  return out;
}

PolarRates polar_rates(const Vec& v, const Vec& v_dot) {
  const Index n = v.size() / 2;
  PolarRates out{Vec(n), Vec(n)};
  for (Index k = 0; k < n; ++k) {
    const Vec2 vk = node_of(v, k);
    const Vec2 dk = node_of(v_dot, k);
    const double nu = vk.norm();
    if (nu < kPolarGuard) throw DomainError("polar chart singular");
    out.nu_dot(k) = vk.dot(dk) / nu;
    out.theta_dot(k) = (vk.x() * dk.y() - vk.y() * dk.x()) / (nu * nu);
  }
  return out;
}

double instantaneous_frequency(const Vec2& v_k, const Vec2& v_dot_k) {
  const double n2 = v_k.squaredNorm();
  if (std::sqrt(n2) < kPolarGuard) return std::numeric_limits<double>::quiet_NaN();
  return (v_k.x() * v_dot_k.y() - v_k.y() * v_dot_k.x()) / n2;
}

}  // namespace oscgrid
