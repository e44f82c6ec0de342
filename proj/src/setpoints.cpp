#include "oscgrid/setpoints.hpp"

#include <cmath>

#include "oscgrid/errors.hpp"

namespace oscgrid {

void validate(const SetpointBundle& sp, Index n_nodes) {
  if (sp.p.size() != n_nodes || sp.q.size() != n_nodes || sp.v.size() != n_nodes) {
    throw InputError("set-point vectors must have one entry per node");
  }
  for (Index k = 0; k < n_nodes; ++k) {
    if (!(sp.v(k) > 0.0) || !std::isfinite(sp.v(k))) throw InputError("voltage set-points must be positive");
    if (!std::isfinite(sp.p(k)) || !std::isfinite(sp.q(k))) throw InputError("power set-points must be finite");
  }
  if (sp.theta && sp.theta->size() != n_nodes - 1) {
    throw InputError("angle set-points must have N-1 entries");
  }
}

Vec absolute_angles(const Vec& theta_rel) {
  Vec th = Vec::Zero(theta_rel.size() + 1);
  th.tail(theta_rel.size()) = theta_rel;
  return th;
}

NodePowers power_from_angles(const NetworkSpec& net, const Vec& v, const Vec& theta) {
  const Index n = net.n_nodes;
  if (v.size() != n || theta.size() != n - 1) throw InputError("power_from_angles: dimension mismatch");
  const Vec th = absolute_angles(theta);
  NodePowers out{Vec::Zero(n), Vec::Zero(n)};
  Vec p_kappa = Vec::Zero(n);
  Vec q_kappa = Vec::Zero(n);

  for (const auto& line : net.lines) {
    const double r = line.params.r;
    const double x = net.omega0 * line.params.ell;
    const double z2 = r * r + x * x;
    const double w = 1.0 / std::sqrt(z2);
    const double kap = std::atan2(x, r);
    for (int side = 0; side < 2; ++side) {
      const Index k = side == 0 ? line.a : line.b;
      const Index j = side == 0 ? line.b : line.a;
      const double t = wrap_angle(th(j) - th(k));  // keeps both forms accurate for far-off Newton iterates
      const double c = std::cos(t);
      const double s = std::sin(t);
      out.p(k) += (v(k) * v(k) * r - v(k) * v(j) * (r * c + x * s)) / z2;
      out.q(k) += (v(k) * v(k) * x - v(k) * v(j) * (x * c - r * s)) / z2;
      p_kappa(k) += w * v(k) * v(k) * (std::cos(kap) - v(j) / v(k) * std::cos(t - kap));
      q_kappa(k) += w * v(k) * v(k) * (std::sin(kap) + v(j) / v(k) * std::sin(t - kap));
    }
  }
  const double scale = std::max({1.0, out.p.cwiseAbs().maxCoeff(), out.q.cwiseAbs().maxCoeff()});
  detail::ensure((out.p - p_kappa).cwiseAbs().maxCoeff() <= 1e-10 * scale &&
                     (out.q - q_kappa).cwiseAbs().maxCoeff() <= 1e-10 * scale,
                 "power flow r/x form equals kappa form");
  return out;
}

namespace {

// d p_k / d theta_m for m = 2..N, rows k = 2..N.
Mat active_power_jacobian(const NetworkSpec& net, const Vec& v, const Vec& th) {
  const Index n = net.n_nodes;
  Mat jac_full = Mat::Zero(n, n);
  for (const auto& line : net.lines) {
    const double r = line.params.r;
    const double x = net.omega0 * line.params.ell;
    const double z2 = r * r + x * x;
    for (int side = 0; side < 2; ++side) {
      const Index k = side == 0 ? line.a : line.b;
      const Index j = side == 0 ? line.b : line.a;
      const double t = th(j) - th(k);
      const double d = -v(k) * v(j) * (-r * std::sin(t) + x * std::cos(t)) / z2;
      jac_full(k, j) += d;
      jac_full(k, k) -= d;
    }
  }
  return jac_full.bottomRightCorner(n - 1, n - 1);
}

// Rows of sin(kappa) p - cos(kappa) q = -sum_j v_k v_j sin(theta_jk) / z, which are odd in the
// angles like a lossless power flow. Only meaningful for a uniform r/x ratio.
Mat rotated_power_jacobian(const NetworkSpec& net, const Vec& v, const Vec& th) {
  const Index n = net.n_nodes;
  Mat jac_full = Mat::Zero(n, n);
  for (const auto& line : net.lines) {
    const double z = std::hypot(line.params.r, net.omega0 * line.params.ell);
    for (int side = 0; side < 2; ++side) {
      const Index k = side == 0 ? line.a : line.b;
      const Index j = side == 0 ? line.b : line.a;
      const double d = -v(k) * v(j) * std::cos(th(j) - th(k)) / z;
      jac_full(k, j) += d;
      jac_full(k, k) -= d;
    }
  }
  return jac_full.bottomRightCorner(n - 1, n - 1);
}

double full_residual(const NodePowers& got, const Vec& p, const Vec& q) {
  return std::max((got.p - p).cwiseAbs().maxCoeff(), (got.q - q).cwiseAbs().maxCoeff());
}

struct NewtonResult {
  Vec theta;
  int iterations;
  bool converged;
};

// Damped Newton from theta = 0 on a square system in the N-1 relative angles.
template <class Residual, class Jacobian>
NewtonResult newton(Index unknowns, Residual residual, Jacobian jacobian) {
  Vec theta = Vec::Zero(unknowns);
  Vec res = residual(theta);
  int iter = 0;
  while (unknowns > 0 && !(res.cwiseAbs().maxCoeff() < kNewtonTolerance)) {
    if (iter == kNewtonMaxIterations) return {theta, iter, false};
    ++iter;
    const Vec step = jacobian(absolute_angles(theta)).fullPivLu().solve(-res);
    if (!step.allFinite()) return {theta, iter, false};  // singular Jacobian
    const double norm0 = res.cwiseAbs().maxCoeff();
    double lambda = 1.0;
    Vec trial = theta + step;
    Vec trial_res = residual(trial);
    for (int halving = 0; halving < 30; ++halving) {
      if (trial_res.allFinite() && trial_res.cwiseAbs().maxCoeff() < norm0) break;
      lambda *= 0.5;
      trial = theta + lambda * step;
      trial_res = residual(trial);
    }
    theta = trial;
    res = trial_res;
  }
  return {theta, iter, true};
}

}  // namespace

AngleSolution solve_angles(const NetworkSpec& net, const Vec& p, const Vec& q, const Vec& v) {
  const Index n = net.n_nodes;
  if (p.size() != n || q.size() != n || v.size() != n) throw InputError("solve_angles: dimension mismatch");
  for (Index k = 0; k < n; ++k) {
    if (!(v(k) > 0.0)) throw InputError("voltage set-points must be positive");
  }

  const NewtonResult active = newton(
      n - 1, [&](const Vec& t) -> Vec { return power_from_angles(net, v, t).p.tail(n - 1) - p.tail(n - 1); },
      [&](const Vec& th) { return active_power_jacobian(net, v, th); });

  AngleSolution sol;
  auto adopt = [&](const NewtonResult& r) {
    sol.theta = r.theta.unaryExpr([](double a) { return wrap_angle(a); });
    sol.iterations = r.iterations;
    sol.residual = full_residual(power_from_angles(net, v, sol.theta), p, q);
  };
  adopt(active);

  // With losses the active-power rows alone can admit a second branch that misses the reactive
  // rows. Retry on the rotated rows, which pin the angles the way a lossless flow does.
  const RatioCheck ratio = check_uniform_ratio(net);
  if ((!active.converged || !(sol.residual <= kDefaultFeasibilityTolerance)) && ratio.uniform && n > 1) {
    const double sk = std::sin(ratio.kappa);
    const double ck = std::cos(ratio.kappa);
    const Vec target = (sk * p - ck * q).tail(n - 1);
    const NewtonResult rotated = newton(
        n - 1,
        [&](const Vec& t) -> Vec {
          const NodePowers got = power_from_angles(net, v, t);
          return (sk * got.p - ck * got.q).tail(n - 1) - target;
        },
        [&](const Vec& th) { return rotated_power_jacobian(net, v, th); });
    const AngleSolution first = sol;
    adopt(rotated);
    if (rotated.converged && sol.residual < first.residual) {
      sol.warnings.push_back("active-power rows reached a branch that misses the reactive rows; used rotated rows");
    } else {
      sol = first;
    }
  }

  if (!active.converged && sol.warnings.empty()) {
    throw InfeasibleError("infeasible or ill-conditioned set-points", sol.residual);
  }

  const Vec th = absolute_angles(sol.theta);
  for (const auto& line : net.lines) {
    if (std::abs(wrap_angle(th(line.b) - th(line.a))) >= kPi / 2.0) {
      sol.warnings.push_back("outside Condition 1 branch on line (" + std::to_string(line.a + 1) + ", " +
                             std::to_string(line.b + 1) + ")");
    }
  }
  return sol;
}

double feasibility_residual(const NetworkSpec& net, const SetpointBundle& sp) {
  if (!sp.theta) throw InputError("feasibility_residual requires angle set-points");
  return full_residual(power_from_angles(net, sp.v, *sp.theta), sp.p, sp.q);
}

std::vector<Mat2> k_from_angles(const Graph& graph, const Vec& v, const Vec& theta_rel) {
  const Index n = graph.n_nodes();
  const Vec th = absolute_angles(theta_rel);
  std::vector<Mat2> k_mats(static_cast<std::size_t>(n), Mat2::Zero());
  for (Index k = 0; k < n; ++k) {
    for (const auto& nb : graph.neighbors(k)) {
      k_mats[static_cast<std::size_t>(k)] +=
          nb.weight * (Mat2::Identity() - v(nb.node) / v(k) * rotation(th(nb.node) - th(k)));
    }
  }
  return k_mats;
}

Mat2 k_from_power(double p, double q, double v, double kappa) {
  if (!(v > 0.0)) throw InputError("voltage set-point must be positive");
  Mat2 m;
  m << p, q, -q, p;
  return rotation(kappa) * m / (v * v);
}

}  // namespace oscgrid
