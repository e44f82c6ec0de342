#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace testing_support::oracle {

Mat laplacian_by_summation(Index n, const std::vector<oscgrid::Edge>& edges) {
  Mat l = Mat::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      double s = 0.0;
      for (const auto& e : edges) {
        const bool incident_j = e.a == j || e.b == j;
        if (j == k && incident_j) s += e.weight;
        if (j != k && ((e.a == j && e.b == k) || (e.a == k && e.b == j))) s -= e.weight;
      }
      l(j, k) = s;
    }
  }
  return l;
}

std::vector<double> symmetric_3x3_eigenvalues(const Mat& m) {
  // det(lambda I - M) = lambda^3 + a lambda^2 + b lambda + c
  const double a = -m.trace();
  const double b = m(0, 0) * m(1, 1) + m(0, 0) * m(2, 2) + m(1, 1) * m(2, 2) - m(0, 1) * m(1, 0) -
                   m(0, 2) * m(2, 0) - m(1, 2) * m(2, 1);
  const double c = -m.determinant();
  // Depressed cubic t^3 + p t + q with lambda = t - a / 3; three real roots.
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  std::vector<double> roots;
  const double r = 2.0 * std::sqrt(std::max(0.0, -p / 3.0));
  const double arg = r == 0.0 ? 0.0 : std::clamp(3.0 * q / (p * r), -1.0, 1.0);
  const double phi = std::acos(arg) / 3.0;
  for (int i = 0; i < 3; ++i) roots.push_back(r * std::cos(phi - 2.0 * M_PI * i / 3.0) - a / 3.0);
  std::sort(roots.begin(), roots.end());
  return roots;
}

Mat admittance_via_complex(const oscgrid::NetworkSpec& net) {
  using C = std::complex<double>;
  const Index n = net.n_nodes;
  std::vector<C> y(static_cast<std::size_t>(n * n), C(0.0, 0.0));
  auto at = [&](Index i, Index j) -> C& { return y[static_cast<std::size_t>(i * n + j)]; };
  for (const auto& l : net.lines) {
    const C ye = 1.0 / C(l.params.r, net.omega0 * l.params.ell);
    at(l.a, l.a) += ye;
    at(l.b, l.b) += ye;
    at(l.a, l.b) -= ye;
    at(l.b, l.a) -= ye;
  }
  Mat out(2 * n, 2 * n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const C z = at(i, j);
      out(2 * i, 2 * j) = z.real();
      out(2 * i, 2 * j + 1) = -z.imag();
      out(2 * i + 1, 2 * j) = z.imag();
      out(2 * i + 1, 2 * j + 1) = z.real();
    }
  }
  return out;
}

void complex_power_flow(const oscgrid::NetworkSpec& net, const Vec& v, const Vec& theta_rel, Vec& p, Vec& q) {
  using C = std::complex<double>;
  const Index n = net.n_nodes;
  std::vector<C> volt(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) volt[static_cast<std::size_t>(k)] = std::polar(v(k), k == 0 ? 0.0 : theta_rel(k - 1));
  std::vector<C> cur(static_cast<std::size_t>(n), C(0.0, 0.0));
  for (const auto& l : net.lines) {
    const C ye = 1.0 / C(l.params.r, net.omega0 * l.params.ell);
    const C flow = ye * (volt[static_cast<std::size_t>(l.a)] - volt[static_cast<std::size_t>(l.b)]);
    cur[static_cast<std::size_t>(l.a)] += flow;
    cur[static_cast<std::size_t>(l.b)] -= flow;
  }
  p.resize(n);
  q.resize(n);
  for (Index k = 0; k < n; ++k) {
    const C s = volt[static_cast<std::size_t>(k)] * std::conj(cur[static_cast<std::size_t>(k)]);
    p(k) = s.real();
    q(k) = s.imag();
  }
}

double squared_distance_to_phase_set(const Vec& v, const Vec& v_star, const Vec& theta_rel) {
  const Index n = v_star.size();
  Mat basis(2 * n, 2);
  for (Index k = 0; k < n; ++k) {
    const double a = k == 0 ? 0.0 : theta_rel(k - 1);
    basis(2 * k, 0) = v_star(k) * std::cos(a);
    basis(2 * k + 1, 0) = v_star(k) * std::sin(a);
    basis(2 * k, 1) = -v_star(k) * std::sin(a);
    basis(2 * k + 1, 1) = v_star(k) * std::cos(a);
  }
  const Eigen::Vector2d c = (basis.transpose() * basis).ldlt().solve(basis.transpose() * v);
  return (v - basis * c).squaredNorm();
}

Vec polar_rates_by_hand(const Vec& v, const Vec& v_dot) {
  const Index n = v.size() / 2;
  Vec out(2 * n);
  for (Index k = 0; k < n; ++k) {
    const double x = v(2 * k), y = v(2 * k + 1), dx = v_dot(2 * k), dy = v_dot(2 * k + 1);
    const double r2 = x * x + y * y;
    out(k) = (x * dx + y * dy) / std::sqrt(r2);
    out(n + k) = (x * dy - y * dx) / r2;
  }
  return out;
}

Mat kuramoto_rk4(const Vec& theta0, const Vec& omega, const oscgrid::Graph& graph, double eta, double dt, int steps) {
  const Index n = theta0.size();
  auto f = [&](const Vec& th) {
    Vec d = omega;
    for (const auto& e : graph.edges()) {
      const double s = std::sin(th(e.b) - th(e.a));
      d(e.a) += eta * e.weight * s;
      d(e.b) -= eta * e.weight * s;
    }
    return d;
  };
  Mat out(steps + 1, n);
  Vec th = theta0;
  out.row(0) = th.transpose();
  for (int i = 0; i < steps; ++i) {
    const Vec k1 = f(th);
    const Vec k2 = f(th + 0.5 * dt * k1);
    const Vec k3 = f(th + 0.5 * dt * k2);
    const Vec k4 = f(th + dt * k3);
    th += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    out.row(i + 1) = th.transpose();
  }
  return out;
}

Vec rk4(const std::function<Vec(const Vec&)>& f, Vec y, double dt, int steps) {
  for (int i = 0; i < steps; ++i) {
    const Vec k1 = f(y);
    const Vec k2 = f(y + 0.5 * dt * k1);
    const Vec k3 = f(y + 0.5 * dt * k2);
    const Vec k4 = f(y + dt * k3);
    y += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

double richardson_order(const Vec& coarse, const Vec& mid, const Vec& fine) {
  return std::log2((coarse - mid).norm() / (mid - fine).norm());
}

}  // namespace testing_support::oracle
