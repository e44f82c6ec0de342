#include "generators.hpp"

#include <algorithm>
#include <cmath>

#include "oscgrid/analysis.hpp"

namespace testing_support {

using namespace oscgrid;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

namespace {

std::vector<std::pair<Index, Index>> random_topology(Rng& rng, Index n, double extra_prob) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index k = 1; k < n; ++k) {
    const auto parent = std::uniform_int_distribution<Index>(0, k - 1)(rng);
    pairs.emplace_back(parent, k);
  }
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      const bool present = std::any_of(pairs.begin(), pairs.end(), [&](auto& p) {
        return (p.first == a && p.second == b) || (p.first == b && p.second == a);
      });
      if (!present && uniform(rng, 0.0, 1.0) < extra_prob) pairs.emplace_back(a, b);
    }
  }
  return pairs;
}

}  // namespace

Graph random_connected_graph(Rng& rng, Index n, double w_lo, double w_hi, double extra_prob) {
  std::vector<Edge> edges;
  for (auto [a, b] : random_topology(rng, n, extra_prob)) edges.push_back({a, b, uniform(rng, w_lo, w_hi)});
  return Graph(n, edges);
}

NetworkSpec random_network(Rng& rng, Index n, double rho_omega0, double omega0) {
  NetworkSpec net;
  net.n_nodes = n;
  net.omega0 = omega0;
  for (auto [a, b] : random_topology(rng, n, 0.4)) {
    const double x = uniform(rng, 0.05, 0.5);
    const double r = rho_omega0 < 0.0 ? 0.0 : x / rho_omega0;
    net.lines.push_back(Line{a, b, LineParams{r, x / omega0}});
  }
  return net;
}

Vec random_vector(Rng& rng, Index n, double lo, double hi) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

Vec random_state(Rng& rng, Index n, double scale) {
  std::normal_distribution<double> g;
  Vec v(2 * n);
  for (Index i = 0; i < v.size(); ++i) v(i) = scale * g(rng);
  return v;
}

Vec target_point(const Vec& v_star, const Vec& theta_rel, double phase, double c) {
  const Index n = v_star.size();
  Vec v(2 * n);
  for (Index k = 0; k < n; ++k) {
    const double a = phase + (k == 0 ? 0.0 : theta_rel(k - 1));
    v(2 * k) = c * v_star(k) * std::cos(a);
    v(2 * k + 1) = c * v_star(k) * std::sin(a);
  }
  return v;
}

std::vector<CorpusScenario> condition_corpus(Rng& rng, int count) {
  std::vector<CorpusScenario> out;
  while (static_cast<int>(out.size()) < count) {
    const auto n = std::uniform_int_distribution<Index>(3, 5)(rng);
    const Graph g = random_connected_graph(rng, n, 2.0, 6.0, 0.8);
    const Vec v_star = random_vector(rng, n, 0.97, 1.03);
    const Vec theta = random_vector(rng, n - 1, 0.0, 0.15);
    const double eta = 1.0;
    const StabilityReport probe = check_condition1(g, v_star, theta, eta, 1.0);
    const double lo = 1.1 * v_star.maxCoeff();
    const double hi = 0.9 * (probe.rhs - probe.heterogeneity);
    if (hi <= lo) continue;
    const double alpha = eta * uniform(rng, lo, hi);
    const StabilityReport rep = check_condition1(g, v_star, theta, eta, alpha);
    if (!rep.satisfied) continue;
    out.push_back({FieldContext::from_graph(g, v_star, theta, GainSet{eta, alpha, 2.0 * kPi * 50.0}), v_star, theta,
                   rep.rhs, rep.lhs});
  }
  return out;
}

}  // namespace testing_support
