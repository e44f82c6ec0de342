#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oscgrid/graph.hpp"
#include "oscgrid/network.hpp"

namespace oscgrid {

// Per-node power and voltage set-points, optionally with the angles of nodes
// 2..N relative to node 1 (radians).
struct SetpointBundle {
  Vec p;
  Vec q;
  Vec v;
  std::optional<Vec> theta;

  Index size() const { return v.size(); }
};

void validate(const SetpointBundle& sp, Index n_nodes);

struct NodePowers {
  Vec p;
  Vec q;
};

// Steady-state power flow for magnitudes v and relative angles theta (length N-1).
// Evaluated in the r/x form and cross-checked against the kappa form.
NodePowers power_from_angles(const NetworkSpec& net, const Vec& v, const Vec& theta);

// Absolute angles (theta_1 = 0) from the N-1 relative ones.
Vec absolute_angles(const Vec& theta_rel);

struct AngleSolution {
  Vec theta;           // relative to node 1, wrapped to (-pi, pi]
  double residual;     // infinity norm over all 2N power-flow equations
  int iterations;
  std::vector<std::string> warnings;
};

// Newton iteration on the active-power rows of nodes 2..N (node 1 is the slack), started at zero.
// If that misses the reactive rows and the r/x ratio is uniform, the rotated rows
// sin(kappa) p - cos(kappa) q are solved instead and the better fit is kept.
// Throws InfeasibleError when neither converges.
AngleSolution solve_angles(const NetworkSpec& net, const Vec& p, const Vec& q, const Vec& v);

double feasibility_residual(const NetworkSpec& net, const SetpointBundle& sp);

// Per-node synchronizing matrices from angles and graph weights.
std::vector<Mat2> k_from_angles(const Graph& graph, const Vec& v, const Vec& theta_rel);

// Same matrix from local power set-points only.
Mat2 k_from_power(double p, double q, double v, double kappa);

inline constexpr double kDefaultFeasibilityTolerance = 5e-3;
inline constexpr double kNewtonTolerance = 1e-10;
inline constexpr int kNewtonMaxIterations = 50;

}  // namespace oscgrid
