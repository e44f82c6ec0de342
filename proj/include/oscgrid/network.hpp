#pragma once

#include <vector>

#include "oscgrid/graph.hpp"
#include "oscgrid/linalg.hpp"

namespace oscgrid {

// Per-unit line parameters. The reactance at nominal frequency is omega0 * ell.
struct LineParams {
  double r = 0.0;
  double ell = 0.0;
};

struct Line {
  Index a = 0;
  Index b = 0;
  LineParams params;
};

// Base quantities used only for unit conversion at the I/O boundary.
struct Bases {
  double power_va = 1e9;
  double voltage_v = 320e3;
  double frequency_hz = 50.0;

  double impedance_ohm() const { return voltage_v * voltage_v / power_va; }
  double angular_frequency() const { return 2.0 * kPi * frequency_hz; }
};

struct NetworkSpec {
  Index n_nodes = 0;
  std::vector<Line> lines;
  double omega0 = 2.0 * kPi * 50.0;  // rad/s
  Bases bases;
};

// Throws InputError for a disconnected topology or a degenerate/negative line.
void validate(const NetworkSpec& net);

// w = 1 / sqrt(r^2 + omega0^2 ell^2).
double line_weight(const LineParams& line, double omega0);

// kappa = atan(rho * omega0); rho = +inf gives pi/2.
double kappa(double rho, double omega0);

struct RatioCheck {
  bool uniform = false;
  double rho = 0.0;    // ell / r, +inf for purely inductive networks
  double kappa = 0.0;
  std::vector<Index> offending_lines;  // indices into NetworkSpec::lines
};

// Uniform ell/r ratio across all lines, relative tolerance 1e-9.
RatioCheck check_uniform_ratio(const NetworkSpec& net);

bool is_pure_inductive(const NetworkSpec& net);

Graph weighted_graph(const NetworkSpec& net);

// 2N x 2N real admittance matrix B (R_T + omega0 J L_T)^{-1} B^T, assembled line by line.
Mat admittance_matrix(const NetworkSpec& net);

struct NetworkLaplacian {
  Mat extended;  // R(kappa) Y, equal to L (x) I2 of `graph`
  Graph graph;
  double kappa;
};

// Requires a uniform ell/r ratio; throws InputError naming the offending lines otherwise.
NetworkLaplacian network_laplacian(const NetworkSpec& net);

// y_k = R(kappa) i_o,k
Vec2 local_output(const Vec2& current, double kappa);
Vec local_outputs(const Vec& currents, double kappa);

struct Power {
  double p = 0.0;
  double q = 0.0;
};

// p = v^T i, q = v^T J i.
Power instantaneous_power(const Vec2& v, const Vec2& i);

// Amplitude-preserving Clarke transform (a, b, c) -> (alpha, beta, gamma).
Vec3 clarke(const Vec3& abc);
Vec3 inverse_clarke(const Vec3& alpha_beta_gamma);

namespace units {

inline double impedance_to_pu(double ohm, const Bases& b) { return ohm / b.impedance_ohm(); }
inline double power_to_pu(double watt, const Bases& b) { return watt / b.power_va; }
inline double voltage_to_pu(double volt, const Bases& b) { return volt / b.voltage_v; }
inline double power_from_pu(double pu, const Bases& b) { return pu * b.power_va; }
inline double voltage_from_pu(double pu, const Bases& b) { return pu * b.voltage_v; }

// Per-unit inductance for time in seconds: ell = x_pu / omega0.
inline double inductance_from_reactance(double x_pu, double omega0) { return x_pu / omega0; }

}  // namespace units

}  // namespace oscgrid
