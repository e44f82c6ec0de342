#include "oscgrid/network.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "oscgrid/errors.hpp"

namespace oscgrid {

namespace {

void validate_line(const LineParams& line) {
  if (!(line.r >= 0.0) || !(line.ell >= 0.0) || !std::isfinite(line.r) || !std::isfinite(line.ell)) {
    throw InputError("line parameters must be finite and non-negative");
  }
  if (line.r == 0.0 && line.ell == 0.0) throw InputError("degenerate line: r = ell = 0");
}

std::string line_name(const Line& l) {
  return "(" + std::to_string(l.a + 1) + ", " + std::to_string(l.b + 1) + ")";
}

}  // namespace

void validate(const NetworkSpec& net) {
  if (!(net.omega0 > 0.0) || !std::isfinite(net.omega0)) throw InputError("omega0 must be positive");
  for (const auto& l : net.lines) validate_line(l.params);
  (void)weighted_graph(net);
}

double line_weight(const LineParams& line, double omega0) {
  validate_line(line);
  return 1.0 / std::hypot(line.r, omega0 * line.ell);
}

double kappa(double rho, double omega0) {
  if (std::isnan(rho) || rho < 0.0) throw InputError("inductance/resistance ratio must be non-negative");
  if (std::isinf(rho)) return kPi / 2.0;
  return std::atan(rho * omega0);
}

RatioCheck check_uniform_ratio(const NetworkSpec& net) {
  RatioCheck out;
  if (net.lines.empty()) {
    out.uniform = true;
    return out;
  }
  // Compare ell_e * r_0 against ell_0 * r_e so purely inductive lines need no special case.
  const auto& ref = net.lines.front().params;
  for (std::size_t e = 0; e < net.lines.size(); ++e) {
    const auto& p = net.lines[e].params;
    const double lhs = p.ell * ref.r;
    const double rhs = ref.ell * p.r;
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (std::abs(lhs - rhs) > 1e-9 * scale) out.offending_lines.push_back(static_cast<Index>(e));
  }
  out.uniform = out.offending_lines.empty();
  out.rho = ref.r == 0.0 ? std::numeric_limits<double>::infinity() : ref.ell / ref.r;
  out.kappa = kappa(out.rho, net.omega0);
  return out;
}

bool is_pure_inductive(const NetworkSpec& net) {
  for (const auto& l : net.lines) {
    if (l.params.r != 0.0) return false;
  }
  return true;
}

Graph weighted_graph(const NetworkSpec& net) {
  std::vector<Edge> edges;
  edges.reserve(net.lines.size());
  for (const auto& l : net.lines) edges.push_back({l.a, l.b, line_weight(l.params, net.omega0)});
  return Graph(net.n_nodes, std::move(edges));
}

Mat admittance_matrix(const NetworkSpec& net) {
  const Index n = net.n_nodes;
  Mat y = Mat::Zero(2 * n, 2 * n);
  const Mat2 j = j_matrix();
  for (const auto& l : net.lines) {
    const double w = line_weight(l.params, net.omega0);
    // (r I + omega0 ell J)^{-1} = w^2 (r I - omega0 ell J)
    const Mat2 block = w * w * (l.params.r * Mat2::Identity() - net.omega0 * l.params.ell * j);
    y.block<2, 2>(2 * l.a, 2 * l.a) += block;
    y.block<2, 2>(2 * l.b, 2 * l.b) += block;
    y.block<2, 2>(2 * l.a, 2 * l.b) -= block;
    y.block<2, 2>(2 * l.b, 2 * l.a) -= block;
  }
  return y;
}

NetworkLaplacian network_laplacian(const NetworkSpec& net) {
  const RatioCheck ratio = check_uniform_ratio(net);
  if (!ratio.uniform) {
    std::string msg = "non-uniform inductance/resistance ratio on lines";
    for (Index e : ratio.offending_lines) msg += " " + line_name(net.lines[static_cast<std::size_t>(e)]);
    throw InputError(msg);
  }
  Graph graph = weighted_graph(net);
  Mat extended = block_rotation(net.n_nodes, ratio.kappa) * admittance_matrix(net);

  const Mat reference = extend(laplacian(graph));
  const double scale = std::max(1.0, reference.cwiseAbs().maxCoeff());
  detail::ensure((extended - reference).cwiseAbs().maxCoeff() <= 1e-9 * scale,
                 "R(kappa) Y equals the extended graph Laplacian");
  return {std::move(extended), std::move(graph), ratio.kappa};
}

Vec2 local_output(const Vec2& current, double kappa) { return rotation(kappa) * current; }

Vec local_outputs(const Vec& currents, double kappa) {
  const Mat2 r = rotation(kappa);
  Vec y(currents.size());
  for (Index k = 0; k < currents.size() / 2; ++k) y.segment<2>(2 * k) = r * currents.segment<2>(2 * k);
  return y;
}

Power instantaneous_power(const Vec2& v, const Vec2& i) {
  return {v.dot(i), v.dot(j_matrix() * i)};
}

namespace {

Mat3 clarke_matrix() {
  const double s = std::sqrt(3.0) / 2.0;
  Mat3 m;
  m << 1.0, -0.5, -0.5,
       0.0, s, -s,
       0.5, 0.5, 0.5;
  return (2.0 / 3.0) * m;
}

}  // namespace

Vec3 clarke(const Vec3& abc) { return clarke_matrix() * abc; }

Vec3 inverse_clarke(const Vec3& alpha_beta_gamma) {
  static const Mat3 inverse = clarke_matrix().inverse();
  return inverse * alpha_beta_gamma;
}

}  // namespace oscgrid
