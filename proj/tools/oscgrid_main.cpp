// oscgrid command-line front end.
//
// Exit codes: 0 ok, 1 stability condition unsatisfied, 2 input error,
// 3 infeasible set-points, 4 divergence.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oscgrid/analysis.hpp"
#include "oscgrid/errors.hpp"
#include "oscgrid/scenario_io.hpp"
#include "oscgrid/setpoints.hpp"
#include "oscgrid/sim.hpp"
#include "oscgrid/trajectory_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace oscgrid;

namespace {

enum Exit { kOk = 0, kUnsatisfied = 1, kInputError = 2, kInfeasible = 3, kDivergence = 4 };

// Input errors dominate, then infeasibility, then an unsatisfied condition.
int worst(int a, int b) {
  auto rank = [](int c) {
    switch (c) {
      case kInputError: return 4;
      case kInfeasible: return 3;
      case kDivergence: return 2;
      case kUnsatisfied: return 1;
      default: return 0;
    }
  };
  return rank(a) >= rank(b) ? a : b;
}

std::vector<double> degrees(const Vec& theta) {
  std::vector<double> out;
  for (Index i = 0; i < theta.size(); ++i) out.push_back(deg(theta(i)));
  return out;
}

struct Dispatch {
  double time;
  SetpointBundle sp;
};

std::vector<Dispatch> dispatches_of(const io::Document& doc) {
  std::vector<Dispatch> out;
  if (!doc.events.empty()) {
    Scenario probe;
    probe.net = doc.net;
    probe.events = doc.events;
    for (std::size_t e = 0; e < doc.events.size(); ++e) out.push_back({doc.events[e].time, setpoints_at(probe, e)});
  } else if (doc.setpoints) {
    out.push_back({0.0, *doc.setpoints});
  } else {
    throw InputError("schema error at /: need \"events\" or \"setpoints\"");
  }
  for (const auto& d : out) validate(d.sp, doc.net.n_nodes);
  return out;
}

int cmd_check(const std::string& file, double tol) {
  const io::Document doc = io::load_document(file);
  if (!doc.gains) throw InputError("schema error at /: missing key \"gains\"");
  const RatioCheck ratio = check_uniform_ratio(doc.net);
  if (!ratio.uniform) (void)network_laplacian(doc.net);  // throws, naming the lines
  const Graph graph = weighted_graph(doc.net);
  const bool inductive = is_pure_inductive(doc.net);

  int code = kOk;
  json report = json::array();
  for (const Dispatch& d : dispatches_of(doc)) {
    json entry = {{"time_s", d.time}};
    Vec theta;
    double residual = 0.0;
    bool feasible = true;
    try {
      if (d.sp.theta) {
        theta = *d.sp.theta;
        residual = feasibility_residual(doc.net, d.sp);
      } else {
        const AngleSolution sol = solve_angles(doc.net, d.sp.p, d.sp.q, d.sp.v);
        theta = sol.theta;
        residual = sol.residual;
      }
      feasible = residual <= tol;
    } catch (const InfeasibleError& e) {
      feasible = false;
      residual = e.residual();
    }
    entry["feasible"] = feasible;
    entry["residual"] = residual;
    if (!feasible) {
      std::fprintf(stderr, "t = %g s: infeasible set-points (residual %.3e > %.1e)\n", d.time, residual, tol);
      code = worst(code, kInfeasible);
      report.push_back(entry);
      continue;
    }
    const StabilityReport rep = check_condition1(graph, d.sp.v, theta, doc.gains->eta, doc.gains->alpha, inductive);
    entry["theta_deg"] = degrees(theta);
    entry["lhs"] = rep.lhs;
    entry["rhs"] = rep.rhs;
    entry["heterogeneity"] = rep.heterogeneity;
    entry["lambda2"] = rep.lambda2;
    entry["decay_rate"] = rep.decay_rate;
    entry["satisfied"] = rep.satisfied;
    entry["angles_in_range"] = rep.angles_in_range;
    entry["angles_in_range_abs"] = rep.angles_in_range_abs;
    if (rep.inductive_form_lhs) entry["inductive_form_lhs"] = *rep.inductive_form_lhs;
    entry["warnings"] = rep.warnings;
    std::fprintf(stderr, "t = %g s: lhs %.6g %s rhs %.6g -> %s (decay rate %.6g)\n", d.time, rep.lhs,
                 rep.satisfied ? "<" : ">=", rep.rhs, rep.satisfied ? "satisfied" : "NOT satisfied", rep.decay_rate);
    for (const auto& w : rep.warnings) std::fprintf(stderr, "  warning: %s\n", w.c_str());
    if (!rep.satisfied) code = worst(code, kUnsatisfied);
    report.push_back(entry);
  }
  const json out = {{"dispatches", report}, {"all_satisfied", code == kOk}};
  std::cout << out.dump(2) << '\n';
  return code;
}

int cmd_solve(const std::string& file, double tol) {
  const io::Document doc = io::load_document(file);
  if (!doc.setpoints) throw InputError("schema error at /: missing key \"setpoints\"");
  const SetpointBundle& sp = *doc.setpoints;
  json out;
  int code = kOk;
  try {
    const AngleSolution sol = solve_angles(doc.net, sp.p, sp.q, sp.v);
    out["theta_deg"] = degrees(sol.theta);
    out["theta_rad"] = std::vector<double>(sol.theta.data(), sol.theta.data() + sol.theta.size());
    out["residual"] = sol.residual;
    out["iterations"] = sol.iterations;
    out["warnings"] = sol.warnings;
    out["feasible"] = sol.residual <= tol;
    if (sol.residual > tol) code = kInfeasible;
  } catch (const InfeasibleError& e) {
    out["feasible"] = false;
    out["residual"] = e.residual();
    out["error"] = e.what();
    code = kInfeasible;
  }
  if (sp.theta) out["given_angles_residual"] = feasibility_residual(doc.net, sp);
  out["tolerance"] = tol;
  std::cout << out.dump(2) << '\n';
  if (code == kInfeasible) std::fprintf(stderr, "infeasible set-points (residual %.3e)\n", out["residual"].get<double>());
  return code;
}

void apply_overrides(Scenario& s, const std::string& frame, double dt) {
  if (frame == "static") s.integrator.frame = Frame::Static;
  if (frame == "rotating") s.integrator.frame = Frame::Rotating;
  if (dt > 0.0) s.integrator.dt = dt;
}

void write_outputs(const fs::path& dir, const Trajectory& traj) {
  fs::create_directories(dir);
  io::write_trajectory_csv((dir / "trajectory.csv").string(), traj);
  io::write_plot_script((dir / "fig5.gp").string(), traj.n_nodes());
}

int run_scenarios(const std::vector<std::pair<std::string, Scenario>>& named, const fs::path& out_dir) {
  std::vector<Scenario> scenarios;
  for (const auto& [name, s] : named) scenarios.push_back(s);
  const auto results = integrate_batch(scenarios, thread_cap_from_env());
  int code = kOk;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const fs::path dir = named.size() == 1 ? out_dir : out_dir / named[i].first;
    if (r.trajectory) {
      write_outputs(dir, *r.trajectory);
      std::fprintf(stderr, "%s: %ld samples -> %s\n", named[i].first.c_str(),
                   static_cast<long>(r.trajectory->n_samples()), (dir / "trajectory.csv").string().c_str());
    } else {
      std::fprintf(stderr, "%s: %s\n", named[i].first.c_str(), r.error.c_str());
    }
    code = worst(code, r.exit_code);
  }
  return code;
}

int cmd_simulate(const std::vector<std::string>& files, const std::string& out, const std::string& frame, double dt) {
  std::vector<std::pair<std::string, Scenario>> named;
  for (const auto& f : files) {
    Scenario s = io::to_scenario(io::load_document(f));
    apply_overrides(s, frame, dt);
    validate(s);
    named.emplace_back(fs::path(f).stem().string(), std::move(s));
  }
  return run_scenarios(named, out);
}

int cmd_case_study(const std::string& out, const std::string& frame, double dt) {
  Scenario s = case_study(frame == "static" ? Frame::Static : Frame::Rotating);
  apply_overrides(s, frame, dt);
  validate(s);
  return run_scenarios({{"case-study", s}}, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis of synchronizing grid-forming inverter networks"};
  app.require_subcommand(1);

  std::string file;
  std::vector<std::string> files;
  std::string out_dir = ".";
  std::string frame;
  double dt = 0.0;
  double tol = kDefaultFeasibilityTolerance;

  auto* check = app.add_subcommand("check", "Certify the stability condition for every dispatch in FILE");
  check->add_option("FILE", file, "scenario or set-point JSON")->required();
  check->add_option("--tol", tol, "feasibility tolerance [p.u.]");

  auto* solve = app.add_subcommand("solve", "Solve the power flow for the set-points in FILE");
  solve->add_option("FILE", file, "set-point JSON")->required();
  solve->add_option("--tol", tol, "feasibility tolerance [p.u.]");

  auto* simulate = app.add_subcommand("simulate", "Integrate one or more scenarios");
  simulate->add_option("FILE", files, "scenario JSON files")->required();
  for (auto* sub : {simulate, app.add_subcommand("case-study", "Run the built-in three-inverter experiment")}) {
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--dt", dt, "step size [s]")->check(CLI::PositiveNumber);
    sub->add_option("--frame", frame, "integration frame")->check(CLI::IsMember({"static", "rotating"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (check->parsed()) return cmd_check(file, tol);
    if (solve->parsed()) return cmd_solve(file, tol);
    if (simulate->parsed()) return cmd_simulate(files, out_dir, frame, dt);
    return cmd_case_study(out_dir, frame, dt);
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "error: %s (residual %.3e)\n", e.what(), e.residual());
    return kInfeasible;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s (last finite time %g s)\n", e.what(), e.last_finite_time());
    return kDivergence;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDivergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  }
}
