#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oscgrid/analysis.hpp"
#include "oscgrid/controller.hpp"
#include "oscgrid/network.hpp"
#include "oscgrid/setpoints.hpp"

namespace oscgrid {

enum class Frame { Static, Rotating };
enum class FieldKind { Cartesian, Projected, PolarDroop };

struct NodeUpdate {
  Index node = 0;
  std::optional<double> p;
  std::optional<double> q;
  std::optional<double> v;
};

struct SetpointEvent {
  double time = 0.0;  // seconds
  std::vector<NodeUpdate> updates;
};

struct IntegratorConfig {
  double t_end = 1.0;
  double dt = 1e-5;
  Frame frame = Frame::Static;
  FieldKind field = FieldKind::Cartesian;
  int record_every = 1;
};

/// Complete experiment description. The first event must sit at t = 0 and
/// give p, q and v for every node; later events may touch any subset.
struct Scenario {
  NetworkSpec net;
  GainSet gains;
  Vec initial_state;  // static-frame alpha-beta, 2N entries
  std::vector<SetpointEvent> events;
  IntegratorConfig integrator;
  std::optional<double> controller_kappa;
};

void validate(const Scenario& s);

/// Recorded samples; row s of each matrix belongs to times(s).
/// States are always reported in the static frame.
struct Trajectory {
  Vec times;
  Mat states;        // S x 2N
  Mat magnitude;     // S x N
  Mat frequency_hz;  // S x N, NaN where |v_k| is below the polar guard
  Mat p;             // S x N
  Mat q;             // S x N
  Vec lyapunov;      // S, NaN when the dispatch has no feasible angles
  Vec dist_s;        // S
  Mat dist_a;        // S x N
  Mat w;             // S x N

  Index n_nodes() const { return magnitude.cols(); }
  Index n_samples() const { return times.size(); }
};

// Integrates one context from t = 0 with fixed-step RK4. `v0` is in the
// static frame. Diagnostics use ctx.theta when present.
Trajectory simulate(const FieldContext& ctx, const Vec& v0, const IntegratorConfig& cfg);

// Full scenario with events. Each dispatch rebuilds K from the new power set-points.
Trajectory integrate(const Scenario& scenario);

// v = R(omega0 t) v_bar per node, and its inverse.
Vec to_static_frame(const Vec& v_bar, double omega0, double t);
Vec to_rotating_frame(const Vec& v, double omega0, double t);

SetpointBundle setpoints_at(const Scenario& s, std::size_t event_index);

// Three-inverter black-start / dispatch / re-dispatch experiment.
NetworkSpec case_study_network();
SetpointBundle case_study_setpoints(int column);  // 1 or 2
Scenario case_study(Frame frame = Frame::Rotating);

struct BatchResult {
  std::optional<Trajectory> trajectory;
  int exit_code = 0;  // 0 ok, 2 input error, 3 infeasible, 4 divergence
  std::string error;
};

// Runs scenarios concurrently on at most `max_threads` threads (0 means the
// OpenMP default). Results are in input order and identical to the serial run.
std::vector<BatchResult> integrate_batch(const std::vector<Scenario>& scenarios, int max_threads = 0);
std::vector<BatchResult> integrate_batch_serial(const std::vector<Scenario>& scenarios);

// OSCGRID_THREADS as a positive integer, 0 when unset or invalid.
int thread_cap_from_env();

}  // namespace oscgrid
