#include "oscgrid/sim.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>

#include "oscgrid/errors.hpp"
#include "oscgrid/kernels.hpp"

namespace oscgrid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec rotate_nodes(const Vec& v, double angle) {
  const Mat2 r = rotation(angle);
  Vec out(v.size());
  for (Index k = 0; k < v.size() / 2; ++k) out.segment<2>(2 * k) = r * v.segment<2>(2 * k);
  return out;
}

using FieldFn = std::function<void(const Vec&, Vec&)>;

// Classical RK4 step; the field is autonomous within a segment.
void rk4_step(const FieldFn& f, Vec& y, double h, Vec& k1, Vec& k2, Vec& k3, Vec& k4, Vec& tmp) {
  f(y, k1);
  tmp = y + 0.5 * h * k1;
  f(tmp, k2);
  tmp = y + 0.5 * h * k2;
  f(tmp, k3);
  tmp = y + h * k3;
  f(tmp, k4);
  y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Recorder {
  Index n;
  std::vector<double> times;
  std::vector<Vec> rows_state, rows_mag, rows_freq, rows_p, rows_q, rows_dist_a, rows_w;
  std::vector<double> lyap, dist_s;

  Trajectory finish() const {
    const auto s = static_cast<Index>(times.size());
    Trajectory t;
    t.times = Eigen::Map<const Vec>(times.data(), s);
    t.lyapunov = Eigen::Map<const Vec>(lyap.data(), s);
    t.dist_s = Eigen::Map<const Vec>(dist_s.data(), s);
    auto stack = [s](const std::vector<Vec>& rows, Index cols) {
      Mat m(s, cols);
      for (Index i = 0; i < s; ++i) m.row(i) = rows[static_cast<std::size_t>(i)].transpose();
      return m;
    };
    t.states = stack(rows_state, 2 * n);
    t.magnitude = stack(rows_mag, n);
    t.frequency_hz = stack(rows_freq, n);
    t.p = stack(rows_p, n);
    t.q = stack(rows_q, n);
    t.dist_a = stack(rows_dist_a, n);
    t.w = stack(rows_w, n);
    return t;
  }
};

/// One integration segment: a fixed context between two dispatch events.
class Segment {
 public:
  Segment(const FieldContext& ctx, const IntegratorConfig& cfg) : ctx_(ctx), cfg_(cfg) {
    if (ctx.theta) {
      p_ = projector(ctx.v_star, *ctx.theta);
    }
    const bool rot = cfg.frame == Frame::Static;
    switch (cfg.field) {
      case FieldKind::Cartesian:
        field_ = [this, rot](const Vec& y, Vec& out) { kernels::closed_loop(ctx_, y, rot, out); };
        break;
      case FieldKind::Projected:
        for (Index k = 0; k < ctx.n; ++k) {
          if (std::abs(ctx.v_star(k) - 1.0) > 1e-12) throw InputError("projected field requires unit voltage set-points");
        }
        field_ = [this, rot](const Vec& y, Vec& out) {
          kernels::closed_loop(ctx_, y, rot, out);
          for (Index k = 0; k < ctx_.n; ++k) {
            const Vec2 vk = y.segment<2>(2 * k);
            const double n2 = vk.squaredNorm();
            if (std::sqrt(n2) < kPolarGuard) throw DomainError("projection undefined at origin");
            out.segment<2>(2 * k) -= vk * (vk.dot(out.segment<2>(2 * k)) / n2);
          }
        };
        break;
      case FieldKind::PolarDroop:
        if (!ctx.pure_inductive || !ctx.admittance) throw InputError("droop form requires a purely inductive network");
        field_ = [this, rot](const Vec& y, Vec& out) {
          const PolarRates r = droop_field(ctx_, polar_of(y));
          out.resize(2 * ctx_.n);
          out.head(ctx_.n) = r.nu_dot;
          out.tail(ctx_.n) = rot ? r.theta_dot : (r.theta_dot.array() - ctx_.gains.omega0).matrix();
        };
        break;
    }
  }

  // Integration coordinates from a static-frame state at time t, and back.
  Vec from_static(const Vec& v, double t) const {
    const Vec local = cfg_.frame == Frame::Rotating ? to_rotating_frame(v, ctx_.gains.omega0, t) : v;
    if (cfg_.field != FieldKind::PolarDroop) return local;
    const PolarState ps = to_polar(local);
    Vec y(2 * ctx_.n);
    y << ps.nu, ps.theta;
    return y;
  }

  Vec to_static(const Vec& y, double t) const {
    const Vec local = cfg_.field == FieldKind::PolarDroop ? to_cartesian(polar_of(y)) : y;
    return cfg_.frame == Frame::Rotating ? to_static_frame(local, ctx_.gains.omega0, t) : local;
  }

  void step(Vec& y, double h) { rk4_step(field_, y, h, k1_, k2_, k3_, k4_, tmp_); }

  void record(Recorder& rec, const Vec& y, double t) {
    const Index n = ctx_.n;
    const Vec v = to_static(y, t);
    Vec dy;
    field_(y, dy);
    const Vec local = cfg_.field == FieldKind::PolarDroop ? to_cartesian(polar_of(y)) : y;
    const double base = cfg_.frame == Frame::Rotating ? ctx_.gains.omega0 : 0.0;

    Vec mag(n), freq(n), p(n), q(n), da(n), w(n);
    const Vec i = ctx_.admittance ? Vec(*ctx_.admittance * local) : Vec(ctx_.coupling * local);
    for (Index k = 0; k < n; ++k) {
      const Vec2 vk = node_of(local, k);
      mag(k) = vk.norm();
      if (cfg_.field == FieldKind::PolarDroop) {
        freq(k) = (dy(n + k) + base) / (2.0 * kPi);
      } else {
        freq(k) = (instantaneous_frequency(vk, node_of(dy, k)) + base) / (2.0 * kPi);
      }
      const Power pw = instantaneous_power(vk, node_of(i, k));
      p(k) = pw.p;
      q(k) = pw.q;
      da(k) = std::abs(mag(k) - ctx_.v_star(k));
      w(k) = w_k(vk, ctx_.v_star(k));
    }
    const double lv = p_ ? lyapunov_v(local, *p_) : kNaN;

    rec.times.push_back(t);
    rec.rows_state.push_back(v);
    rec.rows_mag.push_back(mag);
    rec.rows_freq.push_back(freq);
    rec.rows_p.push_back(p);
    rec.rows_q.push_back(q);
    rec.rows_dist_a.push_back(da);
    rec.rows_w.push_back(w);
    rec.lyap.push_back(lv);
    rec.dist_s.push_back(std::sqrt(lv));
  }

 private:
  PolarState polar_of(const Vec& y) const { return {y.head(ctx_.n), y.tail(ctx_.n)}; }

  const FieldContext& ctx_;
  IntegratorConfig cfg_;
  std::optional<Mat> p_;
  FieldFn field_;
  Vec k1_, k2_, k3_, k4_, tmp_;
};

void validate_config(const IntegratorConfig& cfg, double omega0) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw InputError("dt must be positive");
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) throw InputError("t_end must be positive");
  if (cfg.record_every < 1) throw InputError("record_every must be at least 1");
  if (cfg.frame == Frame::Static && cfg.field == FieldKind::Cartesian && omega0 > 0.0 &&
      cfg.dt > 1e-3 * 2.0 * kPi / omega0 * (1.0 + 1e-12)) {
    throw InputError("dt too large to resolve the carrier in the static frame (limit 1e-3 of a period)");
  }
}

// Integrates [t0, t1] in place on the static-frame state `v`.
void run_segment(Segment& seg, Recorder& rec, Vec& v, double t0, double t1, const IntegratorConfig& cfg,
                 long& global_step, bool record_start, bool record_end) {
  Vec y = seg.from_static(v, t0);
  if (record_start) seg.record(rec, y, t0);
  const double span = t1 - t0;
  const auto n_steps = std::max<long>(1, static_cast<long>(std::ceil(span / cfg.dt - 1e-9)));
  double t = t0;
  for (long i = 0; i < n_steps; ++i) {
    const double start = t0 + static_cast<double>(i) * cfg.dt;
    const double stop = i + 1 == n_steps ? t1 : t0 + static_cast<double>(i + 1) * cfg.dt;
    seg.step(y, stop - start);
    if (!y.allFinite()) throw DivergenceError("divergence: non-finite state", t);
    t = stop;
    ++global_step;
    const bool last = i + 1 == n_steps;
    if (global_step % cfg.record_every == 0 || (last && record_end)) seg.record(rec, y, t);
  }
  v = seg.to_static(y, t1);
}

}  // namespace

Vec to_static_frame(const Vec& v_bar, double omega0, double t) { return rotate_nodes(v_bar, omega0 * t); }
Vec to_rotating_frame(const Vec& v, double omega0, double t) { return rotate_nodes(v, -omega0 * t); }

Trajectory simulate(const FieldContext& ctx, const Vec& v0, const IntegratorConfig& cfg) {
  validate_config(cfg, ctx.gains.omega0);
  if (v0.size() != 2 * ctx.n || !v0.allFinite()) throw InputError("initial state must have 2N finite entries");
  Recorder rec{ctx.n, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};
  Segment seg(ctx, cfg);
  Vec v = v0;
  long global_step = 0;
  run_segment(seg, rec, v, 0.0, cfg.t_end, cfg, global_step, true, true);
  return rec.finish();
}

void validate(const Scenario& s) {
  validate(s.net);
  validate(s.gains);
  validate_config(s.integrator, s.gains.omega0);
  const Index n = s.net.n_nodes;
  if (s.initial_state.size() != 2 * n || !s.initial_state.allFinite()) {
    throw InputError("initial state must have 2N finite entries");
  }
  if (s.events.empty() || s.events.front().time != 0.0) throw InputError("first set-point event must be at t = 0");
  std::vector<int> covered(static_cast<std::size_t>(n), 0);
  double prev = -1.0;
  for (std::size_t e = 0; e < s.events.size(); ++e) {
    const auto& ev = s.events[e];
    if (!(ev.time > prev)) throw InputError("events must be strictly increasing in time");
    if (!(ev.time < s.integrator.t_end)) throw InputError("event time beyond t_end");
    prev = ev.time;
    for (const auto& u : ev.updates) {
      if (u.node < 0 || u.node >= n) throw InputError("event refers to a node outside the network");
      if (e == 0) {
        if (!u.p || !u.q || !u.v) throw InputError("the t = 0 event must give p, q and v for every node");
        covered[static_cast<std::size_t>(u.node)] = 1;
      }
    }
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
    throw InputError("the t = 0 event must give p, q and v for every node");
  }
  for (std::size_t e = 0; e < s.events.size(); ++e) validate(setpoints_at(s, e), n);
}

SetpointBundle setpoints_at(const Scenario& s, std::size_t event_index) {
  const Index n = s.net.n_nodes;
  SetpointBundle sp{Vec::Zero(n), Vec::Zero(n), Vec::Ones(n), std::nullopt};
  for (std::size_t e = 0; e <= event_index && e < s.events.size(); ++e) {
    for (const auto& u : s.events[e].updates) {
      if (u.p) sp.p(u.node) = *u.p;
      if (u.q) sp.q(u.node) = *u.q;
      if (u.v) sp.v(u.node) = *u.v;
    }
  }
  return sp;
}

Trajectory integrate(const Scenario& s) {
  validate(s);
  const IntegratorConfig& cfg = s.integrator;
  Recorder rec{s.net.n_nodes, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};
  Vec v = s.initial_state;
  long global_step = 0;
  for (std::size_t e = 0; e < s.events.size(); ++e) {
    SetpointBundle sp = setpoints_at(s, e);
    FieldContext ctx = FieldContext::from_network(s.net, sp, s.gains, s.controller_kappa);
    try {
      const AngleSolution sol = solve_angles(s.net, sp.p, sp.q, sp.v);
      if (sol.residual <= kDefaultFeasibilityTolerance) ctx.theta = sol.theta;
      else ctx.theta.reset();
    } catch (const InfeasibleError&) {
      ctx.theta.reset();
    }
    const double t0 = s.events[e].time;
    const double t1 = e + 1 < s.events.size() ? s.events[e + 1].time : cfg.t_end;
    Segment seg(ctx, cfg);
    run_segment(seg, rec, v, t0, t1, cfg, global_step, e == 0, e + 1 == s.events.size());
  }
  return rec.finish();
}

NetworkSpec case_study_network() {
  NetworkSpec net;
  net.n_nodes = 3;
  net.bases = Bases{};
  net.omega0 = net.bases.angular_frequency();
  const double r_per_km = 0.03;
  const double x_per_km = 0.3;
  auto line = [&](Index a, Index b, double km) {
    const double r = units::impedance_to_pu(r_per_km * km, net.bases);
    const double x = units::impedance_to_pu(x_per_km * km, net.bases);
    return Line{a, b, LineParams{r, units::inductance_from_reactance(x, net.omega0)}};
  };
  net.lines = {line(0, 1, 125.0), line(0, 2, 125.0), line(1, 2, 25.0)};
  return net;
}

SetpointBundle case_study_setpoints(int column) {
  if (column != 1 && column != 2) throw InputError("case study dispatch column must be 1 or 2");
  SetpointBundle sp;
  sp.p = Vec3(0.1458, 0.7066, column == 1 ? -0.8509 : -0.3509);
  sp.q = Vec3(0.0432, -0.0793, 0.0803);
  sp.v = Vec3(1.01, 1.0, 1.0);
  return sp;
}

Scenario case_study(Frame frame) {
  Scenario s;
  s.net = case_study_network();
  const double omega_b = s.net.bases.angular_frequency();
  // Gains are quoted in per-unit time; the simulator runs in seconds.
  s.gains = GainSet{0.0015 * omega_b, 0.01 * omega_b, s.net.omega0};
  s.initial_state = Vec::Constant(6, 1e-3);

  SetpointEvent black_start{0.0, {}};
  for (Index k = 0; k < 3; ++k) black_start.updates.push_back({k, 0.0, 0.0, 1.0});
  const SetpointBundle col1 = case_study_setpoints(1);
  SetpointEvent dispatch{5.0, {}};
  for (Index k = 0; k < 3; ++k) dispatch.updates.push_back({k, col1.p(k), col1.q(k), col1.v(k)});
  SetpointEvent redispatch{10.0, {{2, case_study_setpoints(2).p(2), std::nullopt, std::nullopt}}};
  s.events = {black_start, dispatch, redispatch};

  s.integrator.t_end = 15.0;
  s.integrator.frame = frame;
  s.integrator.field = FieldKind::Cartesian;
  if (frame == Frame::Rotating) {
    s.integrator.dt = 1e-3;
    s.integrator.record_every = 1;
  } else {
    s.integrator.dt = 1e-5;
    s.integrator.record_every = 100;
  }
  return s;
}

namespace {

BatchResult run_one(const Scenario& s) {
  BatchResult r;
  try {
    r.trajectory = integrate(s);
  } catch (const DivergenceError& e) {
    r.exit_code = 4;
    r.error = e.what();
  } catch (const DomainError& e) {
    // The trajectory reached a point where the chosen field is undefined.
    r.exit_code = 4;
    r.error = e.what();
  } catch (const InfeasibleError& e) {
    r.exit_code = 3;
    r.error = e.what();
  } catch (const std::exception& e) {
    r.exit_code = 2;
    r.error = e.what();
  }
  return r;
}

}  // namespace

std::vector<BatchResult> integrate_batch_serial(const std::vector<Scenario>& scenarios) {
  std::vector<BatchResult> out;
  out.reserve(scenarios.size());
  for (const auto& s : scenarios) out.push_back(run_one(s));
  return out;
}

std::vector<BatchResult> integrate_batch(const std::vector<Scenario>& scenarios, int max_threads) {
  std::vector<BatchResult> out(scenarios.size());
  const int threads = max_threads > 0 ? max_threads : omp_get_max_threads();
  const auto count = static_cast<long>(scenarios.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = run_one(scenarios[static_cast<std::size_t>(i)]);
  return out;
}

int thread_cap_from_env() {
  const char* raw = std::getenv("OSCGRID_THREADS");
  if (raw == nullptr) return 0;
  char* end = nullptr;
  const long value = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || value < 1 || value > 4096) return 0;
  return static_cast<int>(value);
}

}  // namespace oscgrid
