#include <catch_amalgamated.hpp>

#include "generators.hpp"
#include "oracles.hpp"
#include "oscgrid/controller.hpp"
#include "oscgrid/errors.hpp"
#include "oscgrid/sim.hpp"

using namespace oscgrid;
using Catch::Matchers::WithinAbs;
namespace ts = testing_support;

namespace {

FieldContext inductive_context(ts::Rng& rng, Index n, double eta, double alpha) {
  const NetworkSpec net = ts::random_network(rng, n, -1.0);
  const Vec v = ts::random_vector(rng, n, 0.9, 1.1);
  const Vec th = ts::random_vector(rng, n - 1, -0.4, 0.4);
  const NodePowers pw = power_from_angles(net, v, th);
  return FieldContext::from_network(net, SetpointBundle{pw.p, pw.q, v, th}, GainSet{eta, alpha, net.omega0});
}

}  // namespace

TEST_CASE("phi") {
  CHECK(phi(Vec2(0.6, 0.8), 1.0) == 0.0);
  CHECK(phi(Vec2(0, 0), 1.3) == 1.0);
  CHECK(phi(Vec2(2.6, 0), 1.3) == -1.0);
}

TEST_CASE("polar round trip") {
  ts::Rng rng(20);
  for (int i = 0; i < 100; ++i) {
    const Vec v = ts::random_state(rng, 4);
    CHECK((to_cartesian(to_polar(v)) - v).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("phase error") {
  const Graph g(2, {{0, 1, 1.0}});
  Vec v(4);
  v << 1, 0, -1, 0;
  const Vec e = phase_error(v, g, Vec2(1, 1), Vec::Zero(1));
  CHECK((e - (Vec(4) << -2, 0, 2, 0).finished()).cwiseAbs().maxCoeff() < 1e-15);

  ts::Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    const Graph gr = ts::random_connected_graph(rng, 2 + i % 5, 0.5, 4.0);
    const Vec vs = ts::random_vector(rng, gr.n_nodes(), 0.9, 1.1);
    const Vec th = ts::random_vector(rng, gr.n_nodes() - 1, -1.0, 1.0);
    CHECK(phase_error(ts::target_point(vs, th, 0.3, 1.7), gr, vs, th).cwiseAbs().maxCoeff() < 1e-12);
    const Vec x = ts::random_state(rng, gr.n_nodes());
    const Mat a = block_diagonal(k_from_angles(gr, vs, th)) - extend(laplacian(gr));
    CHECK((phase_error(x, gr, vs, th) - a * x).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("magnitude error") {
  const Vec vs = Vec2(1.0, 2.0);
  Vec v(4);
  v << 0.6, 0.8, 0, 2;
  CHECK(magnitude_error(v, vs).cwiseAbs().maxCoeff() == 0.0);
  v << 2, 0, 0, 0;
  CHECK((magnitude_error(v, vs) - (Vec(4) << -2, 0, 0, 0).finished()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(magnitude_error(Vec::Zero(4), vs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("control law special cases and stacked form") {
  const GainSet rot_only{0.0, 0.0, 3.0};
  const Vec2 vk(0.3, 0.4);
  const Mat2 k = Mat2::Random();
  CHECK((control_law(vk, Vec2(1, 2), k, rot_only, 1.0) - 3.0 * j_matrix() * vk).norm() < 1e-15);

  const GainSet g{0.7, 1.3, 3.0};
  CHECK((control_law(vk, k * vk, k, g, 0.5) - 3.0 * j_matrix() * vk).norm() < 1e-15);

  ts::Rng rng(22);
  const NetworkSpec net = case_study_network();
  SetpointBundle sp = case_study_setpoints(1);
  const FieldContext ctx = FieldContext::from_network(net, sp, GainSet{0.5, 3.0, net.omega0});
  for (int i = 0; i < 20; ++i) {
    const Vec v = ts::random_state(rng, 3);
    const Vec y = network_laplacian(net).extended * v;
    const Vec f = closed_loop_field(ctx, v);
    for (Index kk = 0; kk < 3; ++kk) {
      const Vec2 u = control_law(node_of(v, kk), node_of(y, kk), ctx.k_blocks[static_cast<std::size_t>(kk)],
                                 ctx.gains, sp.v(kk));
      CHECK((u - node_of(f, kk)).norm() < 1e-8);
    }
  }
}

TEST_CASE("closed-loop field at special points") {
  ts::Rng rng(23);
  const Graph g = ts::random_connected_graph(rng, 4, 1.0, 3.0);
  const Vec vs = ts::random_vector(rng, 4, 0.9, 1.1);
  const Vec th = ts::random_vector(rng, 3, 0.0, 0.5);
  const FieldContext ctx = FieldContext::from_graph(g, vs, th, GainSet{0.8, 0.4, 100.0});
  const Vec target = ts::target_point(vs, th, 1.1);
  CHECK((closed_loop_field(ctx, target) - 100.0 * block_j(4) * target).norm() < 1e-12);
  CHECK(closed_loop_field(ctx, Vec::Zero(8)).norm() == 0.0);
  CHECK(rotating_frame_field(ctx, target).norm() < 1e-12);
  CHECK(rotating_frame_field(ctx, Vec::Zero(8)).norm() == 0.0);

  // On the phase set with a common magnitude scale, the field stays in the phase set.
  const Vec scaled = ts::target_point(vs, th, -0.4, 1.6);
  const Vec f = closed_loop_field(ctx, scaled);
  const double c = 1.6;
  const Vec expected = 100.0 * block_j(4) * scaled + 0.4 * (1.0 - c) * scaled;
  CHECK((f - expected).norm() < 1e-12);
}

TEST_CASE("field identities on random states") {
  ts::Rng rng(24);
  for (int i = 0; i < 30; ++i) {
    const Graph g = ts::random_connected_graph(rng, 2 + i % 5, 0.5, 4.0);
    const Vec vs = ts::random_vector(rng, g.n_nodes(), 0.9, 1.1);
    const Vec th = ts::random_vector(rng, g.n_nodes() - 1, -0.5, 0.5);
    const FieldContext ctx = FieldContext::from_graph(g, vs, th, GainSet{1.2, 0.6, 314.0});
    for (int s = 0; s < 30; ++s) {
      const Vec v = ts::random_state(rng, g.n_nodes(), 2.0);
      const Vec f = closed_loop_field(ctx, v);
      const Vec decomposition = 314.0 * block_j(g.n_nodes()) * v + 1.2 * phase_error(v, g, vs, th) +
                                0.6 * magnitude_error(v, vs);
      CHECK((f - decomposition).norm() <= 1e-12 * f.norm() + 1e-12);
      CHECK((rotating_frame_field(ctx, v) - (f - 314.0 * block_j(g.n_nodes()) * v)).norm() <= 1e-12 * f.norm());
    }
  }
}

TEST_CASE("kuramoto field") {
  const Graph g(3, {{0, 1, 1.0}, {1, 2, 2.0}});
  const Vec omega = kuramoto_natural_frequencies(g, Vec::Zero(2), 0.5, 7.0);
  CHECK((omega - Vec::Constant(3, 7.0)).norm() == 0.0);
  CHECK((kuramoto_field(Vec::Constant(3, 0.3), omega, g, 0.5) - Vec::Constant(3, 7.0)).norm() < 1e-15);

  const Graph pair(2, {{0, 1, 1.0}});
  const Vec d = kuramoto_field(Vec2(0.0, kPi), Vec2(0, 0), pair, 1.0);
  CHECK(d.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("projected field equals the Kuramoto field in polar form") {
  ts::Rng rng(25);
  for (int i = 0; i < 50; ++i) {
    const Graph g = ts::random_connected_graph(rng, 3, 0.5, 2.0);
    const Vec th = ts::random_vector(rng, 2, -0.5, 0.5);
    const GainSet gains{0.9, 0.7, 50.0};
    const FieldContext ctx = FieldContext::from_graph(g, Vec::Ones(3), th, gains);
    const Vec angles = ts::random_vector(rng, 3, -kPi, kPi);
    const Vec v = to_cartesian(PolarState{Vec::Ones(3), angles});
    const Vec f = projected_field(ctx, v);
    for (Index k = 0; k < 3; ++k) CHECK(std::abs(node_of(v, k).dot(node_of(f, k))) < 1e-10);
    const Vec rates = ts::oracle::polar_rates_by_hand(v, f);
    const Vec kur = kuramoto_field(angles, kuramoto_natural_frequencies(g, th, gains.eta, gains.omega0), g, gains.eta);
    CHECK((rates.tail(3) - kur).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(rates.head(3).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("projection rejects the origin and non-unit magnitudes") {
  const Graph g(2, {{0, 1, 1.0}});
  const FieldContext ctx = FieldContext::from_graph(g, Vec::Ones(2), Vec::Zero(1), GainSet{1, 1, 1});
  CHECK_THROWS_AS(projected_field(ctx, Vec::Zero(4)), DomainError);
  const FieldContext big = FieldContext::from_graph(g, Vec::Constant(2, 1.1), Vec::Zero(1), GainSet{1, 1, 1});
  CHECK_THROWS_AS(projected_field(big, Vec::Ones(4)), InputError);
}

TEST_CASE("droop field special cases") {
  ts::Rng rng(26);
  FieldContext ctx = inductive_context(rng, 3, 0.7, 1.4);
  // At the target steady state.
  const Vec target = ts::target_point(ctx.v_star, *ctx.theta, 0.2);
  const PolarRates at = droop_field(ctx, to_polar(target));
  CHECK(at.nu_dot.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((at.theta_dot.array() - ctx.gains.omega0).abs().maxCoeff() < 1e-10);

  // Logistic magnitude dynamics when reactive power and its set-point vanish:
  // a single node with zero set-points and no coupling current at equal angles and magnitudes.
  NetworkSpec net;
  net.n_nodes = 2;
  net.omega0 = 1.0;
  net.lines = {Line{0, 1, LineParams{0.0, 0.5}}};
  const FieldContext flat =
      FieldContext::from_network(net, SetpointBundle{Vec::Zero(2), Vec::Zero(2), Vec::Ones(2), std::nullopt},
                                 GainSet{0.3, 2.0, 1.0});
  const PolarRates r = droop_field(flat, PolarState{Vec::Constant(2, 0.4), Vec::Constant(2, 0.9)});
  CHECK_THAT(r.nu_dot(0), WithinAbs(2.0 * (1.0 - 0.4) * 0.4, 1e-14));

  CHECK_THROWS_AS(droop_field(ctx, PolarState{Vec::Zero(3), Vec::Zero(3)}), DomainError);
  const FieldContext resistive = FieldContext::from_network(
      case_study_network(), case_study_setpoints(1), GainSet{1, 1, case_study_network().omega0});
  CHECK_THROWS_AS(droop_field(resistive, to_polar(Vec::Ones(6))), InputError);
}

TEST_CASE("droop field equals the polar view of the Cartesian field") {
  ts::Rng rng(27);
  for (int i = 0; i < 20; ++i) {
    const FieldContext ctx = inductive_context(rng, 3, ts::uniform(rng, 0.1, 2), ts::uniform(rng, 0.1, 3));
    for (int s = 0; s < 20; ++s) {
      const PolarState ps{ts::random_vector(rng, 3, 0.2, 2.0), ts::random_vector(rng, 3, -kPi, kPi)};
      const Vec v = to_cartesian(ps);
      const PolarRates droop = droop_field(ctx, ps);
      const Vec chain = ts::oracle::polar_rates_by_hand(v, closed_loop_field(ctx, v));
      CHECK((droop.nu_dot - chain.head(3)).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((droop.theta_dot - chain.tail(3)).cwiseAbs().maxCoeff() < 1e-9);
      const PolarRates lib = polar_rates(v, closed_loop_field(ctx, v));
      CHECK((lib.theta_dot - chain.tail(3)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("instantaneous frequency") {
  CHECK_THAT(instantaneous_frequency(Vec2(2, 0), Vec2(0, 2 * 314.0)), WithinAbs(314.0, 1e-12));
  CHECK(std::isnan(instantaneous_frequency(Vec2(0, 0), Vec2(1, 1))));
}

TEST_CASE("gain validation") {
  CHECK_THROWS_AS(validate(GainSet{-0.1, 1.0, 1.0}), InputError);
  CHECK_THROWS_AS(validate(GainSet{1.0, -1.0, 1.0}), InputError);
  CHECK_THROWS_AS(validate(GainSet{1.0, 1.0, std::nan("")}), InputError);
  CHECK_NOTHROW(validate(GainSet{0.0, 0.0, 1.0}));
  CHECK_NOTHROW(validate(GainSet{1.0, 1.0, 0.0}));
}
