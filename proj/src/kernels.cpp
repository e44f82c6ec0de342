#include "oscgrid/kernels.hpp"

#include <omp.h>

namespace oscgrid::kernels {

namespace {

inline void node_field(const FieldContext& ctx, const Vec& v, bool with_rotation, Index k, Vec& out) {
  const Vec2 vk = v.segment<2>(2 * k);
  const BlockRow& row = ctx.a_rows[static_cast<std::size_t>(k)];
  Vec2 acc = Vec2::Zero();
  for (std::size_t i = 0; i < row.cols.size(); ++i) acc += row.blocks[i] * v.segment<2>(2 * row.cols[i]);
  Vec2 fk = ctx.gains.eta * acc + ctx.gains.alpha * phi(vk, ctx.v_star(k)) * vk;
  if (with_rotation) fk += ctx.gains.omega0 * Vec2(-vk.y(), vk.x());
  out.segment<2>(2 * k) = fk;
}

}  // namespace

void closed_loop_serial(const FieldContext& ctx, const Vec& v, bool with_rotation, Vec& out) {
  out.resize(2 * ctx.n);
  for (Index k = 0; k < ctx.n; ++k) node_field(ctx, v, with_rotation, k, out);
}

void closed_loop_parallel(const FieldContext& ctx, const Vec& v, bool with_rotation, Vec& out) {
  out.resize(2 * ctx.n);
  const Index n = ctx.n;
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < n; ++k) node_field(ctx, v, with_rotation, k, out);
}

void closed_loop(const FieldContext& ctx, const Vec& v, bool with_rotation, Vec& out) {
  if (ctx.n >= kParallelNodeThreshold && !omp_in_parallel()) {
    closed_loop_parallel(ctx, v, with_rotation, out);
  } else {
    closed_loop_serial(ctx, v, with_rotation, out);
  }
}

}  // namespace oscgrid::kernels
