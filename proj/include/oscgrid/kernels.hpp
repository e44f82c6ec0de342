#pragma once

#include "oscgrid/controller.hpp"

namespace oscgrid::kernels {

// Static-frame closed-loop field written node by node into `out`.
// `with_rotation = false` drops the omega0 J term (rotating frame).
void closed_loop_serial(const FieldContext& ctx, const Vec& v, bool with_rotation, Vec& out);

// OpenMP version of closed_loop_serial; bit-identical results.
void closed_loop_parallel(const FieldContext& ctx, const Vec& v, bool with_rotation, Vec& out);

// Picks the parallel kernel only when the network is large enough to pay for it.
void closed_loop(const FieldContext& ctx, const Vec& v, bool with_rotation, Vec& out);

inline constexpr Index kParallelNodeThreshold = 64;

}  // namespace oscgrid::kernels
