#pragma once

#include <ostream>
#include <string>

#include "oscgrid/sim.hpp"

namespace oscgrid::io {

// Columns: t, then per node v_alpha, v_beta, mag, freq_hz, p, q, then V, dist_S, then W_1..W_N.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

// Gnuplot script plotting magnitudes, frequencies, active and reactive power
// from `csv_name` (relative to the script's directory).
void write_plot_script(std::ostream& out, Index n_nodes, const std::string& csv_name = "trajectory.csv");
void write_plot_script(const std::string& path, Index n_nodes, const std::string& csv_name = "trajectory.csv");

}  // namespace oscgrid::io
