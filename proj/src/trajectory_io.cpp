#include "oscgrid/trajectory_io.hpp"

#include <cstdio>
#include <fstream>

#include "oscgrid/errors.hpp"

namespace oscgrid::io {

namespace {

void put(std::ostream& out, double x) {
  char buf[64];
  const int len = std::snprintf(buf, sizeof buf, "%.12e", x);
  out.write(buf, len);
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Index n = traj.n_nodes();
  out << "t";
  for (Index k = 1; k <= n; ++k) {
    for (const char* name : {"v_alpha", "v_beta", "mag", "freq_hz", "p", "q"}) out << ',' << name << '_' << k;
  }
  out << ",V,dist_S";
  for (Index k = 1; k <= n; ++k) out << ",W_" << k;
  out << '\n';

  for (Index s = 0; s < traj.n_samples(); ++s) {
    put(out, traj.times(s));
    for (Index k = 0; k < n; ++k) {
      for (double x : {traj.states(s, 2 * k), traj.states(s, 2 * k + 1), traj.magnitude(s, k),
                       traj.frequency_hz(s, k), traj.p(s, k), traj.q(s, k)}) {
        out << ',';
        put(out, x);
      }
    }
    out << ',';
    put(out, traj.lyapunov(s));
    out << ',';
    put(out, traj.dist_s(s));
    for (Index k = 0; k < n; ++k) {
      out << ',';
      put(out, traj.w(s, k));
    }
    out << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_for_write(path);
  write_trajectory_csv(out, traj);
  if (!out) throw InputError("failed writing " + path);
}

void write_plot_script(std::ostream& out, Index n_nodes, const std::string& csv_name) {
  auto column = [](Index k, int offset) { return 2 + 6 * k + offset; };
  auto panel = [&](const char* ylabel, int offset, bool last) {
    out << "set ylabel '" << ylabel << "'\n";
    if (last) out << "set xlabel 'time [s]'\n";
    out << "plot ";
    for (Index k = 0; k < n_nodes; ++k) {
      if (k > 0) out << ", \\\n     ";
      out << "data using 1:" << column(k, offset) << " with lines title 'inverter " << k + 1 << "'";
    }
    out << "\n";
  };
  out << "# Usage: gnuplot fig5.gp  (writes fig5.png next to the data)\n"
      << "data = '" << csv_name << "'\n"
      << "set datafile separator ','\n"
      << "set terminal pngcairo size 900,1200\n"
      << "set output 'fig5.png'\n"
      << "set multiplot layout 4,1\n"
      << "set grid\n"
      << "set key right\n";
  panel("voltage magnitude [p.u.]", 2, false);
  panel("frequency [Hz]", 3, false);
  panel("active power [p.u.]", 4, false);
  panel("reactive power [p.u.]", 5, true);
  out << "unset multiplot\n";
}

void write_plot_script(const std::string& path, Index n_nodes, const std::string& csv_name) {
  auto out = open_for_write(path);
  write_plot_script(out, n_nodes, csv_name);
}

}  // namespace oscgrid::io
