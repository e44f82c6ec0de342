#pragma once

#include <optional>
#include <string>

#include "oscgrid/sim.hpp"

namespace oscgrid::io {

/// Parsed configuration document. Commands need different subsets: `solve`
/// uses network + setpoints, `check` needs gains plus events or setpoints,
/// `simulate` needs everything except setpoints.
struct Document {
  NetworkSpec net;
  std::optional<double> controller_kappa;
  std::optional<GainSet> gains;
  std::optional<Vec> initial_state;
  std::vector<SetpointEvent> events;
  std::optional<IntegratorConfig> integrator;
  std::optional<SetpointBundle> setpoints;
};

// Throws InputError with line/column for syntax errors and a JSON path for
// schema violations.
Document parse_document(const std::string& text);
Document load_document(const std::string& path);

// Canonical JSON (per-unit quantities, gains in 1/s); parse(serialize(d)) == d.
std::string serialize(const Document& doc);

Scenario to_scenario(const Document& doc);
Document from_scenario(const Scenario& s);

bool same_document(const Document& a, const Document& b);

}  // namespace oscgrid::io
