#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "crowd/scenario.hpp"
#include "crowd/solver1d.hpp"
#include "crowd/solver2d.hpp"
#include "crowd/structure.hpp"

namespace crowd {

/// Failure while a run was stepping; the last valid state has been written
/// to the output directory as density_last.csv.
class RunAborted : public Error {
public:
    using Error::Error;
};

struct FluxSummary {
    std::string name;
    double max = 0.0, max_time = 0.0;                 // raw series
    double lowpass_max = 0.0, lowpass_max_time = 0.0; // low-passed series
    bool has_local_max = false;
    double first_local_max = 0.0, first_local_max_time = 0.0;
};

struct RunSummary {
    std::size_t steps = 0;
    double t_final = 0.0;
    double initial_mass = 0.0;
    double injected = 0.0;
    double exited = 0.0;
    double final_mass = 0.0;
    double audit_residual = 0.0; // initial + injected - exited - final
    std::size_t snapshots = 0;
    bool emptied = false;
    double emptying_time = 0.0;
    double emptying_final_fraction = 0.0;
    std::vector<FluxSummary> fluxes;
    double seconds = 0.0;
};

/// Solver and coupling settings a scenario describes (nondimensional units).
Solver1DConfig solver1d_config(const Scenario& s);
CouplingConfig coupling_config(const Scenario& s);
Solver2DConfig solver2d_config(const Scenario& s);

/// Initial density field of a scenario, one value per cell.
std::vector<double> initial_density(const Scenario& s);

/// Runs a validated scenario and writes manifest.txt, scenario.json,
/// density_NNNN.csv, diagnostics.csv and, depending on the mode, flux.csv,
/// probe.csv and potential.csv into `out_dir` (created if missing).
RunSummary run_scenario(const Scenario& s, const std::string& out_dir);

/// Parsed "key = value" lines of a manifest.
std::map<std::string, std::string> read_manifest(const std::string& path);

/// Compares two run directories. Metrics: "diagnostics" (difference series
/// on A's time base), "emptying" (emptying-time ratio B/A and peak fluxes),
/// "speed-crossing" (sign changes of v_A - v_B in snapshots at equal times).
/// Writes a "key = value" report to `report`; a difference CSV goes to
/// `csv_out` when given. Throws on incompatible domains.
void compare_runs(const std::string& dir_a, const std::string& dir_b, const std::string& metric, std::ostream& report,
                  const std::optional<std::string>& csv_out = std::nullopt);

/// {"status": "error", "kind": kind, "errors": [...]} as a JSON string.
std::string error_report(const std::string& kind, const std::vector<std::string>& errors);

/// Fixed 17-significant-digit formatting used by every CSV the tool writes.
std::string format_number(double v);

} // namespace crowd
