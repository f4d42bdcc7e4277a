#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowd/fundamental.hpp"
#include "crowd/geometry.hpp"
#include "crowd/perception.hpp"
#include "crowd/structure.hpp"
#include "crowd/timeseries.hpp"

namespace crowd {

enum class Mode { PerceptionTest1D, PerceptionTest2D, Footbridge, Station, Custom };
std::string to_string(Mode m);

/// Thrown when a scenario document fails validation; carries every violated
/// constraint, not just the first.
class ScenarioError : public Error {
public:
    explicit ScenarioError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

struct FluxLine {
    std::string name;
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

enum class InitialKind { Zero, Uniform, Gaussian };

struct InitialDensity {
    InitialKind kind = InitialKind::Zero;
    double rho0 = 0.0;
    double drho = 0.0;
    double ell = 1.0 / 35.0;
    double xc = 0.5;
    double yc = 0.5;
};

struct StructureSpec {
    SetUp setup = SetUp::Motionless;
    double frequency = 0.9;
    double damping_ratio = 0.007;
    double deck_width = 5.25;
    double span_length = 180.0;
    double deck_mass_per_area = 800.0;
    double mode_split = 0.6;
    double mode_side = 0.3;
    std::vector<double> mode_shape; // tabulated; empty means the two-span default
    double pedestrian_mass = 70.0;
    double imposed_peak = 0.25;
    double imposed_rate = 0.02;
    double envelope_window = 0.0;
    MotionSensitivity sensitivity;
    std::vector<double> probes{0.3};
};

struct RunSpec {
    double t_end = 1.0;
    std::size_t dump_every = 0;       // steps between snapshots; 0 means none
    std::vector<double> snapshot_times;
    double lowpass_window = 0.0;      // <= 0 means 0.1 t_end
    double lowpass_spacing = 0.005;
    double emptying_threshold = 0.01;
    double emptying_after = -1.0;     // < 0 means the end of the inflow history
    bool dump_potential = false;
    unsigned long seed = 0;           // recorded only; runs are deterministic
};

struct Scenario {
    std::string name;
    Mode mode = Mode::Custom;
    std::string notes;

    std::size_t nx = 1, ny = 1;
    double dx = 1.0;
    std::vector<BoundarySegment> boundaries;
    std::vector<Rect> obstacles;
    std::vector<FluxLine> flux_lines;

    std::string fd_preset; // empty when given explicitly
    FundamentalDiagram fd; // SI units
    PerceptionConfig perception;

    double cfl = 0.9;
    double dt_max = 0.05;
    double epsilon = 1e-4;
    int n_eta = 64;
    bool supply_limit = true;
    bool periodic = false;
    double periodic_free_depth = 0.1;

    PiecewiseLinear inflow;
    InitialDensity initial;
    StructureSpec structure;
    RunSpec run;

    bool is_1d() const { return ny == 1; }
    Grid grid() const { return {nx, ny, dx}; }
    WalkingDomain domain() const;
    double lowpass_window() const { return run.lowpass_window > 0.0 ? run.lowpass_window : 0.1 * run.t_end; }
    double emptying_after() const { return run.emptying_after >= 0.0 ? run.emptying_after : inflow.last_time(); }
};

/// Validates and converts a scenario document. Throws ScenarioError listing
/// every problem found.
Scenario parse_scenario(const nlohmann::json& doc);

/// Reads and parses a scenario file (JSON).
nlohmann::json load_scenario_document(const std::string& path);

/// Sets `path` (dot-separated keys) in `doc` to `value`, parsed as JSON when
/// possible and taken as a string otherwise. Missing objects are created.
void apply_override(nlohmann::json& doc, const std::string& path, const std::string& value);

/// Splits "key=value"; throws on a missing '='.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Document with every parameter the run uses, defaults included; parsing it
/// again yields the same scenario.
nlohmann::json resolved_document(const Scenario& s);

} // namespace crowd
