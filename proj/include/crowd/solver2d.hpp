#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "crowd/fundamental.hpp"
#include "crowd/geometry.hpp"
#include "crowd/perception.hpp"
#include "crowd/potential.hpp"
#include "crowd/timeseries.hpp"

namespace crowd {

struct Transported {
    std::vector<double> rho;
    std::vector<double> exited; // mass (rho * dx^2) removed through each boundary segment
};

/// Conservative push-forward of a piecewise-constant density under the
/// piecewise translation x -> x + v dt. Each cell's square is split over the
/// (at most four) cells it overlaps with exact area weights. Wall-normal
/// displacement is clipped to zero at walls and inlets, overlap beyond an
/// exit edge is removed and tallied, and overlap landing on obstacle cells is
/// redistributed proportionally over the admissible destinations.
/// Throws "cfl violated" if some |v| dt / dx exceeds 1.
///
/// The plain scheme does not bound the density from above: a jammed cell
/// (v = 0) still receives mass. With `cap` set, transfers into cells that
/// would exceed it are scaled down and the rejected mass stays at its source;
/// when no cell would exceed the cap the result is the plain one, bitwise.
Transported push_forward(const WalkingDomain& domain, std::span<const double> rho, std::span<const Vec2> velocity,
                         double dt, std::optional<double> cap = std::nullopt);

struct VelocityField {
    std::vector<Vec2> velocity;
    std::vector<double> speed;
    PerceptionField perception;
};

/// Walking velocity v = v(rho_p) e_v on every non-obstacle cell, zero on obstacles.
VelocityField assemble_velocity(const WalkingDomain& domain, std::span<const double> rho,
                                std::span<const Vec2> desired, std::span<const double> free_depth,
                                std::span<const double> delayed_speed, const PerceptionConfig& cfg,
                                const FundamentalDiagram& fd, RegionAreaCache* cache = nullptr);

struct Solver2DConfig {
    FundamentalDiagram fd = FundamentalDiagram{}; // nondimensional
    PerceptionConfig perception;
    double cfl = 0.9;
    double dt_max = 0.05;
    bool supply_limit = true; // cap transfers at the jam density
    PiecewiseLinear inflow; // density prescribed on inlet cells

    void validate() const;
};

struct State2D {
    std::vector<double> rho;
    std::vector<Vec2> v;
    std::vector<double> speed;
    std::vector<double> rho_p;
    std::vector<Vec2> x_p;
    std::vector<Vec2> e_i;
    double t = 0.0;
    double dt = 0.0;
    std::vector<double> exited; // cumulative per boundary segment
    double injected = 0.0;      // cumulative mass set on inlet cells (signed)
    double last_exited = 0.0;   // exit mass of the last step
    double last_injected = 0.0;
    std::deque<std::vector<double>> speed_history; // newest first
};

class Solver2D {
public:
    Solver2D(WalkingDomain domain, PotentialField potential, Solver2DConfig cfg);

    const WalkingDomain& domain() const { return domain_; }
    const PotentialField& potential() const { return potential_; }
    const Solver2DConfig& config() const { return cfg_; }
    const std::vector<double>& free_depth() const { return free_depth_; }
    const std::vector<std::size_t>& inlet_cells() const { return inlet_; }

    State2D initial(std::vector<double> rho) const;

    /// Velocity, perceived density and interaction directions for the current density.
    void assemble(State2D& s) const;

    State2D step(const State2D& s, std::optional<double> dt_limit = std::nullopt) const;

private:
    std::vector<double> delayed_speed(const State2D& s) const;

    WalkingDomain domain_;
    PotentialField potential_;
    Solver2DConfig cfg_;
    std::vector<double> free_depth_;
    std::vector<std::size_t> inlet_;
    mutable RegionAreaCache area_cache_; // memo only; never changes results
};

} // namespace crowd
