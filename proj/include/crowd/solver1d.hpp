#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "crowd/fundamental.hpp"
#include "crowd/geometry.hpp"
#include "crowd/perception.hpp"
#include "crowd/timeseries.hpp"

namespace crowd {

/// Characteristic speed at interface j+1/2 of the discretised non-local law,
/// from midpoint interpolants and half-cell differences. |drho| <= eps is
/// replaced by eps with the sign of drho (+ for zero). `g_*` are motion factors.
double convection_velocity(double rho_l, double rho_r, double rho_p_l, double rho_p_r,
                           const FundamentalDiagram& fd, double eps, double g_l = 1.0, double g_r = 1.0);

/// Entropic Godunov flux: min over eta in [0,1] of q(rho^eta, rho_p^eta) when
/// rho_l <= rho_r, max otherwise, along linear interpolants. The extremum is
/// located on n_eta + 1 equispaced samples and polished by golden-section
/// search inside the bracketing sample interval.
double interface_flux(double rho_l, double rho_r, double rho_p_l, double rho_p_r,
                      const FundamentalDiagram& fd, int n_eta, double g_l = 1.0, double g_r = 1.0);

/// Same, using only the n_eta + 1 samples (no polishing).
double interface_flux_sampled(double rho_l, double rho_r, double rho_p_l, double rho_p_r,
                              const FundamentalDiagram& fd, int n_eta, double g_l = 1.0, double g_r = 1.0);

struct Solver1DConfig {
    FundamentalDiagram fd = FundamentalDiagram{}; // nondimensional
    PerceptionConfig perception;
    double epsilon = 1e-4;
    int n_eta = 64;
    double cfl = 0.9;
    double dt_max = 1e-2;
    bool periodic = false;
    /// Delta_s used on periodic grids (no far boundary to ray-cast to).
    double periodic_free_depth = 0.1;
    PiecewiseLinear inflow; // density at x = 0

    void validate() const;
};

struct State1D {
    std::vector<double> rho;
    std::vector<double> rho_p;
    std::vector<double> v;
    std::vector<double> vc; // convection velocity at the N+1 interfaces
    double t = 0.0;
    double dt = 0.0;
    double flux_in = 0.0;  // interface flux at x = 0 during the last step
    double flux_out = 0.0; // interface flux at x = L during the last step
    std::deque<std::vector<double>> speed_history; // newest first
};

class Solver1D {
public:
    Solver1D(Grid grid, Solver1DConfig cfg);

    const Grid& grid() const { return grid_; }
    const Solver1DConfig& config() const { return cfg_; }
    const std::vector<double>& free_depth() const { return free_depth_; }

    State1D initial(std::vector<double> rho) const;

    /// Perceived density and walking speed for the current density.
    void perceive(State1D& s, std::span<const double> motion) const;

    /// One explicit Godunov step. `motion` is the per-cell factor g (empty
    /// means 1); `dt_limit` caps the adaptive step (e.g. to land on an output time).
    State1D step(const State1D& s, std::span<const double> motion = {},
                 std::optional<double> dt_limit = std::nullopt) const;

private:
    std::vector<double> delayed_speed(const State1D& s, std::span<const double> motion) const;

    Grid grid_;
    Solver1DConfig cfg_;
    std::vector<double> free_depth_;
};

} // namespace crowd
