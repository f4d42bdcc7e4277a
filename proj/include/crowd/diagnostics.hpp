#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crowd/fundamental.hpp"
#include "crowd/geometry.hpp"

namespace crowd {

/// Axis-aligned segment lying on grid lines; (x0, y0) -> (x1, y1).
struct GridLine {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    bool vertical() const { return x0 == x1; }
};

/// Midpoint-rule integral of the normal component of rho v across the
/// segment (+x for vertical segments, +y for horizontal ones). The face value
/// is the mean over the free cells on either side.
double corridor_flux(const WalkingDomain& domain, std::span<const double> rho, std::span<const Vec2> velocity,
                     const GridLine& line);

/// Flux rho v(rho) carried by a free-flow inlet at density rho_bar.
struct InletFlux {
    double nondimensional = 0.0; // rho_bar V(rho_bar), with fd rescaled
    double per_metre = 0.0;      // ped/s across one metre of inlet, fd in SI units
};
InletFlux inlet_flux(const FundamentalDiagram& fd, double rho_bar);

/// Centred moving average over `window` samples, shrinking at the series ends.
std::vector<double> lowpass(std::span<const double> values, std::size_t window);

struct UniformSeries {
    std::vector<double> t;
    std::vector<double> y;
};

/// Resamples (t, y) on a uniform grid of spacing h and applies a centred
/// moving average spanning `window` time units.
UniformSeries lowpass_in_time(std::span<const double> t, std::span<const double> y, double window, double h);

/// Indices k with v[k-1] < v[k] >= v[k+1] and v[k] > floor_fraction * max(v),
/// in increasing order.
std::vector<std::size_t> local_maxima(std::span<const double> values, double floor_fraction = 0.02);

/// sum rho^2 * cell_measure (dx in 1D, dx^2 in 2D).
double l2_energy(std::span<const double> rho, double cell_measure);
/// sum rho * cell_measure.
double total_mass(std::span<const double> rho, double cell_measure);

/// rho0 + drho exp(-(x - xc)^2 / ell^2) at the cell centres of a 1D grid.
std::vector<double> gaussian_bump_1d(const Grid& grid, double rho0, double drho, double ell, double xc);
/// rho0 + drho exp(-|x - xc|^2 / ell^2) at the cell centres of a 2D grid.
std::vector<double> gaussian_bump_2d(const Grid& grid, double rho0, double drho, double ell, double xc, double yc);

struct EmptyingTime {
    bool reached = false;
    double time = 0.0;           // valid when reached
    double final_fraction = 0.0; // last mass / peak mass
};

/// First time t >= after at which mass <= threshold * peak mass, linearly
/// interpolated between samples.
EmptyingTime emptying_time(std::span<const double> t, std::span<const double> mass, double threshold = 0.01,
                           double after = 0.0);

} // namespace crowd
