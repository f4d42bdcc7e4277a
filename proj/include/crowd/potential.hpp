#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crowd/geometry.hpp"

namespace crowd {

struct PotentialOptions {
    /// SOR factor; 0 selects 2 / (1 + sin(pi / (2 max(nx, ny)))), tuned for
    /// domains bounded mostly by mirror walls, where the slowest mode spans
    /// about twice the domain length.
    double omega = 0.0;
    double tolerance = 1e-8;
    std::size_t max_iterations = 100000;
};

struct PotentialField {
    std::vector<double> u;
    std::vector<Vec2> desired; // e_d, unit on every non-obstacle cell
    std::size_t iterations = 0;
    double residual = 0.0;
};

class PotentialNotConverged : public Error {
public:
    PotentialNotConverged(double residual, std::size_t iterations);
    double residual() const { return residual_; }
    std::size_t iterations() const { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/// Harmonic potential by SOR on the 5-point stencil: u = 1 on exit cells,
/// u = 0 on inlet cells, mirror (zero normal derivative) on walls and
/// obstacle faces. e_d is its normalised gradient.
PotentialField solve_potential(const WalkingDomain& domain, const PotentialOptions& opts = {});

/// Max |sum over free neighbours of (u_n - u_c)| over non-Dirichlet cells.
double laplace_residual(const WalkingDomain& domain, std::span<const double> u);

/// Normalised gradient (central differences, one-sided next to walls and
/// obstacles). Cells with |grad u| < 1e-12 copy the direction of the nearest
/// cell with a usable gradient (breadth-first); (1, 0) if there is none.
std::vector<Vec2> gradient_direction(std::span<const double> u, const WalkingDomain& domain);

} // namespace crowd
