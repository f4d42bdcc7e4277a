#include "crowd/potential.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>

namespace crowd {

PotentialNotConverged::PotentialNotConverged(double residual, std::size_t iterations)
    : Error("potential solve not converged after " + std::to_string(iterations) +
            " iterations (residual " + std::to_string(residual) + ")"),
      residual_(residual), iterations_(iterations) {}

namespace {

enum class CellRole : char { Blocked, Free, Exit, Inlet };

std::vector<CellRole> classify(const WalkingDomain& domain) {
    const Grid& g = domain.grid();
    std::vector<CellRole> role(g.size(), CellRole::Free);
    for (std::size_t c = 0; c < g.size(); ++c)
        if (domain.is_obstacle(c)) role[c] = CellRole::Blocked;
    for (auto c : domain.boundary_cells(BoundaryKind::Inlet)) role[c] = CellRole::Inlet;
    for (auto c : domain.boundary_cells(BoundaryKind::Exit)) role[c] = CellRole::Exit;
    return role;
}

// Visits the free 4-neighbours of cell c.
template <class F>
void for_each_neighbour(const WalkingDomain& domain, std::size_t c, F&& f) {
    const Grid& g = domain.grid();
    const std::size_t i = g.col(c), j = g.row(c);
    if (i > 0 && !domain.is_obstacle(c - 1)) f(c - 1);
    if (i + 1 < g.nx() && !domain.is_obstacle(c + 1)) f(c + 1);
    if (j > 0 && !domain.is_obstacle(c - g.nx())) f(c - g.nx());
    if (j + 1 < g.ny() && !domain.is_obstacle(c + g.nx())) f(c + g.nx());
}

double residual_with(const WalkingDomain& domain, const std::vector<CellRole>& role, std::span<const double> u) {
    double worst = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
        if (role[c] != CellRole::Free) continue;
        double r = 0.0;
        for_each_neighbour(domain, c, [&](std::size_t n) { r += u[n] - u[c]; });
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

} // namespace

double laplace_residual(const WalkingDomain& domain, std::span<const double> u) {
    return residual_with(domain, classify(domain), u);
}

PotentialField solve_potential(const WalkingDomain& domain, const PotentialOptions& opts) {
    const auto role = classify(domain);
    const std::size_t n = role.size();
    if (std::none_of(role.begin(), role.end(), [](CellRole r) { return r == CellRole::Exit; }))
        throw Error("domain has no exit");

    std::size_t fixed = 0;
    double fixed_sum = 0.0;
    for (auto r : role)
        if (r == CellRole::Exit || r == CellRole::Inlet) {
            ++fixed;
            fixed_sum += r == CellRole::Exit ? 1.0 : 0.0;
        }

    PotentialField out;
    out.u.assign(n, 0.0);
    const double start = fixed_sum / static_cast<double>(fixed);
    for (std::size_t c = 0; c < n; ++c) {
        if (role[c] == CellRole::Exit) out.u[c] = 1.0;
        else if (role[c] == CellRole::Free) out.u[c] = start;
    }

    const Grid& g = domain.grid();
    const double omega = opts.omega > 0.0
                             ? opts.omega
                             : 2.0 / (1.0 + std::sin(std::numbers::pi / (2.0 * static_cast<double>(std::max(g.nx(), g.ny())))));
    if (!(omega > 0.0 && omega < 2.0)) throw Error("sor factor must lie in (0,2)");

    // Free cells with their free 4-neighbours, gathered once for the sweeps.
    std::vector<std::size_t> cells, first{0}, neighbours;
    std::vector<double> weight; // omega / neighbour count
    for (std::size_t c = 0; c < n; ++c) {
        if (role[c] != CellRole::Free) continue;
        const std::size_t before = neighbours.size();
        for_each_neighbour(domain, c, [&](std::size_t nb) { neighbours.push_back(nb); });
        if (neighbours.size() == before) continue;
        cells.push_back(c);
        first.push_back(neighbours.size());
        weight.push_back(omega / static_cast<double>(neighbours.size() - before));
    }

    auto& u = out.u;
    double res = residual_with(domain, role, u);
    std::size_t it = 0;
    while (res >= opts.tolerance) {
        if (it >= opts.max_iterations) throw PotentialNotConverged(res, it);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            double sum = 0.0;
            for (std::size_t m = first[k]; m < first[k + 1]; ++m) sum += u[neighbours[m]];
            u[cells[k]] += weight[k] * sum - omega * u[cells[k]];
        }
        ++it;
        // The residual sweep costs as much as a relaxation sweep; check periodically.
        if (it % 16 == 0 || it >= opts.max_iterations) res = residual_with(domain, role, u);
    }
    out.iterations = it;
    out.residual = res;
    out.desired = gradient_direction(u, domain);
    return out;
}

std::vector<Vec2> gradient_direction(std::span<const double> u, const WalkingDomain& domain) {
    const Grid& g = domain.grid();
    const std::size_t n = g.size();
    const double dx = g.dx();
    std::vector<Vec2> dir(n, Vec2{0.0, 0.0});
    std::vector<char> ok(n, 0);

    auto partial = [&](std::size_t c, bool has_lo, std::size_t lo, bool has_hi, std::size_t hi) {
        if (has_lo && has_hi) return (u[hi] - u[lo]) / (2.0 * dx);
        if (has_hi) return (u[hi] - u[c]) / dx;
        if (has_lo) return (u[c] - u[lo]) / dx;
        return 0.0;
    };

    for (std::size_t c = 0; c < n; ++c) {
        if (domain.is_obstacle(c)) continue;
        const std::size_t i = g.col(c), j = g.row(c);
        const bool l = i > 0 && !domain.is_obstacle(c - 1);
        const bool r = i + 1 < g.nx() && !domain.is_obstacle(c + 1);
        const bool b = j > 0 && !domain.is_obstacle(c - g.nx());
        const bool t = j + 1 < g.ny() && !domain.is_obstacle(c + g.nx());
        const Vec2 grad{partial(c, l, c - (l ? 1 : 0), r, c + (r ? 1 : 0)),
                        partial(c, b, c - (b ? g.nx() : 0), t, c + (t ? g.nx() : 0))};
        const double len = norm(grad);
        if (len >= 1e-12) {
            dir[c] = grad * (1.0 / len);
            ok[c] = 1;
        }
    }

    std::deque<std::size_t> queue;
    for (std::size_t c = 0; c < n; ++c)
        if (ok[c]) queue.push_back(c);
    while (!queue.empty()) {
        const std::size_t c = queue.front();
        queue.pop_front();
        for_each_neighbour(domain, c, [&](std::size_t nb) {
            if (ok[nb]) return;
            ok[nb] = 1;
            dir[nb] = dir[c];
            queue.push_back(nb);
        });
    }
    for (std::size_t c = 0; c < n; ++c)
        if (!domain.is_obstacle(c) && !ok[c]) dir[c] = {1.0, 0.0};
    return dir;
}

} // namespace crowd
