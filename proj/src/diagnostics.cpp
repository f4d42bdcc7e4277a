#include "crowd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace crowd {

namespace {

long grid_line_index(double coord, double dx) {
    const double k = coord / dx;
    const double r = std::round(k);
    if (std::abs(k - r) > 1e-9) throw Error("segment not on grid lines");
    return static_cast<long>(r);
}

} // namespace

double corridor_flux(const WalkingDomain& domain, std::span<const double> rho, std::span<const Vec2> velocity,
                     const GridLine& line) {
    const Grid& g = domain.grid();
    const double dx = g.dx();
    const bool vertical = line.vertical();
    if (!vertical && line.y0 != line.y1) throw Error("segment must be axis-aligned");

    const long k = grid_line_index(vertical ? line.x0 : line.y0, dx);
    const double lo = vertical ? std::min(line.y0, line.y1) : std::min(line.x0, line.x1);
    const double hi = vertical ? std::max(line.y0, line.y1) : std::max(line.x0, line.x1);
    const long across = static_cast<long>(vertical ? g.ny() : g.nx());
    const long normal_cells = static_cast<long>(vertical ? g.nx() : g.ny());

    auto normal_flux = [&](long a, long m) -> std::optional<double> {
        if (m < 0 || m >= normal_cells) return std::nullopt;
        const auto idx = vertical ? g.index(static_cast<std::size_t>(m), static_cast<std::size_t>(a))
                                  : g.index(static_cast<std::size_t>(a), static_cast<std::size_t>(m));
        if (domain.is_obstacle(idx)) return std::nullopt;
        return rho[idx] * (vertical ? velocity[idx].x : velocity[idx].y);
    };

    double total = 0.0;
    for (long a = 0; a < across; ++a) {
        const double mid = (static_cast<double>(a) + 0.5) * dx;
        if (mid < lo || mid > hi) continue;
        const auto before = normal_flux(a, k - 1);
        const auto after = normal_flux(a, k);
        double q = 0.0;
        if (before && after) q = 0.5 * (*before + *after);
        else if (before) q = *before;
        else if (after) q = *after;
        total += q * dx;
    }
    return total;
}

InletFlux inlet_flux(const FundamentalDiagram& fd, double rho_bar) {
    if (!(rho_bar >= 0.0 && rho_bar <= 1.0)) throw Error("inlet density must lie in [0,1]");
    const FundamentalDiagram nd = fd.nondimensional();
    InletFlux out;
    out.nondimensional = nd.flow(rho_bar);
    out.per_metre = out.nondimensional * fd.jam_density * fd.free_speed;
    return out;
}

std::vector<double> lowpass(std::span<const double> values, std::size_t window) {
    if (window == 0) throw Error("lowpass window must be positive");
    const std::size_t n = values.size();
    const std::size_t left = (window - 1) / 2;
    const std::size_t right = window - 1 - left;
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + values[k];
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t a = k >= left ? k - left : 0;
        const std::size_t b = std::min(n - 1, k + right);
        out[k] = (prefix[b + 1] - prefix[a]) / static_cast<double>(b - a + 1);
    }
    return out;
}

UniformSeries lowpass_in_time(std::span<const double> t, std::span<const double> y, double window, double h) {
    if (t.size() != y.size() || t.empty()) throw Error("series is empty or ragged");
    if (!(h > 0.0) || !(window > 0.0)) throw Error("lowpass spacing and window must be positive");
    UniformSeries out;
    std::vector<double> tt(t.begin(), t.end()), yy(y.begin(), y.end());
    const auto n = static_cast<std::size_t>(std::floor((t.back() - t.front()) / h)) + 1;
    out.t.resize(n);
    std::vector<double> samples(n);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double at = t.front() + static_cast<double>(k) * h;
        while (seg + 1 < tt.size() && tt[seg + 1] < at) ++seg;
        double v = yy[seg];
        if (seg + 1 < tt.size() && tt[seg + 1] > tt[seg])
            v = yy[seg] + (std::clamp(at, tt[seg], tt[seg + 1]) - tt[seg]) / (tt[seg + 1] - tt[seg]) *
                              (yy[seg + 1] - yy[seg]);
        out.t[k] = at;
        samples[k] = v;
    }
    auto w = static_cast<std::size_t>(std::llround(window / h));
    if (w % 2 == 0) ++w;
    out.y = lowpass(samples, w);
    return out;
}

std::vector<std::size_t> local_maxima(std::span<const double> values, double floor_fraction) {
    std::vector<std::size_t> out;
    if (values.size() < 3) return out;
    const double floor = floor_fraction * *std::max_element(values.begin(), values.end());
    for (std::size_t k = 1; k + 1 < values.size(); ++k)
        if (values[k] > values[k - 1] && values[k] >= values[k + 1] && values[k] > floor) out.push_back(k);
    return out;
}

double l2_energy(std::span<const double> rho, double cell_measure) {
    double s = 0.0;
    for (double r : rho) s += r * r;
    return s * cell_measure;
}

double total_mass(std::span<const double> rho, double cell_measure) {
    double s = 0.0;
    for (double r : rho) s += r;
    return s * cell_measure;
}

std::vector<double> gaussian_bump_1d(const Grid& grid, double rho0, double drho, double ell, double xc) {
    if (rho0 < 0.0 || rho0 + drho > 1.0) throw Error("gaussian bump exceeds [0,1]");
    std::vector<double> out(grid.nx());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double d = grid.centre(j).x - xc;
        out[j] = rho0 + drho * std::exp(-d * d / (ell * ell));
    }
    return out;
}

std::vector<double> gaussian_bump_2d(const Grid& grid, double rho0, double drho, double ell, double xc, double yc) {
    if (rho0 < 0.0 || rho0 + drho > 1.0) throw Error("gaussian bump exceeds [0,1]");
    std::vector<double> out(grid.size());
    for (std::size_t c = 0; c < out.size(); ++c) {
        const Vec2 p = grid.centre(c);
        const double d2 = (p.x - xc) * (p.x - xc) + (p.y - yc) * (p.y - yc);
        out[c] = rho0 + drho * std::exp(-d2 / (ell * ell));
    }
    return out;
}

EmptyingTime emptying_time(std::span<const double> t, std::span<const double> mass, double threshold, double after) {
    if (t.size() != mass.size() || t.empty()) throw Error("mass series is empty or ragged");
    const double peak = *std::max_element(mass.begin(), mass.end());
    const double level = threshold * peak;
    EmptyingTime out;
    out.final_fraction = peak > 0.0 ? mass.back() / peak : 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < after || mass[k] > level) continue;
        out.reached = true;
        out.time = t[k];
        if (k > 0 && t[k - 1] >= after && mass[k - 1] > level) {
            const double w = (mass[k - 1] - level) / (mass[k - 1] - mass[k]);
            out.time = t[k - 1] + w * (t[k] - t[k - 1]);
        }
        return out;
    }
    return out;
}

} // namespace crowd
