#include "crowd/solver1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace crowd {

double convection_velocity(double rho_l, double rho_r, double rho_p_l, double rho_p_r,
                           const FundamentalDiagram& fd, double eps, double g_l, double g_r) {
    const double rho_half = 0.5 * (rho_l + rho_r);
    const double rho_p_half = 0.5 * (rho_p_l + rho_p_r);
    const double g_half = 0.5 * (g_l + g_r);
    double d_rho = rho_half - rho_l;
    const double d_rho_p = rho_p_half - rho_p_l;
    if (std::abs(d_rho) <= eps) d_rho = d_rho < 0.0 ? -eps : eps;
    return g_half * (fd.speed(rho_p_half) + rho_half * fd.speed_derivative(rho_p_half) * d_rho_p / d_rho);
}

namespace {

struct Path {
    double rho_l, rho_r, p_l, p_r, g_l, g_r;
    const FundamentalDiagram& fd;

    // (1 - eta) a + eta b reproduces both end states exactly.
    double operator()(double eta) const {
        const double rho = (1.0 - eta) * rho_l + eta * rho_r;
        const double p = std::clamp((1.0 - eta) * p_l + eta * p_r, 0.0, fd.jam_density);
        const double g = (1.0 - eta) * g_l + eta * g_r;
        return rho * fd.speed(p) * g;
    }
};

struct Sampled {
    double best;
    int at;
};

// sign = +1 picks the minimum, -1 the maximum.
Sampled sample_extremum(const Path& q, int n_eta, double sign) {
    Sampled s{q(0.0), 0};
    for (int k = 1; k <= n_eta; ++k) {
        const double eta = k == n_eta ? 1.0 : static_cast<double>(k) / n_eta;
        const double v = q(eta);
        if (sign * v < sign * s.best) s = {v, k};
    }
    return s;
}

} // namespace

double interface_flux_sampled(double rho_l, double rho_r, double rho_p_l, double rho_p_r,
                              const FundamentalDiagram& fd, int n_eta, double g_l, double g_r) {
    if (n_eta < 2) throw Error("n_eta must be at least 2");
    const Path q{rho_l, rho_r, rho_p_l, rho_p_r, g_l, g_r, fd};
    if (rho_l == rho_r && rho_p_l == rho_p_r && g_l == g_r) return q(0.0);
    const double sign = rho_l <= rho_r ? 1.0 : -1.0;
    return sample_extremum(q, n_eta, sign).best;
}

double interface_flux(double rho_l, double rho_r, double rho_p_l, double rho_p_r, const FundamentalDiagram& fd,
                      int n_eta, double g_l, double g_r) {
    if (n_eta < 2) throw Error("n_eta must be at least 2");
    const Path q{rho_l, rho_r, rho_p_l, rho_p_r, g_l, g_r, fd};
    const double sign = rho_l <= rho_r ? 1.0 : -1.0;
    if (rho_l == rho_r && rho_p_l == rho_p_r && g_l == g_r) return q(0.0);
    const Sampled s = sample_extremum(q, n_eta, sign);

    // Golden-section polish inside the bracketing sample interval.
    constexpr double inv_phi = 0.6180339887498949;
    double a = std::max(0.0, static_cast<double>(s.at - 1) / n_eta);
    double b = std::min(1.0, static_cast<double>(s.at + 1) / n_eta);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = sign * q(c);
    double fd_ = sign * q(d);
    for (int it = 0; it < 48; ++it) {
        if (fc < fd_) {
            b = d;
            d = c;
            fd_ = fc;
            c = b - inv_phi * (b - a);
            fc = sign * q(c);
        } else {
            a = c;
            c = d;
            fc = fd_;
            d = a + inv_phi * (b - a);
            fd_ = sign * q(d);
        }
    }
    const double polished = sign * std::min(fc, fd_);
    return sign * polished < sign * s.best ? polished : s.best;
}

void Solver1DConfig::validate() const {
    fd.validate();
    perception.validate();
    if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
    if (n_eta < 2) throw Error("n_eta must be at least 2");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw Error("cfl must lie in (0,1]");
    if (!(dt_max > 0.0)) throw Error("dt_max must be positive");
}

Solver1D::Solver1D(Grid grid, Solver1DConfig cfg) : grid_(grid), cfg_(std::move(cfg)) {
    if (!grid_.is_1d()) throw Error("1D solver needs a grid with ny == 1");
    cfg_.validate();
    free_depth_.resize(grid_.nx());
    if (cfg_.periodic) {
        std::fill(free_depth_.begin(), free_depth_.end(), cfg_.periodic_free_depth);
    } else {
        const WalkingDomain line(grid_, {{Edge::Right, 0.0, grid_.dx(), BoundaryKind::Exit, "outlet"}});
        for (std::size_t j = 0; j < grid_.nx(); ++j) free_depth_[j] = ray_depth(line, grid_.centre(j), {1.0, 0.0});
    }
}

State1D Solver1D::initial(std::vector<double> rho) const {
    if (rho.size() != grid_.nx()) throw Error("initial density does not match the grid");
    State1D s;
    s.rho = std::move(rho);
    perceive(s, {});
    return s;
}

std::vector<double> Solver1D::delayed_speed(const State1D& s, std::span<const double> motion) const {
    const auto k = static_cast<std::size_t>(cfg_.perception.law.reflex_delay_steps);
    if (k > 0 && !s.speed_history.empty()) return s.speed_history[std::min(k, s.speed_history.size()) - 1];
    std::vector<double> v(grid_.nx());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = cfg_.fd.speed(std::clamp(s.rho[j], 0.0, cfg_.fd.jam_density)) * (motion.empty() ? 1.0 : motion[j]);
    return v;
}

void Solver1D::perceive(State1D& s, std::span<const double> motion) const {
    const auto delayed = delayed_speed(s, motion);
    auto field = perceive_1d(grid_, s.rho, free_depth_, delayed, cfg_.perception, cfg_.periodic);
    s.rho_p = std::move(field.density);
    s.v.resize(grid_.nx());
    for (std::size_t j = 0; j < s.v.size(); ++j) {
        const double g = motion.empty() ? 1.0 : motion[j];
        s.v[j] = cfg_.fd.speed(std::clamp(s.rho_p[j], 0.0, cfg_.fd.jam_density)) * g;
    }
}

State1D Solver1D::step(const State1D& prev, std::span<const double> motion, std::optional<double> dt_limit) const {
    const std::size_t n = grid_.nx();
    if (!motion.empty() && motion.size() != n) throw Error("motion factor field does not match the grid");
    State1D s = prev;
    perceive(s, motion);

    const auto k = static_cast<std::size_t>(cfg_.perception.law.reflex_delay_steps);
    if (k > 0) {
        s.speed_history.push_front(s.v);
        while (s.speed_history.size() > k) s.speed_history.pop_back();
    }

    auto g_at = [&](std::size_t j) { return motion.empty() ? 1.0 : motion[j]; };

    // Left/right states of interface m (between cells m-1 and m), m = 0..n.
    struct Side {
        double rho, rho_p, g;
    };
    const double inflow = cfg_.inflow(prev.t);
    auto left_of = [&](std::size_t m) -> Side {
        if (m > 0) return {s.rho[m - 1], s.rho_p[m - 1], g_at(m - 1)};
        if (cfg_.periodic) return {s.rho[n - 1], s.rho_p[n - 1], g_at(n - 1)};
        return {inflow, inflow, 1.0};
    };
    auto right_of = [&](std::size_t m) -> Side {
        if (m < n) return {s.rho[m], s.rho_p[m], g_at(m)};
        if (cfg_.periodic) return {s.rho[0], s.rho_p[0], g_at(0)};
        return {s.rho[n - 1], s.rho_p[n - 1], g_at(n - 1)};
    };

    s.vc.assign(n + 1, 0.0);
    std::vector<double> flux(n + 1, 0.0);
    double fastest = 0.0;
    for (std::size_t m = 0; m <= n; ++m) {
        const Side l = left_of(m), r = right_of(m);
        s.vc[m] = convection_velocity(l.rho, r.rho, l.rho_p, r.rho_p, cfg_.fd, cfg_.epsilon, l.g, r.g);
        flux[m] = interface_flux(l.rho, r.rho, l.rho_p, r.rho_p, cfg_.fd, cfg_.n_eta, l.g, r.g);
        fastest = std::max(fastest, std::abs(s.vc[m]));
    }
    for (double v : s.v) fastest = std::max(fastest, std::abs(v));

    double dt = fastest > 0.0 ? cfg_.cfl * grid_.dx() / fastest : cfg_.dt_max;
    dt = std::min(dt, cfg_.dt_max);
    if (dt_limit) dt = std::min(dt, *dt_limit);
    if (!(dt > 0.0)) throw Error("non-positive time step");

    const double ratio = dt / grid_.dx();
    for (std::size_t j = 0; j < n; ++j) {
        s.rho[j] = prev.rho[j] - ratio * (flux[j + 1] - flux[j]);
        if (!std::isfinite(s.rho[j]))
            throw Error("non-finite density at cell " + std::to_string(j) + ", t = " + std::to_string(prev.t));
    }
    s.flux_in = flux[0];
    s.flux_out = flux[n];
    s.dt = dt;
    s.t = prev.t + dt;
    return s;
}

} // namespace crowd
