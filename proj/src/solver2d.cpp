#include "crowd/solver2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace crowd {

namespace {

double snap(double a) {
    const double r = std::round(a);
    return std::abs(a - r) < 1e-12 ? r : a;
}

} // namespace

namespace {

struct Transfer {
    std::size_t from, to;
    double amount; // density units
};

// Caps the mass moved into cells that would exceed the jam density. Incoming
// transfers into such a cell are scaled down (Jacobi fixed point) and the
// rejected part stays in its source cell.
void apply_supply_limit(std::span<const Transfer> moves, std::vector<double>& rho, double cap) {
    const std::size_t n = rho.size();
    std::vector<double> stay(n, 0.0), incoming(n, 0.0), scale(n, 1.0), returned(n, 0.0);
    for (const auto& m : moves) {
        if (m.from == m.to)
            stay[m.to] += m.amount;
        else
            incoming[m.to] += m.amount;
    }
    for (int iter = 0; iter < 1000; ++iter) {
        std::fill(returned.begin(), returned.end(), 0.0);
        for (const auto& m : moves)
            if (m.from != m.to) returned[m.from] += m.amount * (1.0 - scale[m.to]);
        bool changed = false;
        for (std::size_t c = 0; c < n; ++c) {
            if (!(incoming[c] > 0.0)) continue;
            // A few ulps of headroom keep the summed result at or below the cap.
            const double room = cap * (1.0 - 1e-14) - stay[c] - returned[c];
            const double s = std::clamp(room / incoming[c], 0.0, 1.0);
            if (s < scale[c]) {
                scale[c] = s;
                changed = true;
            }
        }
        if (!changed) break;
    }
    std::fill(rho.begin(), rho.end(), 0.0);
    for (const auto& m : moves) {
        if (m.from == m.to) {
            rho[m.to] += m.amount;
        } else {
            const double moved = m.amount * scale[m.to];
            rho[m.to] += moved;
            rho[m.from] += m.amount - moved;
        }
    }
}

} // namespace

Transported push_forward(const WalkingDomain& domain, std::span<const double> rho, std::span<const Vec2> velocity,
                         double dt, std::optional<double> cap) {
    const Grid& g = domain.grid();
    const long nx = static_cast<long>(g.nx());
    const long ny = static_cast<long>(g.ny());
    const double dx = g.dx();
    const double area = dx * dx;
    Transported out;
    out.rho.assign(g.size(), 0.0);
    out.exited.assign(domain.segments().size(), 0.0);
    std::vector<Transfer> moves;
    if (cap) moves.reserve(g.size() * 4);

    struct Target {
        long i, j;
        double w;
    };

    for (std::size_t c = 0; c < g.size(); ++c) {
        if (domain.is_obstacle(c)) continue;
        const double mass = rho[c];
        const Vec2 vel = velocity[c];
        if (mass == 0.0) continue;
        if (norm(vel) * dt > dx * (1.0 + 1e-12)) throw Error("cfl violated");

        const long i = static_cast<long>(g.col(c));
        const long j = static_cast<long>(g.row(c));
        double ax = vel.x * dt / dx;
        double ay = vel.y * dt / dx;

        // Walls (and inlets) stop the normal displacement of boundary cells.
        const auto ci = static_cast<std::size_t>(i), cj = static_cast<std::size_t>(j);
        if (i == 0 && ax < 0.0 && domain.boundary_kind(Edge::Left, ci, cj) != BoundaryKind::Exit) ax = 0.0;
        if (i == nx - 1 && ax > 0.0 && domain.boundary_kind(Edge::Right, ci, cj) != BoundaryKind::Exit) ax = 0.0;
        if (j == 0 && ay < 0.0 && domain.boundary_kind(Edge::Bottom, ci, cj) != BoundaryKind::Exit) ay = 0.0;
        if (j == ny - 1 && ay > 0.0 && domain.boundary_kind(Edge::Top, ci, cj) != BoundaryKind::Exit) ay = 0.0;
        ax = snap(ax);
        ay = snap(ay);

        const double ox = std::floor(ax), oy = std::floor(ay);
        const double fx = ax - ox, fy = ay - oy;
        const std::array<double, 2> wx{1.0 - fx, fx};
        const std::array<double, 2> wy{1.0 - fy, fy};

        std::array<Target, 4> admissible{};
        int n_adm = 0;
        double w_adm = 0.0, w_exit = 0.0, w_obstacle = 0.0;
        for (int b = 0; b < 2; ++b) {
            for (int a = 0; a < 2; ++a) {
                const double w = wx[a] * wy[b];
                if (w == 0.0) continue;
                const long ti = i + static_cast<long>(ox) + a;
                const long tj = j + static_cast<long>(oy) + b;
                const bool out_x = ti < 0 || ti >= nx;
                const bool out_y = tj < 0 || tj >= ny;
                if (out_x || out_y) {
                    std::optional<std::size_t> seg;
                    if (out_x) seg = domain.segment_at(ti < 0 ? Edge::Left : Edge::Right, ci, cj);
                    if ((!seg || domain.segments()[*seg].kind != BoundaryKind::Exit) && out_y)
                        seg = domain.segment_at(tj < 0 ? Edge::Bottom : Edge::Top, ci, cj);
                    if (!seg || domain.segments()[*seg].kind != BoundaryKind::Exit)
                        throw Error("transport crossed a wall at cell " + std::to_string(c));
                    out.exited[*seg] += mass * w * area;
                    w_exit += w;
                    continue;
                }
                if (domain.is_obstacle(g.index(static_cast<std::size_t>(ti), static_cast<std::size_t>(tj)))) {
                    w_obstacle += w;
                    continue;
                }
                admissible[n_adm++] = {ti, tj, w};
                w_adm += w;
            }
        }

        if (n_adm == 0) {
            out.rho[c] += mass * (1.0 - w_exit);
            if (cap) moves.push_back({c, c, mass * (1.0 - w_exit)});
            continue;
        }
        const double scale = w_obstacle > 0.0 ? (w_adm + w_obstacle) / w_adm : 1.0;
        for (int k = 0; k < n_adm; ++k) {
            const auto& t = admissible[k];
            const auto to = g.index(static_cast<std::size_t>(t.i), static_cast<std::size_t>(t.j));
            out.rho[to] += mass * t.w * scale;
            if (cap) moves.push_back({c, to, mass * t.w * scale});
        }
    }

    if (cap) {
        if (std::any_of(out.rho.begin(), out.rho.end(), [&](double r) { return r > *cap; }))
            apply_supply_limit(moves, out.rho, *cap);
    }
    return out;
}

VelocityField assemble_velocity(const WalkingDomain& domain, std::span<const double> rho,
                                std::span<const Vec2> desired, std::span<const double> free_depth,
                                std::span<const double> delayed_speed, const PerceptionConfig& cfg,
                                const FundamentalDiagram& fd, RegionAreaCache* cache) {
    const Grid& g = domain.grid();
    VelocityField out;
    out.perception = perceive_2d(domain, rho, desired, free_depth, delayed_speed, cfg, cache);
    out.velocity.assign(g.size(), Vec2{});
    out.speed.assign(g.size(), 0.0);
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (domain.is_obstacle(c)) continue;
        const double speed = fd.speed(std::clamp(out.perception.density[c], 0.0, fd.jam_density));
        const Vec2 dir = walking_direction(desired[c], out.perception.interaction[c], cfg.theta);
        out.speed[c] = speed;
        out.velocity[c] = dir * speed;
    }
    return out;
}

void Solver2DConfig::validate() const {
    fd.validate();
    perception.validate();
    if (!(cfl > 0.0 && cfl <= 1.0)) throw Error("cfl must lie in (0,1]");
    if (!(dt_max > 0.0)) throw Error("dt_max must be positive");
}

Solver2D::Solver2D(WalkingDomain domain, PotentialField potential, Solver2DConfig cfg)
    : domain_(std::move(domain)), potential_(std::move(potential)), cfg_(std::move(cfg)) {
    cfg_.validate();
    if (potential_.desired.size() != domain_.grid().size()) throw Error("potential does not match the domain");
    free_depth_ = free_depth_field(domain_, potential_.desired);
    inlet_ = domain_.boundary_cells(BoundaryKind::Inlet);
}

State2D Solver2D::initial(std::vector<double> rho) const {
    if (rho.size() != domain_.grid().size()) throw Error("initial density does not match the domain");
    State2D s;
    s.rho = std::move(rho);
    for (std::size_t c = 0; c < s.rho.size(); ++c)
        if (domain_.is_obstacle(c)) s.rho[c] = 0.0;
    s.exited.assign(domain_.segments().size(), 0.0);
    assemble(s);
    return s;
}

std::vector<double> Solver2D::delayed_speed(const State2D& s) const {
    const auto k = static_cast<std::size_t>(cfg_.perception.law.reflex_delay_steps);
    if (k > 0 && !s.speed_history.empty()) return s.speed_history[std::min(k, s.speed_history.size()) - 1];
    std::vector<double> v(s.rho.size(), 0.0);
    for (std::size_t c = 0; c < v.size(); ++c)
        if (!domain_.is_obstacle(c)) v[c] = cfg_.fd.speed(std::clamp(s.rho[c], 0.0, cfg_.fd.jam_density));
    return v;
}

void Solver2D::assemble(State2D& s) const {
    auto field = assemble_velocity(domain_, s.rho, potential_.desired, free_depth_, delayed_speed(s),
                                   cfg_.perception, cfg_.fd, &area_cache_);
    s.v = std::move(field.velocity);
    s.speed = std::move(field.speed);
    s.rho_p = std::move(field.perception.density);
    s.x_p = std::move(field.perception.point);
    s.e_i = std::move(field.perception.interaction);
}

State2D Solver2D::step(const State2D& prev, std::optional<double> dt_limit) const {
    State2D s = prev;
    assemble(s);
    const auto k = static_cast<std::size_t>(cfg_.perception.law.reflex_delay_steps);
    if (k > 0) {
        s.speed_history.push_front(s.speed);
        while (s.speed_history.size() > k) s.speed_history.pop_back();
    }

    const double dx = domain_.grid().dx();
    double fastest = 0.0;
    for (const auto& v : s.v) fastest = std::max(fastest, norm(v));
    double dt = fastest > 0.0 ? cfg_.cfl * dx / fastest : cfg_.dt_max;
    dt = std::min(dt, cfg_.dt_max);
    if (dt_limit) dt = std::min(dt, *dt_limit);
    if (!(dt > 0.0)) throw Error("non-positive time step");

    auto moved = push_forward(domain_, prev.rho, s.v, dt,
                              cfg_.supply_limit ? std::optional<double>(cfg_.fd.jam_density) : std::nullopt);
    s.last_exited = 0.0;
    for (std::size_t k2 = 0; k2 < moved.exited.size(); ++k2) {
        s.exited[k2] += moved.exited[k2];
        s.last_exited += moved.exited[k2];
    }
    s.rho = std::move(moved.rho);
    s.t = prev.t + dt;
    s.dt = dt;

    const double inflow = cfg_.inflow(s.t);
    s.last_injected = 0.0;
    for (auto c : inlet_) {
        s.last_injected += (inflow - s.rho[c]) * dx * dx;
        s.rho[c] = inflow;
    }
    s.injected += s.last_injected;

    for (std::size_t c = 0; c < s.rho.size(); ++c)
        if (!std::isfinite(s.rho[c]) || s.rho[c] < 0.0)
            throw Error("invalid density " + std::to_string(s.rho[c]) + " at cell " + std::to_string(c) +
                        ", t = " + std::to_string(s.t));
    return s;
}

} // namespace crowd
