#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "crowd/diagnostics.hpp"
#include "crowd/solver2d.hpp"
#include "oracles.hpp"

using namespace crowd;

namespace {

const FundamentalDiagram nd = FundamentalDiagram::asia_rush().nondimensional();

WalkingDomain box(std::size_t nx, std::size_t ny, double dx) {
    return WalkingDomain(Grid(nx, ny, dx),
                         {{Edge::Right, 0.0, static_cast<double>(ny) * dx, BoundaryKind::Exit, "out"}});
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Interior blob well away from every edge.
std::vector<double> blob(const Grid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 0.9);
    std::vector<double> rho(g.size(), 0.0);
    for (std::size_t j = 4; j + 4 < g.ny(); ++j)
        for (std::size_t i = 4; i + 4 < g.nx(); ++i) rho[g.index(i, j)] = u(rng);
    return rho;
}

} // namespace

TEST_CASE("push-forward: zero velocity is the identity") {
    std::mt19937_64 rng(1);
    const WalkingDomain d = box(16, 12, 0.1);
    const auto rho = oracle::random_field(rng, d.grid().size(), 0.0, 1.0);
    const std::vector<Vec2> v(rho.size(), Vec2{});
    CHECK(push_forward(d, rho, v, 0.05).rho == rho);
}

TEST_CASE("push-forward: integer displacement shifts bitwise") {
    std::mt19937_64 rng(2);
    const WalkingDomain d = box(20, 16, 0.125);
    const Grid& g = d.grid();
    const auto rho = blob(g, rng);
    for (const Vec2 vel : {Vec2{0.25, 0.0}, Vec2{0.0, -0.25}, Vec2{-0.25, 0.0}}) {
        const std::vector<Vec2> v(rho.size(), vel);
        const auto out = push_forward(d, rho, v, 0.5).rho;
        const long si = static_cast<long>(vel.x * 0.5 / 0.125), sj = static_cast<long>(vel.y * 0.5 / 0.125);
        for (std::size_t c = 0; c < g.size(); ++c) {
            const long i = static_cast<long>(g.col(c)) + si, j = static_cast<long>(g.row(c)) + sj;
            if (rho[c] == 0.0) continue;
            CHECK(out[g.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] == rho[c]);
        }
        CHECK(sum(out) == doctest::Approx(sum(rho)).epsilon(1e-15));
    }
}

TEST_CASE("push-forward: half-cell diagonal step splits into quarters") {
    const WalkingDomain d = box(10, 10, 0.1);
    const Grid& g = d.grid();
    std::vector<double> rho(g.size(), 0.0);
    rho[g.index(4, 4)] = 0.8;
    const std::vector<Vec2> v(rho.size(), Vec2{0.5, 0.5});
    const auto out = push_forward(d, rho, v, 0.1).rho;
    for (std::size_t i : {4, 5})
        for (std::size_t j : {4, 5}) CHECK(std::abs(out[g.index(i, j)] - 0.2) <= 1e-12);
    CHECK(std::abs(sum(out) - 0.8) <= 1e-12);
}

TEST_CASE("push-forward matches exact square intersections for random sub-cell displacements") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const WalkingDomain d = box(18, 14, 0.1);
    const Grid& g = d.grid();
    for (int trial = 0; trial < 50; ++trial) {
        const auto rho = blob(g, rng);
        std::vector<Vec2> v(rho.size());
        for (auto& e : v) {
            const double a = u(rng) * 3.14159, s = std::abs(u(rng));
            e = {s * std::cos(a), s * std::sin(a)};
        }
        const double dt = 0.1;
        const auto out = push_forward(d, rho, v, dt).rho;
        std::vector<double> ref(g.size(), 0.0);
        for (std::size_t c = 0; c < g.size(); ++c) {
            if (rho[c] == 0.0) continue;
            const Vec2 lo = g.centre(c) - Vec2{0.05, 0.05} + v[c] * dt;
            for (std::size_t k = 0; k < g.size(); ++k) {
                const double a = oracle::square_overlap(lo, g.centre(k) - Vec2{0.05, 0.05}, 0.1);
                ref[k] += rho[c] * a / 0.01;
            }
        }
        for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(out[k] - ref[k]) <= 1e-12);
        CHECK(std::abs(total_mass(out, 0.01) - total_mass(rho, 0.01)) <= 1e-12);
    }
}

TEST_CASE("push-forward: exits remove and tally mass, walls stop the normal motion") {
    const Grid g(6, 6, 0.1);
    const WalkingDomain d(g, {{Edge::Right, 0.0, 0.3, BoundaryKind::Exit, "out"}});
    std::vector<double> rho(g.size(), 0.0);
    rho[g.index(5, 1)] = 0.6; // faces the exit
    rho[g.index(5, 4)] = 0.6; // faces a wall
    const std::vector<Vec2> v(rho.size(), Vec2{0.5, 0.0});
    const auto out = push_forward(d, rho, v, 0.1);
    CHECK(out.rho[g.index(5, 1)] == doctest::Approx(0.3));
    CHECK(out.exited[0] == doctest::Approx(0.3 * 0.01));
    CHECK(out.rho[g.index(5, 4)] == 0.6);
    CHECK(total_mass(out.rho, 0.01) + out.exited[0] == doctest::Approx(total_mass(rho, 0.01)).epsilon(1e-14));
}

TEST_CASE("push-forward: mass heading into an obstacle is redistributed") {
    const Grid g(8, 8, 0.1);
    WalkingDomain d(g, {{Edge::Right, 0.0, 0.8, BoundaryKind::Exit, "out"}});
    d.set_obstacle(g.index(4, 4), true);
    std::vector<double> rho(g.size(), 0.0);
    rho[g.index(3, 3)] = 0.8;
    const std::vector<Vec2> v(rho.size(), Vec2{0.5, 0.5});
    const auto out = push_forward(d, rho, v, 0.1).rho;
    CHECK(out[g.index(4, 4)] == 0.0);
    CHECK(sum(out) == doctest::Approx(0.8).epsilon(1e-15));
    for (double r : out) CHECK(r >= 0.0);
    CHECK(out[g.index(3, 4)] == doctest::Approx(0.8 / 3.0));
}

TEST_CASE("push-forward: CFL violations are rejected") {
    const WalkingDomain d = box(6, 6, 0.1);
    std::vector<double> rho(36, 0.5);
    const std::vector<Vec2> v(36, Vec2{1.5, 0.0});
    CHECK_THROWS_WITH_AS(push_forward(d, rho, v, 0.1), "cfl violated", Error);
}

TEST_CASE("supply limiter: plain transport overfills a jammed cell, the limiter does not") {
    const Grid g(7, 7, 0.1);
    const WalkingDomain d(g, {{Edge::Right, 0.0, 0.7, BoundaryKind::Exit, "out"}});
    std::vector<double> rho(g.size(), 0.0);
    std::vector<Vec2> v(g.size(), Vec2{});
    const std::size_t centre = g.index(3, 3);
    rho[centre] = 0.95;
    rho[g.index(2, 3)] = 0.9;
    rho[g.index(4, 3)] = 0.9;
    v[g.index(2, 3)] = {0.5, 0.0};
    v[g.index(4, 3)] = {-0.5, 0.0};
    const auto plain = push_forward(d, rho, v, 0.1);
    CHECK(plain.rho[centre] > 1.0);
    const auto capped = push_forward(d, rho, v, 0.1, 1.0);
    for (double r : capped.rho) {
        CHECK(r <= 1.0);
        CHECK(r >= 0.0);
    }
    CHECK(sum(capped.rho) == doctest::Approx(sum(rho)).epsilon(1e-14));

    // With nothing near the cap the limiter leaves the result untouched.
    std::mt19937_64 rng(4);
    const auto light = oracle::random_field(rng, g.size(), 0.0, 0.3);
    std::vector<Vec2> w(g.size(), Vec2{0.3, 0.2});
    CHECK(push_forward(d, light, w, 0.1, 1.0).rho == push_forward(d, light, w, 0.1).rho);
}

TEST_CASE("supply limiter: crowded random fields never exceed the cap") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Grid g(9, 9, 0.1);
    const WalkingDomain d(g, {{Edge::Right, 0.3, 0.6, BoundaryKind::Exit, "out"}});
    for (int trial = 0; trial < 200; ++trial) {
        const auto rho = oracle::random_field(rng, g.size(), 0.6, 1.0);
        std::vector<Vec2> v(g.size());
        for (auto& vel : v) vel = {0.7 * u(rng), 0.7 * u(rng)};
        const auto out = push_forward(d, rho, v, 0.1, 1.0);
        for (double r : out.rho) {
            CHECK(r <= 1.0);
            CHECK(r >= 0.0);
        }
        const double area = g.dx() * g.dx();
        CHECK(sum(out.rho) * area + sum(out.exited) == doctest::Approx(sum(rho) * area).epsilon(1e-13));
    }
}

TEST_CASE("velocity assembly") {
    const Grid g(20, 12, 0.05);
    const WalkingDomain d(g, {{Edge::Left, 0.2, 0.4, BoundaryKind::Inlet, "in"},
                              {Edge::Right, 0.2, 0.4, BoundaryKind::Exit, "out"}});
    const auto pot = solve_potential(d);
    const auto free = free_depth_field(d, pot.desired);
    std::vector<double> speed(g.size(), 1.0);
    PerceptionConfig cfg;

    SUBCASE("empty crowd walks at free speed along e_d") {
        for (Strategy s : {Strategy::S1, Strategy::S2, Strategy::S3, Strategy::S4}) {
            cfg.strategy = s;
            const auto f = assemble_velocity(d, std::vector<double>(g.size(), 0.0), pot.desired, free, speed, cfg, nd);
            for (std::size_t c = 0; c < g.size(); ++c) {
                CHECK(norm(f.velocity[c]) == doctest::Approx(1.0).epsilon(1e-14));
                CHECK(f.velocity[c].x == doctest::Approx(pot.desired[c].x).epsilon(1e-12));
                CHECK(f.velocity[c].y == doctest::Approx(pot.desired[c].y).epsilon(1e-12));
            }
        }
    }
    SUBCASE("s1 walks along e_d whatever the density") {
        std::mt19937_64 rng(8);
        cfg.strategy = Strategy::S1;
        const auto rho = oracle::random_field(rng, g.size(), 0.0, 1.0);
        const auto f = assemble_velocity(d, rho, pot.desired, free, speed, cfg, nd);
        for (std::size_t c = 0; c < g.size(); ++c) {
            const Vec2 e = f.velocity[c] * (1.0 / norm(f.velocity[c]));
            CHECK(std::abs(e.x - pot.desired[c].x) < 1e-12);
            CHECK(std::abs(e.y - pot.desired[c].y) < 1e-12);
        }
    }
    SUBCASE("uniform density under s2 gives the fundamental-diagram speed") {
        cfg.strategy = Strategy::S2;
        const auto f = assemble_velocity(d, std::vector<double>(g.size(), 0.5), pot.desired, free, speed, cfg, nd);
        CHECK(norm(f.velocity[g.index(8, 6)]) == doctest::Approx(nd.speed(0.5)).epsilon(1e-14));
    }
}

TEST_CASE("2D steps: vacuum, conservation, bounds and the mass audit") {
    const Grid g(30, 20, 1.0 / 30.0);
    WalkingDomain d(g, {{Edge::Left, 0.2, 0.5, BoundaryKind::Inlet, "in"},
                        {Edge::Right, 0.25, 0.45, BoundaryKind::Exit, "out"}});
    d.add_obstacle(0.4, 0.1, 0.5, 0.3);
    const auto pot = solve_potential(d);

    SUBCASE("empty domain without inflow stays empty") {
        Solver2DConfig cfg;
        cfg.fd = nd;
        Solver2D solver(d, pot, cfg);
        auto s = solver.initial(std::vector<double>(g.size(), 0.0));
        for (int k = 0; k < 20; ++k) s = solver.step(s);
        for (double r : s.rho) CHECK(r == 0.0);
    }
    SUBCASE("audit balances for every strategy") {
        for (Strategy st : {Strategy::Local, Strategy::S1, Strategy::S2, Strategy::S3, Strategy::S4}) {
            Solver2DConfig cfg;
            cfg.fd = nd;
            cfg.perception.strategy = st;
            cfg.inflow = PiecewiseLinear({{0.0, 0.0}, {0.05, 0.3}, {0.3, 0.3}, {0.35, 0.0}});
            Solver2D solver(d, pot, cfg);
            std::mt19937_64 rng(5);
            auto rho0 = oracle::random_field(rng, g.size(), 0.0, 0.6);
            auto s = solver.initial(rho0);
            const double m0 = total_mass(s.rho, g.dx() * g.dx());
            while (s.t < 0.8) {
                s = solver.step(s);
                for (double r : s.rho) {
                    CHECK(r >= 0.0);
                    CHECK(r <= 1.0 + 1e-12);
                }
            }
            for (std::size_t c = 0; c < g.size(); ++c)
                if (d.is_obstacle(c)) CHECK(s.rho[c] == 0.0);
            const double exited = std::accumulate(s.exited.begin(), s.exited.end(), 0.0);
            CHECK(std::abs(m0 + s.injected - exited - total_mass(s.rho, g.dx() * g.dx())) <= 1e-10);
        }
    }
}

TEST_CASE("2D solver errors") {
    const Grid g(10, 10, 0.1);
    const WalkingDomain d(g, {{Edge::Right, 0.0, 1.0, BoundaryKind::Exit, "out"}});
    auto pot = solve_potential(d);
    Solver2DConfig cfg;
    cfg.fd = nd;
    Solver2D solver(d, pot, cfg);
    CHECK_THROWS_AS(solver.initial(std::vector<double>(5, 0.0)), Error);
    pot.desired.resize(3);
    CHECK_THROWS_AS(Solver2D(d, pot, cfg), Error);
}
