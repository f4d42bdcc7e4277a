#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "crowd/diagnostics.hpp"
#include "crowd/perception.hpp"
#include "oracles.hpp"

using namespace crowd;

namespace {

const double deg85 = 85.0 * std::numbers::pi / 180.0;

WalkingDomain open_square(std::size_t n, double dx) {
    return WalkingDomain(Grid(n, n, dx), {{Edge::Right, 0.0, static_cast<double>(n) * dx, BoundaryKind::Exit, "out"}});
}

bool has_member(const SensoryRegion& r, std::size_t cell) {
    return std::any_of(r.members.begin(), r.members.end(), [&](const RegionMember& m) { return m.cell == cell; });
}

SensoryRegion line_region(std::size_t n, double dx, std::size_t cell, double delta) {
    return build_region_1d(Grid(n, 1, dx), cell, delta, false);
}

} // namespace

TEST_CASE("1D region covers [x, x + delta]") {
    const auto r = line_region(100, 0.01, 30, 0.2);
    REQUIRE(r.members.size() == 21);
    CHECK(r.members.front().cell == 30);
    CHECK(r.members.back().cell == 50);
    CHECK(r.members.back().distance == doctest::Approx(0.2));
    // Clipped at the outlet, wrapped when periodic.
    CHECK(line_region(100, 0.01, 95, 0.2).members.size() == 5);
    CHECK(build_region_1d(Grid(100, 1, 0.01), 95, 0.2, true).members.back().cell == 15);
}

TEST_CASE("2D region cone sign and obstacle clipping") {
    WalkingDomain d = open_square(41, 0.025);
    const Grid& g = d.grid();
    SensoryLaw law;
    const std::size_t c = g.index(20, 20);
    const double delta = 0.2;
    auto r = build_region(d, c, {1.0, 0.0}, delta, law);
    CHECK(has_member(r, c));
    CHECK(has_member(r, g.index(24, 20)));  // x + (delta/2, 0)
    CHECK_FALSE(has_member(r, g.index(16, 20))); // x - (delta/2, 0)
    for (const auto& m : r.members) {
        CHECK(m.distance <= delta * (1.0 + 1e-12));
        if (m.distance > 0.0) CHECK(dot(m.offset, {1.0, 0.0}) / m.distance >= std::cos(law.half_angle) - 1e-12);
    }
    d.set_obstacle(g.index(24, 20), true);
    r = build_region(d, c, {1.0, 0.0}, delta, law);
    CHECK_FALSE(has_member(r, g.index(24, 20)));
}

TEST_CASE("2D region stays inside the domain by default") {
    const Grid g(10, 10, 0.1);
    const WalkingDomain d(g, {{Edge::Right, 0.4, 0.6, BoundaryKind::Exit, "out"}});
    const auto r = build_region(d, g.index(9, 5), {1.0, 0.0}, 0.25, SensoryLaw{});
    CHECK_FALSE(r.members.empty());
    for (const auto& m : r.members) CHECK(m.cell != exterior_cell);
}

TEST_CASE("2D region can reach past an exit but never past a wall") {
    const Grid g(10, 10, 0.1);
    const WalkingDomain d(g, {{Edge::Right, 0.4, 0.6, BoundaryKind::Exit, "out"}});
    SensoryLaw law;
    law.see_past_exits = true;
    const auto r = build_region(d, g.index(9, 5), {1.0, 0.0}, 0.25, law);
    long beyond = 0;
    for (const auto& m : r.members)
        if (m.cell == exterior_cell) {
            ++beyond;
            CHECK((m.dj == 0 || m.dj == -1)); // exit rows 4 and 5
        }
    CHECK(beyond == 4); // two cells beyond each exit row
    const auto w = build_region(d, g.index(9, 1), {1.0, 0.0}, 0.25, law);
    for (const auto& m : w.members) CHECK(m.cell != exterior_cell);
}

TEST_CASE("s1 examples") {
    const std::vector<double> uniform(100, 0.37);
    CHECK(strategy_s1(line_region(100, 0.01, 10, 0.2), uniform).density == 0.37);
    std::vector<double> step(100, 0.2);
    step[30] = 0.6;
    const auto p = strategy_s1(line_region(100, 0.01, 10, 0.2), step);
    CHECK(p.density == 0.6);
    CHECK(p.sampled == 30);
}

TEST_CASE("s2 examples") {
    const Grid g(200, 1, 0.005);
    const auto bump = gaussian_bump_1d(g, 0.25, 0.3, 1.0 / 35.0, 0.4);
    const double peak = *std::max_element(bump.begin(), bump.end());
    CHECK(strategy_s2(build_region_1d(g, 60, 0.2, false), bump).density == peak);

    const std::vector<double> uniform(100, 0.4);
    const auto u = strategy_s2(line_region(100, 0.01, 10, 0.2), uniform);
    CHECK(u.sampled == 10);

    std::vector<double> two(100, 0.1);
    two[20] = two[40] = 0.8; // distances 0.1 and 0.3 from cell 10
    const auto t = strategy_s2(line_region(100, 0.01, 10, 0.35), two);
    CHECK(t.sampled == 20);
    CHECK(t.point.x == doctest::Approx(0.205));
}

TEST_CASE("s3 examples") {
    std::vector<double> rho(100, 0.25);
    rho[30] = 0.55;
    CHECK(strategy_s3(line_region(100, 0.01, 10, 0.2), rho).density == doctest::Approx(0.31).epsilon(1e-12));

    std::vector<double> dec(100);
    for (std::size_t j = 0; j < 100; ++j) dec[j] = 0.9 - 0.008 * static_cast<double>(j);
    const auto p = strategy_s3(line_region(100, 0.01, 10, 0.2), dec);
    CHECK(p.sampled == 10);
    CHECK(p.density == dec[10]);
}

TEST_CASE("s4 examples") {
    const std::vector<double> uniform(100, 0.3);
    CHECK(strategy_s4(line_region(100, 0.01, 10, 0.2), uniform).density == doctest::Approx(0.3).epsilon(1e-14));

    // rho linear from 0 at x to rho1 at x + delta.
    const std::size_t K = 40;
    const double dx = 0.005, rho1 = 0.6, delta = static_cast<double>(K) * dx;
    std::vector<double> lin(100, 0.0);
    for (std::size_t k = 0; k <= K; ++k) lin[10 + k] = rho1 * static_cast<double>(k) / static_cast<double>(K);
    const auto p = strategy_s4(line_region(100, dx, 10, delta), lin);
    CHECK(p.density == doctest::Approx(rho1 / 2.0).epsilon(1e-13));
    // The discrete centroid sits dx/3 beyond the continuous 2 delta / 3.
    CHECK(std::abs(p.point.x - (0.0525 + 2.0 * delta / 3.0)) <= dx / 3.0 + 1e-12);

    const std::vector<double> empty(100, 0.0);
    const auto e = strategy_s4(line_region(100, 0.01, 10, 0.2), empty);
    CHECK(e.density == 0.0);
    CHECK_FALSE(e.has_point);
}

TEST_CASE("empty region falls back to local perception") {
    SensoryRegion r;
    r.centre_cell = 3;
    const std::vector<double> rho{0.1, 0.2, 0.3, 0.4};
    CHECK(strategy_s1(r, rho).density == 0.4);
    CHECK(strategy_s2(r, rho).density == 0.4);
    CHECK(strategy_s3(r, rho).density == 0.4);
    CHECK(strategy_s4(r, rho).density == 0.4);
}

TEST_CASE("interaction and walking directions") {
    const Vec2 e = interaction_direction({0.2, 0.5}, {0.4, 0.5}, {1.0, 0.0}, 0.01);
    CHECK(e.x == doctest::Approx(-1.0));
    CHECK(e.y == doctest::Approx(0.0));
    const Vec2 ed{0.6, 0.8};
    const Vec2 s1 = interaction_direction({0.1, 0.1}, Vec2{0.1, 0.1} + ed * 0.3, ed, 0.01);
    CHECK(s1.x == doctest::Approx(-0.6).epsilon(1e-14));
    CHECK(s1.y == doctest::Approx(-0.8).epsilon(1e-14));
    CHECK(interaction_direction({0.1, 0.1}, {0.1, 0.1}, ed, 0.01) == -ed);
    CHECK(interaction_direction({0.1, 0.1}, {0.1, 0.1}, ed, 0.01, DegenerateRule::NoInteraction) == ed);

    const Vec2 w = walking_direction(ed, -ed, 0.7);
    CHECK(w.x == doctest::Approx(0.6));
    CHECK(w.y == doctest::Approx(0.8));
    CHECK(walking_direction(ed, ed, 0.3).x == doctest::Approx(0.6));
    const Vec2 b = walking_direction({1.0, 0.0}, {0.0, 1.0}, 0.5);
    CHECK(b.x == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(b.y == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(walking_direction(ed, -ed, 0.5) == ed);
}

TEST_CASE("strategies match brute-force oracles on random small fields") {
    std::mt19937_64 rng(2024);
    PerceptionConfig cfg;
    cfg.law.half_angle = deg85;
    for (int trial = 0; trial < 200; ++trial) {
        const oracle::RandomCase c = oracle::random_case(rng);
        const Grid& g = c.domain.grid();
        cfg.law.fading = trial % 3 == 0 ? 2.0 : 1.0;
        cfg.law.see_past_exits = trial % 2 == 1;
        for (Strategy s : {Strategy::S1, Strategy::S2, Strategy::S3, Strategy::S4}) {
            cfg.strategy = s;
            const auto fast = perceive_2d(c.domain, c.rho, c.desired, c.free_depth, c.speed, cfg);
            const auto ref = perceive_2d_reference(c.domain, c.rho, c.desired, c.free_depth, c.speed, cfg);
            for (std::size_t k = 0; k < g.size(); ++k) {
                if (c.domain.is_obstacle(k)) continue;
                const double delta = depth(cfg.law, c.free_depth[k], c.speed[k]);
                const Vec2 x = g.centre(k);
                const auto region = oracle::brute_region(c.domain, k, c.desired[k], delta, cfg.law.half_angle,
                                                         cfg.law.see_past_exits);
                double expect = 0.0;
                Vec2 point = x;
                if (s == Strategy::S1) {
                    const auto o = oracle::brute_nearest(region, c.rho, x, x + c.desired[k] * delta);
                    expect = o.density;
                    point = o.point;
                } else if (s == Strategy::S4) {
                    const auto o = oracle::brute_centre_of_mass(region, c.rho, x, c.desired[k], cfg.law.half_angle,
                                                                cfg.law.fading);
                    expect = o.density;
                    point = o.point;
                } else {
                    const auto o = oracle::brute_argmax(region, c.rho, x, k, delta, s == Strategy::S3);
                    expect = o.density;
                    point = o.point;
                }
                INFO("trial " << trial << " strategy " << to_string(s) << " cell " << k);
                CHECK(std::abs(fast.density[k] - expect) <= 1e-12);
                CHECK(std::abs(fast.point[k].x - point.x) <= 1e-12);
                CHECK(std::abs(fast.point[k].y - point.y) <= 1e-12);
                CHECK(std::abs(fast.density[k] - ref.density[k]) <= 1e-12);
                CHECK(std::abs(fast.interaction[k].x - ref.interaction[k].x) <= 1e-12);
                CHECK(std::abs(fast.interaction[k].y - ref.interaction[k].y) <= 1e-12);
            }
        }
    }
}

TEST_CASE("region-area cache never changes results") {
    std::mt19937_64 rng(11);
    PerceptionConfig cfg;
    cfg.strategy = Strategy::S4;
    for (int trial = 0; trial < 20; ++trial) {
        oracle::RandomCase c = oracle::random_case(rng);
        RegionAreaCache cache;
        for (int pass = 0; pass < 3; ++pass) {
            const auto plain = perceive_2d(c.domain, c.rho, c.desired, c.free_depth, c.speed, cfg);
            const auto cached = perceive_2d(c.domain, c.rho, c.desired, c.free_depth, c.speed, cfg, &cache);
            CHECK(plain.density == cached.density);
            c.rho = oracle::random_field(rng, c.rho.size(), 0.0, 1.0);
            for (std::size_t k = 0; k < c.rho.size(); ++k)
                if (c.domain.is_obstacle(k)) c.rho[k] = 0.0;
        }
    }
}

TEST_CASE("perceived density properties") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PerceptionConfig cfg;
    for (int trial = 0; trial < 40; ++trial) {
        oracle::RandomCase c = oracle::random_case(rng);
        const Grid& g = c.domain.grid();

        SUBCASE("uniform density is perceived unchanged") {
            const double level = u(rng);
            std::vector<double> flat(g.size(), level);
            for (std::size_t k = 0; k < g.size(); ++k)
                if (c.domain.is_obstacle(k)) flat[k] = 0.0;
            for (Strategy s : {Strategy::S1, Strategy::S2, Strategy::S3}) {
                cfg.strategy = s;
                const auto p = perceive_2d(c.domain, flat, c.desired, c.free_depth, c.speed, cfg);
                for (std::size_t k = 0; k < g.size(); ++k) {
                    if (c.domain.is_obstacle(k)) continue;
                    CHECK(p.density[k] == level);
                }
            }
            // s4 on cells whose region stays inside free space.
            cfg.strategy = Strategy::S4;
            WalkingDomain big = open_square(40, 0.025);
            std::vector<double> f(big.grid().size(), level);
            std::vector<Vec2> e(f.size(), c.desired[0]);
            std::vector<double> fd(f.size(), 0.1), sp(f.size(), 1.0);
            const auto p = perceive_2d(big, f, e, fd, sp, cfg);
            CHECK(p.density[big.grid().index(20, 20)] == doctest::Approx(level).epsilon(1e-13));
        }

        SUBCASE("s1 to s3 stay within the region's density range; s3 is a convex combination") {
            for (Strategy s : {Strategy::S1, Strategy::S2, Strategy::S3}) {
                cfg.strategy = s;
                const auto p = perceive_2d(c.domain, c.rho, c.desired, c.free_depth, c.speed, cfg);
                for (std::size_t k = 0; k < g.size(); ++k) {
                    if (c.domain.is_obstacle(k)) continue;
                    const double delta = depth(cfg.law, c.free_depth[k], c.speed[k]);
                    const auto region = oracle::brute_region(c.domain, k, c.desired[k], delta, cfg.law.half_angle);
                    double lo = 1.0, hi = 0.0;
                    for (const auto& m : region) {
                        lo = std::min(lo, oracle::density_at(m, c.rho));
                        hi = std::max(hi, oracle::density_at(m, c.rho));
                    }
                    CHECK(p.density[k] >= lo);
                    CHECK(p.density[k] <= hi);
                    if (s == Strategy::S3) {
                        const auto arg = oracle::brute_argmax(region, c.rho, g.centre(k), k, delta, false);
                        CHECK(p.density[k] >= std::min(c.rho[k], arg.density) - 1e-15);
                        CHECK(p.density[k] <= std::max(c.rho[k], arg.density) + 1e-15);
                    }
                }
            }
        }

        SUBCASE("density behind the cone is never seen") {
            const std::size_t k = g.size() / 2;
            if (c.domain.is_obstacle(k)) continue;
            const Vec2 x = g.centre(k);
            std::vector<double> changed = c.rho;
            for (std::size_t m = 0; m < g.size(); ++m) {
                if (m == k || c.domain.is_obstacle(m)) continue;
                const Vec2 off = g.centre(m) - x;
                if (angle_to(c.desired[k], off) > cfg.law.half_angle + 1e-9) changed[m] = u(rng);
            }
            for (Strategy s : {Strategy::S1, Strategy::S2, Strategy::S3, Strategy::S4}) {
                cfg.strategy = s;
                const auto a = perceive_2d(c.domain, c.rho, c.desired, c.free_depth, c.speed, cfg);
                const auto b = perceive_2d(c.domain, changed, c.desired, c.free_depth, c.speed, cfg);
                CHECK(a.density[k] == b.density[k]);
                CHECK(a.point[k] == b.point[k]);
            }
        }
    }
}

TEST_CASE("1D perception of the bell-shaped test density") {
    const Grid g(200, 1, 0.005);
    const auto bump = gaussian_bump_1d(g, 0.25, 0.3, 1.0 / 35.0, 0.4);
    const auto fd = FundamentalDiagram::asia_rush().nondimensional();
    std::vector<double> free(200), speed(200);
    for (std::size_t j = 0; j < 200; ++j) {
        free[j] = 1.0 - g.centre(j).x;
        speed[j] = fd.speed(bump[j]);
    }
    PerceptionConfig cfg;
    cfg.strategy = Strategy::S1;
    const auto s1 = perceive_1d(g, bump, free, speed, cfg, false);
    for (double v : s1.density) CHECK(std::abs(v - 0.25) <= 1e-12);
    cfg.strategy = Strategy::S4;
    const auto s4 = perceive_1d(g, bump, free, speed, cfg, false);
    CHECK(*std::max_element(s4.density.begin(), s4.density.end()) < 0.55);
}

TEST_CASE("strategy names") {
    for (Strategy s : {Strategy::Local, Strategy::S1, Strategy::S2, Strategy::S3, Strategy::S4})
        CHECK(strategy_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(strategy_from_string("s5"), Error);
    PerceptionConfig cfg;
    cfg.theta = 1.3;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("theta"), Error);
}
