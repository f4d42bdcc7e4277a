#include "crowd/perception.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crowd {

std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::Local: return "local";
    case Strategy::S1: return "s1";
    case Strategy::S2: return "s2";
    case Strategy::S3: return "s3";
    case Strategy::S4: return "s4";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "local") return Strategy::Local;
    if (s == "s1") return Strategy::S1;
    if (s == "s2") return Strategy::S2;
    if (s == "s3") return Strategy::S3;
    if (s == "s4") return Strategy::S4;
    throw Error("unknown strategy '" + s + "' (expected s1|s2|s3|s4|local)");
}

void PerceptionConfig::validate() const {
    law.validate();
    if (!(theta >= 0.0 && theta <= 1.0)) throw Error("theta must lie in [0,1]");
}

namespace {

// Ball and cone test on an integer cell offset; the centre always passes.
bool cone_member(long di, long dj, const Vec2& dir, double reach2, double cos_half) {
    const double d2 = static_cast<double>(di * di + dj * dj);
    if (d2 > reach2) return false;
    if (d2 == 0.0) return true;
    const double along = static_cast<double>(di) * dir.x + static_cast<double>(dj) * dir.y;
    return !(along < cos_half * std::sqrt(d2) - 1e-12);
}

double fade(double alpha, double half_angle, double fading) {
    const double ratio = std::min(alpha, half_angle) / half_angle;
    return 1.0 - (fading == 1.0 ? ratio : std::pow(ratio, fading));
}

// Which cells outside the grid lie behind an exit segment: straight out of a
// free boundary cell whose outer face is an exit. Corners never qualify, and
// with see_past_exits off no outside cell does.
class ExitShadow {
public:
    ExitShadow(const WalkingDomain& domain, bool see_past_exits)
        : nx_(static_cast<long>(domain.grid().nx())), ny_(static_cast<long>(domain.grid().ny())) {
        const Grid& g = domain.grid();
        auto open = [&](Edge e, std::size_t i, std::size_t j) {
            return see_past_exits && !domain.is_obstacle(i, j) && domain.boundary_kind(e, i, j) == BoundaryKind::Exit;
        };
        left_.resize(g.ny());
        right_.resize(g.ny());
        bottom_.resize(g.nx());
        top_.resize(g.nx());
        for (std::size_t j = 0; j < g.ny(); ++j) {
            left_[j] = open(Edge::Left, 0, j);
            right_[j] = open(Edge::Right, g.nx() - 1, j);
        }
        for (std::size_t i = 0; i < g.nx(); ++i) {
            bottom_[i] = open(Edge::Bottom, i, 0);
            top_[i] = open(Edge::Top, i, g.ny() - 1);
        }
        any_bottom_ = std::find(bottom_.begin(), bottom_.end(), 1) != bottom_.end();
        any_top_ = std::find(top_.begin(), top_.end(), 1) != top_.end();
    }

    bool inside(long i, long j) const { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }

    bool exterior(long i, long j) const {
        const bool out_i = i < 0 || i >= nx_;
        const bool out_j = j < 0 || j >= ny_;
        if (out_i == out_j) return false;
        if (out_i) return i < 0 ? left_[static_cast<std::size_t>(j)] : right_[static_cast<std::size_t>(j)];
        return j < 0 ? bottom_[static_cast<std::size_t>(i)] : top_[static_cast<std::size_t>(i)];
    }

    bool left(long j) const { return left_[static_cast<std::size_t>(j)]; }
    bool right(long j) const { return right_[static_cast<std::size_t>(j)]; }
    bool any_bottom() const { return any_bottom_; }
    bool any_top() const { return any_top_; }

private:
    long nx_, ny_;
    std::vector<char> left_, right_, bottom_, top_;
    bool any_bottom_ = false, any_top_ = false;
};

} // namespace

void build_region(const WalkingDomain& domain, std::size_t cell, const Vec2& desired, double delta,
                  const SensoryLaw& law, SensoryRegion& out) {
    const Grid& g = domain.grid();
    const double dx = g.dx();
    out.centre_cell = cell;
    out.centre = g.centre(cell);
    out.direction = desired;
    out.depth = delta;
    out.half_angle = law.half_angle;
    out.fading = law.fading;
    out.members.clear();

    const ExitShadow shadow(domain, law.see_past_exits);
    const long i0 = static_cast<long>(g.col(cell));
    const long j0 = static_cast<long>(g.row(cell));
    const double reach = delta / dx; // radius in cell units
    const long r = static_cast<long>(std::floor(reach * (1.0 + 1e-12)));
    const double reach2 = reach * reach * (1.0 + 1e-12);
    const double cos_half = std::cos(law.half_angle);

    for (long dj = -r; dj <= r; ++dj) {
        for (long di = -r; di <= r; ++di) {
            const long i = i0 + di, j = j0 + dj;
            const bool in = shadow.inside(i, j);
            if (!in && !shadow.exterior(i, j)) continue;
            if (!cone_member(di, dj, desired, reach2, cos_half)) continue;
            std::size_t idx = exterior_cell;
            if (in) {
                idx = g.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
                if (domain.is_obstacle(idx)) continue;
            }
            out.members.push_back({idx, di, dj, {static_cast<double>(di) * dx, static_cast<double>(dj) * dx},
                                   std::sqrt(static_cast<double>(di * di + dj * dj)) * dx});
        }
    }
}

SensoryRegion build_region(const WalkingDomain& domain, std::size_t cell, const Vec2& desired, double delta,
                           const SensoryLaw& law) {
    SensoryRegion r;
    build_region(domain, cell, desired, delta, law, r);
    return r;
}

void build_region_1d(const Grid& grid, std::size_t cell, double delta, bool periodic, SensoryRegion& out) {
    const double dx = grid.dx();
    const std::size_t n = grid.nx();
    out.centre_cell = cell;
    out.centre = grid.centre(cell);
    out.direction = {1.0, 0.0};
    out.depth = delta;
    out.half_angle = 0.0;
    out.fading = 1.0;
    out.members.clear();

    auto reach = static_cast<std::size_t>(std::floor(delta / dx * (1.0 + 1e-12)));
    if (periodic)
        reach = std::min(reach, n - 1);
    else
        reach = std::min(reach, n - 1 - cell);
    for (std::size_t k = 0; k <= reach; ++k) {
        const std::size_t idx = periodic ? (cell + k) % n : cell + k;
        const double off = static_cast<double>(k) * dx;
        out.members.push_back({idx, static_cast<long>(k), 0, {off, 0.0}, off});
    }
}

SensoryRegion build_region_1d(const Grid& grid, std::size_t cell, double delta, bool periodic) {
    SensoryRegion r;
    build_region_1d(grid, cell, delta, periodic, r);
    return r;
}

namespace {

double density_of(const RegionMember& m, std::span<const double> rho) {
    return m.cell == exterior_cell ? 0.0 : rho[m.cell];
}

// Row-major position order; equals the cell-index order inside the grid.
bool precedes(const RegionMember& a, const RegionMember& b) {
    return a.dj < b.dj || (a.dj == b.dj && a.di < b.di);
}

Perceived centre_fallback(const SensoryRegion& region, std::span<const double> rho) {
    return {region.centre, rho[region.centre_cell], region.centre_cell, true};
}

// argmax of rho over the members; ties go to the smallest distance, then to
// the lowest cell index.
const RegionMember& densest_member(const SensoryRegion& region, std::span<const double> rho) {
    const RegionMember* best = &region.members.front();
    for (const auto& m : region.members) {
        const double a = density_of(m, rho);
        const double b = density_of(*best, rho);
        if (a > b) {
            best = &m;
        } else if (a == b) {
            const long ra = m.di * m.di + m.dj * m.dj;
            const long rb = best->di * best->di + best->dj * best->dj;
            if (ra < rb || (ra == rb && precedes(m, *best))) best = &m;
        }
    }
    return *best;
}

} // namespace

Perceived strategy_s1(const SensoryRegion& region, std::span<const double> rho) {
    if (region.members.empty()) return centre_fallback(region, rho);
    const Vec2 target = region.centre + region.direction * region.depth;
    const RegionMember* best = nullptr;
    double best_d2 = 0.0;
    for (const auto& m : region.members) {
        const Vec2 d = region.centre + m.offset - target;
        const double d2 = dot(d, d);
        if (!best || d2 < best_d2 || (d2 == best_d2 && precedes(m, *best))) {
            best = &m;
            best_d2 = d2;
        }
    }
    return {target, density_of(*best, rho), best->cell, true};
}

Perceived strategy_s2(const SensoryRegion& region, std::span<const double> rho) {
    if (region.members.empty()) return centre_fallback(region, rho);
    const auto& m = densest_member(region, rho);
    return {region.centre + m.offset, density_of(m, rho), m.cell, true};
}

Perceived strategy_s3(const SensoryRegion& region, std::span<const double> rho) {
    if (region.members.empty()) return centre_fallback(region, rho);
    const auto& m = densest_member(region, rho);
    const double g = distance_weight(region.depth, m.distance);
    const double local = rho[region.centre_cell];
    return {region.centre + m.offset, (1.0 - g) * local + g * density_of(m, rho), m.cell, true};
}

Perceived strategy_s4(const SensoryRegion& region, std::span<const double> rho) {
    if (region.members.empty()) return centre_fallback(region, rho);
    double mass = 0.0;
    double area = 0.0;
    Vec2 moment;
    for (const auto& m : region.members) {
        double w = 1.0;
        if (region.half_angle > 0.0 && m.distance > 0.0)
            w = fade(angle_to(region.direction, m.offset), region.half_angle, region.fading);
        const double rw = density_of(m, rho) * w;
        mass += rw;
        area += w;
        moment += m.offset * rw;
    }
    if (!(mass > 0.0)) return {region.centre, 0.0, region.centre_cell, false};
    return {region.centre + moment * (1.0 / mass), mass / area, region.centre_cell, true};
}

Perceived perceive(Strategy s, const SensoryRegion& region, std::span<const double> rho) {
    switch (s) {
    case Strategy::Local: return {region.centre, rho[region.centre_cell], region.centre_cell, false};
    case Strategy::S1: return strategy_s1(region, rho);
    case Strategy::S2: return strategy_s2(region, rho);
    case Strategy::S3: return strategy_s3(region, rho);
    case Strategy::S4: return strategy_s4(region, rho);
    }
    return centre_fallback(region, rho);
}

Vec2 interaction_direction(const Vec2& x, const Vec2& x_p, const Vec2& desired, double dx, DegenerateRule rule) {
    const Vec2 d = x_p - x;
    const double len = norm(d);
    if (len < 0.5 * dx) return rule == DegenerateRule::Avoid ? -desired : desired;
    return d * (-1.0 / len);
}

Vec2 walking_direction(const Vec2& desired, const Vec2& interaction, double theta) {
    const Vec2 w = desired * theta + interaction * (1.0 - theta);
    const double len = norm(w);
    if (len < 1e-12) return desired;
    return w * (1.0 / len);
}

PerceptionField perceive_1d(const Grid& grid, std::span<const double> rho, std::span<const double> free_depth,
                            std::span<const double> delayed_speed, const PerceptionConfig& cfg, bool periodic) {
    const std::size_t n = grid.nx();
    PerceptionField out;
    out.density.resize(n);
    out.point.resize(n);
    if (cfg.strategy == Strategy::Local) {
        std::copy(rho.begin(), rho.end(), out.density.begin());
        for (std::size_t j = 0; j < n; ++j) out.point[j] = grid.centre(j);
        return out;
    }
    SensoryRegion region;
    for (std::size_t j = 0; j < n; ++j) {
        const double delta = depth(cfg.law, free_depth[j], delayed_speed[j]);
        build_region_1d(grid, j, delta, periodic, region);
        const Perceived p = perceive(cfg.strategy, region, rho);
        out.density[j] = p.density;
        out.point[j] = p.point;
    }
    return out;
}

namespace {

// Evaluates the strategies directly over the region's cells, row by row,
// without materialising the member list.
class RegionScanner {
public:
    RegionScanner(const WalkingDomain& domain, std::span<const double> rho, const SensoryLaw& law,
                  RegionAreaCache* cache)
        : cache_(cache), domain_(domain), g_(domain.grid()), shadow_(domain, law.see_past_exits), rho_(rho), law_(law),
          cos_half_(std::cos(law.half_angle)), nx_(static_cast<long>(g_.nx())), ny_(static_cast<long>(g_.ny())) {
        // Summed-area table of occupied cells, to skip empty rows and regions.
        occupied_.assign(static_cast<std::size_t>((nx_ + 1) * (ny_ + 1)), 0);
        for (long j = 0; j < ny_; ++j)
            for (long i = 0; i < nx_; ++i) {
                const int here = rho_[g_.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] != 0.0;
                occupied_[sat(i + 1, j + 1)] = here + occupied_[sat(i, j + 1)] + occupied_[sat(i + 1, j)] -
                                               occupied_[sat(i, j)];
            }
        const double c = std::cos(law.half_angle), s = std::sin(law.half_angle);
        wedge_cos_ = c;
        wedge_sin_ = s;
    }

    Perceived run(Strategy strategy, std::size_t cell, const Vec2& dir, double delta) {
        cell_ = cell;
        dir_ = dir;
        delta_ = delta;
        i0_ = static_cast<long>(g_.col(cell));
        j0_ = static_cast<long>(g_.row(cell));
        const double reach = delta / g_.dx();
        r_ = static_cast<long>(std::floor(reach * (1.0 + 1e-12)));
        reach2_ = reach * reach * (1.0 + 1e-12);
        centre_ = g_.centre(cell);

        if (strategy == Strategy::S1) return s1();
        const bool empty = box_empty();
        switch (strategy) {
        case Strategy::S2:
        case Strategy::S3:
            if (empty) return {centre_, rho_[cell], cell, true};
            return argmax(strategy == Strategy::S3);
        case Strategy::S4:
            if (empty) return {centre_, 0.0, cell, false};
            return centre_of_mass();
        default: return {centre_, rho_[cell], cell, false};
        }
    }

private:
    std::size_t sat(long i, long j) const { return static_cast<std::size_t>(j * (nx_ + 1) + i); }

    bool member(long di, long dj) const { return cone_member(di, dj, dir_, reach2_, cos_half_); }

    bool box_empty() const {
        const long a = std::max(0L, i0_ - r_), b = std::min(nx_ - 1, i0_ + r_);
        const long c = std::max(0L, j0_ - r_), d = std::min(ny_ - 1, j0_ + r_);
        if (a > b || c > d) return true;
        return occupied_[sat(b + 1, d + 1)] - occupied_[sat(a, d + 1)] - occupied_[sat(b + 1, c)] +
                   occupied_[sat(a, c)] == 0;
    }

    long row_occupied(long j, long lo, long hi) const {
        const long a = std::max(0L, i0_ + lo), b = std::min(nx_ - 1, i0_ + hi);
        if (a > b) return 0;
        return occupied_[sat(b + 1, j + 1)] - occupied_[sat(a, j + 1)] - occupied_[sat(b + 1, j)] +
               occupied_[sat(a, j)];
    }

    // Offsets of row dj inside ball and cone form one run [lo, hi] (both are
    // convex). Estimated from the wedge's two half-planes, then made exact
    // with the membership test. Columns are limited to the grid, widened
    // through exit segments on the left and right edges.
    bool row_span(long dj, long& lo, long& hi) const {
        const long j = j0_ + dj;
        long cmin = 0, cmax = nx_ - 1;
        if (j >= 0 && j < ny_) {
            if (shadow_.left(j)) cmin = i0_ - r_;
            if (shadow_.right(j)) cmax = i0_ + r_;
        }
        const long dmin = std::max(-r_, cmin - i0_), dmax = std::min(r_, cmax - i0_);
        if (dmin > dmax) return false;
        double flo = static_cast<double>(dmin), fhi = static_cast<double>(dmax);
        const Vec2 normals[2] = {{dir_.x * wedge_sin_ + dir_.y * wedge_cos_, dir_.y * wedge_sin_ - dir_.x * wedge_cos_},
                                 {dir_.x * wedge_sin_ - dir_.y * wedge_cos_, dir_.y * wedge_sin_ + dir_.x * wedge_cos_}};
        for (const auto& n : normals) {
            if (std::abs(n.x) < 1e-9) continue;
            const double bound = -static_cast<double>(dj) * n.y / n.x;
            if (n.x > 0.0)
                flo = std::max(flo, bound);
            else
                fhi = std::min(fhi, bound);
        }
        lo = std::max(dmin, static_cast<long>(std::ceil(std::min(flo, static_cast<double>(dmax)))) - 2);
        hi = std::min(dmax, static_cast<long>(std::floor(std::max(fhi, static_cast<double>(dmin)))) + 2);
        while (lo <= hi && !member(lo, dj)) ++lo;
        while (hi >= lo && !member(hi, dj)) --hi;
        if (lo > hi) return false;
        while (lo - 1 >= dmin && member(lo - 1, dj)) --lo;
        while (hi + 1 <= dmax && member(hi + 1, dj)) ++hi;
        return true;
    }

    // All members in row-major order; idx is exterior_cell behind exits.
    template <typename Visit>
    void for_each_member(Visit&& visit) const {
        for (long dj = -r_; dj <= r_; ++dj) {
            const long j = j0_ + dj;
            const bool row_inside = j >= 0 && j < ny_;
            if (!row_inside && !(j < 0 ? shadow_.any_bottom() : shadow_.any_top())) continue;
            long lo = 0, hi = 0;
            if (!row_span(dj, lo, hi)) continue;
            for (long di = lo; di <= hi; ++di) {
                const long i = i0_ + di;
                if (!row_inside || i < 0 || i >= nx_) {
                    if (shadow_.exterior(i, j)) visit(di, dj, exterior_cell);
                    continue;
                }
                const std::size_t idx = g_.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
                if (domain_.is_obstacle(idx)) continue;
                visit(di, dj, idx);
            }
        }
    }

    // Members with nonzero density only. Zero cells add exact zeros to the
    // s4 sums and never win the argmax over the (always present) centre.
    template <typename Visit>
    void for_each_occupied_member(Visit&& visit) const {
        for (long dj = std::max(-r_, -j0_); dj <= std::min(r_, ny_ - 1 - j0_); ++dj) {
            long lo = 0, hi = 0;
            if (!row_span(dj, lo, hi) || row_occupied(j0_ + dj, lo, hi) == 0) continue;
            lo = std::max(lo, -i0_);
            hi = std::min(hi, nx_ - 1 - i0_);
            const std::size_t row = g_.index(0, static_cast<std::size_t>(j0_ + dj));
            for (long di = lo; di <= hi; ++di) {
                const std::size_t idx = row + static_cast<std::size_t>(i0_ + di);
                if (rho_[idx] == 0.0 || domain_.is_obstacle(idx)) continue;
                visit(di, dj, idx);
            }
        }
    }

    double density(std::size_t idx) const { return idx == exterior_cell ? 0.0 : rho_[idx]; }

    Perceived s1() const {
        const double dx = g_.dx();
        const Vec2 target = centre_ + dir_ * delta_;
        // Rings of cells around the one containing the target, outwards;
        // cells beyond ring k are at least (k + 1/2) dx from the target.
        const long ti = static_cast<long>(std::floor(target.x / dx)) - i0_;
        const long tj = static_cast<long>(std::floor(target.y / dx)) - j0_;
        bool found = false;
        long bdi = 0, bdj = 0;
        std::size_t bidx = cell_;
        double best_d2 = 0.0;
        auto consider = [&](long di, long dj) {
            const long i = i0_ + di, j = j0_ + dj;
            std::size_t idx = exterior_cell;
            if (shadow_.inside(i, j)) {
                idx = g_.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
                if (domain_.is_obstacle(idx)) return;
            } else if (!shadow_.exterior(i, j)) {
                return;
            }
            if (!member(di, dj)) return;
            const Vec2 d = centre_ + Vec2{static_cast<double>(di) * dx, static_cast<double>(dj) * dx} - target;
            const double d2 = dot(d, d);
            if (!found || d2 < best_d2 || (d2 == best_d2 && (dj < bdj || (dj == bdj && di < bdi)))) {
                found = true;
                bdi = di, bdj = dj, bidx = idx;
                best_d2 = d2;
            }
        };
        const long max_ring = std::abs(ti) + std::abs(tj) + 1;
        for (long k = 0; k <= max_ring; ++k) {
            if (k == 0) {
                consider(ti, tj);
            } else {
                for (long d = -k; d <= k; ++d) {
                    consider(ti + d, tj - k);
                    consider(ti + d, tj + k);
                }
                for (long d = -k + 1; d <= k - 1; ++d) {
                    consider(ti - k, tj + d);
                    consider(ti + k, tj + d);
                }
            }
            const double bound = (static_cast<double>(k) + 0.5) * dx;
            if (found && best_d2 < bound * bound * (1.0 - 1e-9)) break;
        }
        return {target, density(bidx), bidx, true};
    }

    Perceived argmax(bool weighted) const {
        long bdi = 0, bdj = 0;
        std::size_t bidx = cell_;
        for_each_occupied_member([&](long di, long dj, std::size_t idx) {
            const double a = rho_[idx], b = rho_[bidx];
            if (a > b) {
                bdi = di, bdj = dj, bidx = idx;
            } else if (a == b) {
                const long ra = di * di + dj * dj, rb = bdi * bdi + bdj * bdj;
                if (ra < rb || (ra == rb && idx < bidx)) bdi = di, bdj = dj, bidx = idx;
            }
        });
        const double dx = g_.dx();
        const Vec2 point = centre_ + Vec2{static_cast<double>(bdi) * dx, static_cast<double>(bdj) * dx};
        if (!weighted) return {point, rho_[bidx], bidx, true};
        const double r = std::sqrt(static_cast<double>(bdi * bdi + bdj * bdj)) * dx;
        const double gw = distance_weight(delta_, r);
        return {point, (1.0 - gw) * rho_[cell_] + gw * rho_[bidx], bidx, true};
    }

    // Angle of each integer offset, tabulated once per call; the angle to
    // e_d is then a difference of two angles instead of an acos per cell.
    double offset_angle(long di, long dj) {
        if (r_ > table_r_) {
            table_r_ = std::max(r_, 2 * table_r_);
            const long w = 2 * table_r_ + 1;
            angles_.resize(static_cast<std::size_t>(w * w));
            for (long b = -table_r_; b <= table_r_; ++b)
                for (long a = -table_r_; a <= table_r_; ++a)
                    angles_[static_cast<std::size_t>((b + table_r_) * w + a + table_r_)] =
                        std::atan2(static_cast<double>(b), static_cast<double>(a));
        }
        return angles_[static_cast<std::size_t>((dj + table_r_) * (2 * table_r_ + 1) + di + table_r_)];
    }

    double weight(long di, long dj, double heading) {
        if (di == 0 && dj == 0) return 1.0;
        // Both angles lie in [-pi, pi], so one shift folds the difference.
        double alpha = std::abs(offset_angle(di, dj) - heading);
        if (alpha > std::numbers::pi) alpha = 2.0 * std::numbers::pi - alpha;
        return fade(alpha, law_.half_angle, law_.fading);
    }

    // Sum of the angular weights over the region; depends only on the cell
    // and on which integer squared radii fit, so it is memoised on that.
    double region_area(double heading) {
        const auto key = static_cast<long>(std::floor(reach2_));
        if (cache_ && cache_->key[cell_] == key) return cache_->area[cell_];
        double area = 0.0;
        for_each_member([&](long di, long dj, std::size_t) { area += weight(di, dj, heading); });
        if (cache_) {
            cache_->key[cell_] = key;
            cache_->area[cell_] = area;
        }
        return area;
    }

    Perceived centre_of_mass() {
        const double dx = g_.dx();
        const double heading = std::atan2(dir_.y, dir_.x);
        double mass = 0.0;
        Vec2 moment;
        for_each_occupied_member([&](long di, long dj, std::size_t idx) {
            const Vec2 offset{static_cast<double>(di) * dx, static_cast<double>(dj) * dx};
            const double rw = rho_[idx] * weight(di, dj, heading);
            mass += rw;
            moment += offset * rw;
        });
        if (!(mass > 0.0)) return {centre_, 0.0, cell_, false};
        return {centre_ + moment * (1.0 / mass), mass / region_area(heading), cell_, true};
    }

    RegionAreaCache* cache_;
    const WalkingDomain& domain_;
    const Grid& g_;
    ExitShadow shadow_;
    std::span<const double> rho_;
    const SensoryLaw& law_;
    double cos_half_, wedge_cos_ = 0.0, wedge_sin_ = 0.0;
    long nx_, ny_;
    std::vector<int> occupied_;
    std::vector<double> angles_;
    long table_r_ = -1;

    std::size_t cell_ = 0;
    Vec2 dir_, centre_;
    double delta_ = 0.0, reach2_ = 0.0;
    long i0_ = 0, j0_ = 0, r_ = 0;
};

} // namespace

PerceptionField perceive_2d(const WalkingDomain& domain, std::span<const double> rho, std::span<const Vec2> desired,
                            std::span<const double> free_depth, std::span<const double> delayed_speed,
                            const PerceptionConfig& cfg, RegionAreaCache* cache) {
    const Grid& g = domain.grid();
    const std::size_t n = g.size();
    PerceptionField out;
    out.density.assign(n, 0.0);
    out.point.resize(n);
    out.interaction.resize(n);
    if (cache && cache->key.size() != n) {
        cache->key.assign(n, -1);
        cache->area.assign(n, 0.0);
    }
    RegionScanner scanner(domain, rho, cfg.law, cache);
    for (std::size_t c = 0; c < n; ++c) {
        const Vec2 x = g.centre(c);
        out.point[c] = x;
        out.interaction[c] = desired[c];
        if (domain.is_obstacle(c)) continue;
        if (cfg.strategy == Strategy::Local) {
            out.density[c] = rho[c];
            out.interaction[c] = interaction_direction(x, x, desired[c], g.dx(), cfg.degenerate);
            continue;
        }
        const double delta = depth(cfg.law, free_depth[c], delayed_speed[c]);
        const Perceived p = scanner.run(cfg.strategy, c, desired[c], delta);
        out.density[c] = p.density;
        out.point[c] = p.point;
        out.interaction[c] =
            interaction_direction(x, p.has_point ? p.point : x, desired[c], g.dx(), cfg.degenerate);
    }
    return out;
}

PerceptionField perceive_2d_reference(const WalkingDomain& domain, std::span<const double> rho,
                                      std::span<const Vec2> desired, std::span<const double> free_depth,
                                      std::span<const double> delayed_speed, const PerceptionConfig& cfg) {
    const Grid& g = domain.grid();
    const std::size_t n = g.size();
    PerceptionField out;
    out.density.assign(n, 0.0);
    out.point.resize(n);
    out.interaction.resize(n);
    SensoryRegion region;
    for (std::size_t c = 0; c < n; ++c) {
        const Vec2 x = g.centre(c);
        out.point[c] = x;
        out.interaction[c] = desired[c];
        if (domain.is_obstacle(c)) continue;
        if (cfg.strategy == Strategy::Local) {
            out.density[c] = rho[c];
            out.interaction[c] = interaction_direction(x, x, desired[c], g.dx(), cfg.degenerate);
            continue;
        }
        const double delta = depth(cfg.law, free_depth[c], delayed_speed[c]);
        build_region(domain, c, desired[c], delta, cfg.law, region);
        const Perceived p = perceive(cfg.strategy, region, rho);
        out.density[c] = p.density;
        out.point[c] = p.point;
        out.interaction[c] =
            interaction_direction(x, p.has_point ? p.point : x, desired[c], g.dx(), cfg.degenerate);
    }
    return out;
}

std::vector<double> free_depth_field(const WalkingDomain& domain, std::span<const Vec2> desired) {
    const Grid& g = domain.grid();
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t c = 0; c < g.size(); ++c)
        if (!domain.is_obstacle(c)) out[c] = ray_depth(domain, g.centre(c), desired[c]);
    return out;
}

} // namespace crowd
