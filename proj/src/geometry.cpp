#include "crowd/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace crowd {

Grid::Grid(std::size_t nx, std::size_t ny, double dx) : nx_(nx), ny_(ny), dx_(dx) {
    if (nx == 0 || ny == 0) throw Error("grid needs at least one cell per axis");
    if (!(dx > 0.0) || !std::isfinite(dx)) throw Error("grid spacing must be positive");
}

std::size_t Grid::locate(const Vec2& p) const {
    auto i = static_cast<std::size_t>(std::floor(p.x / dx_));
    auto j = static_cast<std::size_t>(std::floor(p.y / dx_));
    return index(std::min(i, nx_ - 1), std::min(j, ny_ - 1));
}

std::string to_string(Edge e) {
    switch (e) {
    case Edge::Left: return "left";
    case Edge::Right: return "right";
    case Edge::Bottom: return "bottom";
    case Edge::Top: return "top";
    }
    return "?";
}

std::string to_string(BoundaryKind k) {
    switch (k) {
    case BoundaryKind::Wall: return "wall";
    case BoundaryKind::Inlet: return "inlet";
    case BoundaryKind::Exit: return "exit";
    }
    return "?";
}

Edge edge_from_string(const std::string& s) {
    if (s == "left") return Edge::Left;
    if (s == "right") return Edge::Right;
    if (s == "bottom") return Edge::Bottom;
    if (s == "top") return Edge::Top;
    throw Error("unknown edge '" + s + "'");
}

BoundaryKind boundary_kind_from_string(const std::string& s) {
    if (s == "wall") return BoundaryKind::Wall;
    if (s == "inlet") return BoundaryKind::Inlet;
    if (s == "exit") return BoundaryKind::Exit;
    throw Error("unknown boundary kind '" + s + "'");
}

namespace {

double edge_length(const Grid& g, Edge e) {
    return (e == Edge::Left || e == Edge::Right) ? g.height() : g.width();
}

bool touches(const Grid& g, Edge e, std::size_t i, std::size_t j) {
    switch (e) {
    case Edge::Left: return i == 0;
    case Edge::Right: return i + 1 == g.nx();
    case Edge::Bottom: return j == 0;
    case Edge::Top: return j + 1 == g.ny();
    }
    return false;
}

} // namespace

WalkingDomain::WalkingDomain(Grid grid, std::vector<BoundarySegment> segments)
    : grid_(grid), obstacle_(grid.size(), 0), segments_(std::move(segments)) {
    bool has_exit = false;
    for (std::size_t a = 0; a < segments_.size(); ++a) {
        const auto& s = segments_[a];
        const double len = edge_length(grid_, s.edge);
        if (!(s.from < s.to) || s.from < -1e-12 || s.to > len + 1e-12)
            throw Error("boundary segment '" + s.name + "' outside its edge");
        has_exit = has_exit || s.kind == BoundaryKind::Exit;
        for (std::size_t b = 0; b < a; ++b) {
            const auto& t = segments_[b];
            if (t.edge == s.edge && std::min(s.to, t.to) - std::max(s.from, t.from) > 1e-12)
                throw Error("boundary segments '" + t.name + "' and '" + s.name + "' overlap");
        }
    }
    if (!has_exit) throw Error("domain has no exit");
}

void WalkingDomain::add_obstacle(double x0, double y0, double x1, double y1) {
    for (std::size_t j = 0; j < grid_.ny(); ++j)
        for (std::size_t i = 0; i < grid_.nx(); ++i) {
            const Vec2 c = grid_.centre(i, j);
            if (c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1) obstacle_[grid_.index(i, j)] = 1;
        }
}

void WalkingDomain::set_obstacle(std::size_t idx, bool blocked) { obstacle_.at(idx) = blocked ? 1 : 0; }

std::optional<std::size_t> WalkingDomain::segment_at(Edge edge, std::size_t i, std::size_t j) const {
    if (!touches(grid_, edge, i, j)) return std::nullopt;
    const Vec2 c = grid_.centre(i, j);
    const double along = (edge == Edge::Left || edge == Edge::Right) ? c.y : c.x;
    for (std::size_t s = 0; s < segments_.size(); ++s)
        if (segments_[s].edge == edge && along >= segments_[s].from && along <= segments_[s].to) return s;
    return std::nullopt;
}

BoundaryKind WalkingDomain::boundary_kind(Edge edge, std::size_t i, std::size_t j) const {
    auto s = segment_at(edge, i, j);
    return s ? segments_[*s].kind : BoundaryKind::Wall;
}

std::vector<std::size_t> WalkingDomain::segment_cells(std::size_t segment) const {
    std::vector<std::size_t> out;
    const Edge e = segments_.at(segment).edge;
    for (std::size_t j = 0; j < grid_.ny(); ++j)
        for (std::size_t i = 0; i < grid_.nx(); ++i) {
            if (is_obstacle(i, j)) continue;
            auto s = segment_at(e, i, j);
            if (s && *s == segment) out.push_back(grid_.index(i, j));
        }
    return out;
}

std::vector<std::size_t> WalkingDomain::boundary_cells(BoundaryKind kind) const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < segments_.size(); ++s)
        if (segments_[s].kind == kind)
            for (auto c : segment_cells(s)) out.push_back(c);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double ray_depth(const WalkingDomain& domain, const Vec2& from, const Vec2& dir) {
    const Grid& g = domain.grid();
    if (!g.contains(from) || domain.is_obstacle(g.locate(from))) throw Error("query inside obstacle");
    const double step = g.dx() / 4.0;
    const double limit = g.diagonal();
    double travelled = 0.0;
    while (travelled < limit) {
        const double next = travelled + step;
        if (!domain.is_free(from + dir * next)) break;
        travelled = next;
    }
    return std::min(travelled, limit);
}

double angle_to(const Vec2& dir, const Vec2& offset) {
    const double len = norm(offset);
    if (!(len > 0.0)) throw Error("degenerate offset");
    // atan2 of (|cross|, dot) stays accurate near 0 and pi, unlike acos.
    return std::atan2(std::abs(dir.x * offset.y - dir.y * offset.x), dot(offset, dir));
}

} // namespace crowd
