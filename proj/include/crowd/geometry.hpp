#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "crowd/error.hpp"

namespace crowd {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

/// Uniform Cartesian grid of square cells anchored at the origin.
/// Cells are addressed by (i, j) with i along x; the linear index is j*nx + i.
/// A 1D grid has ny == 1.
class Grid {
public:
    Grid() = default;
    Grid(std::size_t nx, std::size_t ny, double dx);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t size() const { return nx_ * ny_; }
    double dx() const { return dx_; }
    double width() const { return static_cast<double>(nx_) * dx_; }
    double height() const { return static_cast<double>(ny_) * dx_; }
    double diagonal() const { return std::hypot(width(), height()); }
    bool is_1d() const { return ny_ == 1; }

    std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }
    std::size_t col(std::size_t idx) const { return idx % nx_; }
    std::size_t row(std::size_t idx) const { return idx / nx_; }

    Vec2 centre(std::size_t i, std::size_t j) const {
        return {(static_cast<double>(i) + 0.5) * dx_, (static_cast<double>(j) + 0.5) * dx_};
    }
    Vec2 centre(std::size_t idx) const { return centre(col(idx), row(idx)); }

    bool contains(const Vec2& p) const {
        return p.x >= 0.0 && p.y >= 0.0 && p.x < width() && p.y < height();
    }
    /// Cell containing p; p must satisfy contains(p).
    std::size_t locate(const Vec2& p) const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t nx_ = 1;
    std::size_t ny_ = 1;
    double dx_ = 1.0;
};

enum class Edge { Left, Right, Bottom, Top };
enum class BoundaryKind { Wall, Inlet, Exit };

std::string to_string(Edge e);
std::string to_string(BoundaryKind k);
Edge edge_from_string(const std::string& s);
BoundaryKind boundary_kind_from_string(const std::string& s);

/// Interval [from, to] (length units, measured along the edge from its
/// lower/left end) of an outer edge of the domain.
struct BoundarySegment {
    Edge edge = Edge::Left;
    double from = 0.0;
    double to = 0.0;
    BoundaryKind kind = BoundaryKind::Wall;
    std::string name;
};

/// Rectangular walking area with rasterised obstacles and typed outer
/// boundary segments. Edge portions not covered by a segment are walls;
/// obstacle faces are implicit walls.
class WalkingDomain {
public:
    WalkingDomain(Grid grid, std::vector<BoundarySegment> segments);

    const Grid& grid() const { return grid_; }
    const std::vector<BoundarySegment>& segments() const { return segments_; }
    const std::vector<char>& obstacle_mask() const { return obstacle_; }

    bool is_obstacle(std::size_t idx) const { return obstacle_[idx] != 0; }
    bool is_obstacle(std::size_t i, std::size_t j) const { return is_obstacle(grid_.index(i, j)); }

    /// Marks every cell whose centre lies inside [x0,x1]x[y0,y1].
    void add_obstacle(double x0, double y0, double x1, double y1);
    void set_obstacle(std::size_t idx, bool blocked);

    /// Segment index covering the outer face of cell (i, j) on `edge`, if any.
    /// The cell must touch that edge.
    std::optional<std::size_t> segment_at(Edge edge, std::size_t i, std::size_t j) const;
    BoundaryKind boundary_kind(Edge edge, std::size_t i, std::size_t j) const;

    /// Non-obstacle cells whose outer face lies on a segment of the given kind.
    std::vector<std::size_t> boundary_cells(BoundaryKind kind) const;
    std::vector<std::size_t> segment_cells(std::size_t segment) const;

    bool is_free(const Vec2& p) const {
        return grid_.contains(p) && !is_obstacle(grid_.locate(p));
    }

private:
    Grid grid_;
    std::vector<char> obstacle_;
    std::vector<BoundarySegment> segments_;
};

/// Free distance from `from` along unit direction `dir` to the first obstacle
/// cell or the domain boundary, marched in steps of dx/4 and clamped to the
/// domain diagonal. Throws "query inside obstacle" if `from` is blocked.
double ray_depth(const WalkingDomain& domain, const Vec2& from, const Vec2& dir);

/// Angle in [0, pi] between `dir` (unit) and `offset`.
double angle_to(const Vec2& dir, const Vec2& offset);

} // namespace crowd
