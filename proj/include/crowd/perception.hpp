#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "crowd/fundamental.hpp"
#include "crowd/geometry.hpp"

namespace crowd {

/// Localisation strategy. `Local` bypasses perception (rho_p = rho) and is
/// the classical local model used for comparisons.
enum class Strategy { Local, S1, S2, S3, S4 };

/// What e_i becomes when the perception point coincides with the pedestrian.
enum class DegenerateRule { Avoid, NoInteraction };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct PerceptionConfig {
    Strategy strategy = Strategy::S3;
    SensoryLaw law;
    double theta = 0.7;
    DegenerateRule degenerate = DegenerateRule::Avoid;

    void validate() const;
};

/// Member index used for cells outside the grid behind an exit segment,
/// where the density is taken to be zero.
inline constexpr std::size_t exterior_cell = static_cast<std::size_t>(-1);

struct RegionMember {
    std::size_t cell = 0; // exterior_cell behind an exit
    long di = 0; // integer cell offset from the centre (unwrapped)
    long dj = 0;
    Vec2 offset;
    double distance = 0.0;
};

/// Discrete sensory region: cells whose centres satisfy the ball and cone
/// tests around a centre cell. The centre cell itself is always a member.
struct SensoryRegion {
    std::size_t centre_cell = 0;
    Vec2 centre;
    Vec2 direction{1.0, 0.0};
    double depth = 0.0;
    double half_angle = 0.0; // zero in 1D, where G == 1
    double fading = 1.0;
    std::vector<RegionMember> members;
};

/// 2D region {xi : |xi - x| <= delta, (xi - x)/|xi - x| . e_d >= cos(half_angle)}
/// over the free cells of Omega plus the empty space straight behind exit
/// segments (members with cell == exterior_cell, density zero). Walls and
/// obstacles clip the region. Reuses `out`'s storage.
void build_region(const WalkingDomain& domain, std::size_t cell, const Vec2& desired, double delta,
                  const SensoryLaw& law, SensoryRegion& out);
SensoryRegion build_region(const WalkingDomain& domain, std::size_t cell, const Vec2& desired, double delta,
                           const SensoryLaw& law);

/// 1D forward interval [x, x + delta], clipped at the outlet or wrapped when periodic.
void build_region_1d(const Grid& grid, std::size_t cell, double delta, bool periodic, SensoryRegion& out);
SensoryRegion build_region_1d(const Grid& grid, std::size_t cell, double delta, bool periodic);

/// Outcome of one localisation. `point` is x_p; `sampled` is the member cell
/// whose density was read (s1, s2, s3). `has_point` is false when x_p is
/// undefined (s4 over an empty crowd).
struct Perceived {
    Vec2 point;
    double density = 0.0;
    std::size_t sampled = 0;
    bool has_point = true;
};

Perceived strategy_s1(const SensoryRegion& region, std::span<const double> rho);
Perceived strategy_s2(const SensoryRegion& region, std::span<const double> rho);
Perceived strategy_s3(const SensoryRegion& region, std::span<const double> rho);
Perceived strategy_s4(const SensoryRegion& region, std::span<const double> rho);
Perceived perceive(Strategy s, const SensoryRegion& region, std::span<const double> rho);

/// e_i = -(x_p - x)/|x_p - x|; below half a cell the degenerate rule applies.
Vec2 interaction_direction(const Vec2& x, const Vec2& x_p, const Vec2& desired, double dx,
                           DegenerateRule rule = DegenerateRule::Avoid);

/// Normalised theta e_d + (1 - theta) e_i, falling back to e_d on cancellation.
Vec2 walking_direction(const Vec2& desired, const Vec2& interaction, double theta);

struct PerceptionField {
    std::vector<double> density; // rho_p
    std::vector<Vec2> point;     // x_p
    std::vector<Vec2> interaction; // e_i (2D only; empty in 1D)
};

/// Perceived density on a 1D grid. `free_depth` is Delta_s per cell and
/// `delayed_speed` the nondimensional speed entering the depth law.
PerceptionField perceive_1d(const Grid& grid, std::span<const double> rho, std::span<const double> free_depth,
                            std::span<const double> delayed_speed, const PerceptionConfig& cfg, bool periodic);

/// Per-cell memo of the s4 region area, reusable across calls on one domain
/// with an unchanged desired-direction field.
struct RegionAreaCache {
    std::vector<long> key;
    std::vector<double> area;
};

/// Perceived density, perception points and interaction directions on a 2D
/// domain. Obstacle cells get rho_p = 0 and e_i = e_d.
PerceptionField perceive_2d(const WalkingDomain& domain, std::span<const double> rho,
                            std::span<const Vec2> desired, std::span<const double> free_depth,
                            std::span<const double> delayed_speed, const PerceptionConfig& cfg,
                            RegionAreaCache* cache = nullptr);

/// Same result computed cell by cell through build_region and perceive();
/// slower, kept as the reference for the scanning implementation above.
PerceptionField perceive_2d_reference(const WalkingDomain& domain, std::span<const double> rho,
                                      std::span<const Vec2> desired, std::span<const double> free_depth,
                                      std::span<const double> delayed_speed, const PerceptionConfig& cfg);

/// Delta_s for every non-obstacle cell, ray-cast along its desired direction.
std::vector<double> free_depth_field(const WalkingDomain& domain, std::span<const Vec2> desired);

} // namespace crowd
