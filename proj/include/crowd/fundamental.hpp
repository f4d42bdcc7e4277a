#pragma once

#include <optional>
#include <string>

namespace crowd {

/// Speed-density closure v(rho) = v_M (1 - exp(-gamma (1/rho - 1/rho_M))).
/// Works in any consistent unit system; nondimensional() rescales by
/// (rho_M, v_M) so that densities and speeds live in [0, 1].
struct FundamentalDiagram {
    double free_speed = 1.0;  // v_M
    double jam_density = 1.0; // rho_M
    double gamma = 0.273;     // same unit as density

    static FundamentalDiagram europe_rush();
    static FundamentalDiagram asia_rush();
    static FundamentalDiagram preset(const std::string& name);

    FundamentalDiagram nondimensional() const {
        return {1.0, 1.0, gamma / jam_density};
    }

    void validate() const;

    double speed(double perceived_density) const;
    /// dv/drho, analytic; zero at rho = 0 (limit).
    double speed_derivative(double perceived_density) const;
    double flow(double density) const { return density * speed(density); }
};

/// Sensory-region parameters: minimum depth, half-width angle (radians),
/// lateral fading exponent and reflex delay in time steps. With see_past_exits
/// set, 2D regions also take in the empty cells just beyond exit segments.
struct SensoryLaw {
    double min_depth = 0.05;
    double half_angle = 85.0 * 3.14159265358979323846 / 180.0;
    double fading = 1.0;
    int reflex_delay_steps = 0;
    bool see_past_exits = false;

    void validate() const;
};

/// delta(v) = (free_depth / v_M) v + min_depth.
double depth(const SensoryLaw& law, double free_depth, double delayed_speed, double free_speed = 1.0);

/// Linear distance weight g(r) = 1 - 0.8 r / delta, in [0.2, 1].
double distance_weight(double delta, double r);

/// Angular weight G(alpha) = 1 - (|alpha| / half_angle)^fading.
double angular_weight(const SensoryLaw& law, double alpha);

/// Thresholds and delays (SI units) governing the reaction to deck motion.
struct MotionSensitivity {
    double perception_threshold = 0.1; // m/s^2
    double stop_threshold = 2.1;       // m/s^2
    double reaction_delay = 1.0;       // s
    double stop_interval = 5.0;        // s

    void validate() const;
};

/// Corrective speed factor g in [0, 1] from the delayed acceleration envelope.
/// `stop_time` is the start of the current stop-and-go hold, if any.
double motion_factor(const MotionSensitivity& ms, double envelope, double t, std::optional<double> stop_time);

/// Stop-and-go bookkeeping: returns the (possibly new) hold start for a cell.
/// A hold starts when the envelope reaches the stop threshold outside a hold.
std::optional<double> update_stop_time(const MotionSensitivity& ms, double envelope, double t,
                                       std::optional<double> stop_time);

inline bool in_hold(const MotionSensitivity& ms, double t, std::optional<double> stop_time) {
    return stop_time && t >= *stop_time && t < *stop_time + ms.stop_interval;
}

} // namespace crowd
