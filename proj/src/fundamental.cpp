#include "crowd/fundamental.hpp"

#include <cmath>

#include "crowd/error.hpp"

namespace crowd {

FundamentalDiagram FundamentalDiagram::europe_rush() { return {1.69, 6.0, 0.273 * 6.0}; }
FundamentalDiagram FundamentalDiagram::asia_rush() { return {1.48, 7.7, 0.273 * 7.7}; }

FundamentalDiagram FundamentalDiagram::preset(const std::string& name) {
    if (name == "europe-rush") return europe_rush();
    if (name == "asia-rush") return asia_rush();
    throw Error("unknown fundamental diagram preset '" + name + "'");
}

void FundamentalDiagram::validate() const {
    if (!(free_speed > 0.0) || !(jam_density > 0.0) || !(gamma > 0.0))
        throw Error("fundamental diagram needs v_M > 0, rho_M > 0, gamma > 0");
}

namespace {

void check_density(const FundamentalDiagram& fd, double rho) {
    // Tolerate round-off at the jam density.
    if (!(rho >= 0.0) || rho > fd.jam_density * (1.0 + 1e-12)) throw Error("density out of range");
}

} // namespace

double FundamentalDiagram::speed(double rho) const {
    check_density(*this, rho);
    if (rho == 0.0) return free_speed;
    const double arg = gamma * (1.0 / rho - 1.0 / jam_density);
    return free_speed * -std::expm1(-arg);
}

double FundamentalDiagram::speed_derivative(double rho) const {
    check_density(*this, rho);
    if (rho == 0.0) return 0.0;
    const double arg = gamma * (1.0 / rho - 1.0 / jam_density);
    return -free_speed * gamma * std::exp(-arg) / (rho * rho);
}

void SensoryLaw::validate() const {
    if (!(min_depth > 0.0)) throw Error("min_depth must be positive");
    if (!(half_angle > 0.0) || half_angle > 3.14159265358979323846 / 2.0 + 1e-12)
        throw Error("half_angle must lie in (0, 90] degrees");
    if (!(fading >= 0.0)) throw Error("fading exponent must be non-negative");
    if (reflex_delay_steps < 0) throw Error("reflex delay must be non-negative");
}

double depth(const SensoryLaw& law, double free_depth, double delayed_speed, double free_speed) {
    return free_depth / free_speed * delayed_speed + law.min_depth;
}

double distance_weight(double delta, double r) {
    if (r > delta * (1.0 + 1e-12) + 1e-15) throw Error("perception point outside region");
    return 1.0 - 0.8 * r / delta;
}

double angular_weight(const SensoryLaw& law, double alpha) {
    const double a = std::abs(alpha);
    if (a > law.half_angle * (1.0 + 1e-12)) throw Error("outside visual field");
    if (a == 0.0) return 1.0;
    return 1.0 - std::pow(std::min(a / law.half_angle, 1.0), law.fading);
}

void MotionSensitivity::validate() const {
    if (!(perception_threshold > 0.0) || !(stop_threshold > perception_threshold))
        throw Error("motion thresholds need 0 < perception < stop");
    if (reaction_delay < 0.0 || stop_interval < 0.0) throw Error("motion delays must be non-negative");
}

double motion_factor(const MotionSensitivity& ms, double envelope, double t, std::optional<double> stop_time) {
    if (in_hold(ms, t, stop_time)) return 0.0;
    if (envelope <= ms.perception_threshold) return 1.0;
    if (envelope >= ms.stop_threshold) return 0.0;
    return (ms.stop_threshold - envelope) / (ms.stop_threshold - ms.perception_threshold);
}

std::optional<double> update_stop_time(const MotionSensitivity& ms, double envelope, double t,
                                       std::optional<double> stop_time) {
    if (!in_hold(ms, t, stop_time) && envelope >= ms.stop_threshold) return t;
    return stop_time;
}

} // namespace crowd
