#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crowd/fundamental.hpp"
#include "crowd/solver1d.hpp"

namespace crowd {

/// Single lateral mode standing in for the deck's structural model.
/// Mass and width are SI; mode shape values are per cell of the 1D grid.
struct ModalStructure {
    std::vector<double> mode_shape; // phi_1, max |phi_1| = 1
    double modal_mass = 0.0;        // m_s (kg)
    double frequency = 0.9;         // f_s (Hz)
    double damping_ratio = 0.007;   // zeta
    double deck_width = 5.25;       // w (m)
    double span_length = 180.0;     // L (m)

    double omega() const;
    void validate() const;
};

/// Default mode shape: a two-span-like sine (main span [0, split], side span
/// with relative amplitude `side`), max-normalised.
std::vector<double> two_span_mode(const Grid& grid, double split = 0.6, double side = 0.3);

/// m_s = integral of deck_mass_per_area * w * phi^2 over the deck (SI).
double modal_mass_from_deck(const ModalStructure& s, double deck_mass_per_area);

/// m_c = pedestrian_mass * integral of rho * rho_M * w * phi^2 dx (SI);
/// rho is nondimensional and x spans the deck length.
double added_modal_mass(const ModalStructure& s, std::span<const double> rho, double jam_density,
                        double pedestrian_mass);

struct ModalState {
    double displacement = 0.0;
    double velocity = 0.0;
    double acceleration = 0.0;
    double time = 0.0; // s
};

/// One average-acceleration Newmark step (beta = 1/4, gamma = 1/2) of
/// M a + 2 zeta omega M v + omega^2 M s = F with M = m_s + m_c. The state's
/// acceleration must be consistent with the previous force.
ModalState newmark_step(const ModalStructure& s, const ModalState& state, double force, double added_mass, double dt);

/// Acceleration consistent with the equation of motion for the given state.
double equilibrium_acceleration(const ModalStructure& s, const ModalState& state, double force, double added_mass);

/// Trailing-window running maximum of |a(t)| (monotone deque).
class EnvelopeTracker {
public:
    explicit EnvelopeTracker(double window);
    void push(double t, double accel);
    double value() const { return window_max_.empty() ? 0.0 : window_max_.front().second; }
    double window() const { return window_; }

private:
    double window_;
    std::deque<std::pair<double, double>> window_max_;
};

/// Per-cell envelope |phi(x)| * running max of |modal acceleration|.
std::vector<double> acceleration_envelope(std::span<const double> mode_shape, std::span<const double> times,
                                          std::span<const double> modal_accel, double window);

/// Imposed envelope zbar (1 - exp(-beta t)) at unit mode amplitude.
double imposed_envelope(double peak, double beta, double t);

/// Scalar history sampled at increasing times, read back with linear
/// interpolation; used for the delayed envelope.
class DelayLine {
public:
    void push(double t, double value);
    double at(double t) const;
    void trim_before(double t);

private:
    std::vector<double> t_;
    std::vector<double> v_;
    std::size_t start_ = 0;
};

enum class SetUp { Motionless, ImposedMotion, TwoWay };
std::string to_string(SetUp s);
SetUp setup_from_string(const std::string& s);

/// Modal force from the crowd state: (rho, v, delayed envelope per cell, t in s).
using ForceModel = std::function<double(std::span<const double>, std::span<const double>,
                                        std::span<const double>, double)>;

struct CouplingConfig {
    SetUp setup = SetUp::Motionless;
    ModalStructure structure;
    MotionSensitivity sensitivity;
    double jam_density = 7.7;      // ped/m^2
    double free_speed = 1.48;      // m/s
    double pedestrian_mass = 70.0; // kg per pedestrian
    double imposed_peak = 0.25;    // m/s^2
    double imposed_rate = 0.02;    // 1/s
    double envelope_window = 0.0;  // s; <= 0 means one structural period
    ForceModel force;              // empty means zero force

    /// Seconds per nondimensional time unit (L / v_M).
    double time_scale() const { return structure.span_length / free_speed; }
};

struct ProbeSample {
    double t = 0.0; // nondimensional
    double accel = 0.0; // m/s^2, |phi(x*)| times modal acceleration (signed)
    double envelope = 0.0;
    double rho = 0.0;
    double v = 0.0;
};

struct CoupledSnapshot {
    double t = 0.0;
    std::vector<double> rho, rho_p, v, envelope, motion;
};

struct CoupledResult {
    std::vector<std::vector<ProbeSample>> probes; // one series per probe point
    std::vector<CoupledSnapshot> snapshots;
    State1D final_state;
    double injected = 0.0; // integral of the inlet flux (nondimensional mass)
    double exited = 0.0;
    double initial_mass = 0.0;
};

/// Crowd and structure advanced in lockstep on the crowd's adaptive step.
class CoupledRun {
public:
    CoupledRun(const Solver1D& crowd, CouplingConfig cfg);

    /// Motion factor per cell at time t (nondimensional) from the delayed envelope.
    std::vector<double> motion_factors(double t);

    /// Called after every accepted state (including the initial one) with the
    /// state and the motion factors it was perceived with (empty when g == 1).
    using Observer = std::function<void(const State1D&, std::span<const double>)>;

    CoupledResult run(std::vector<double> rho0, double t_end, std::span<const double> probe_x,
                      std::span<const double> snapshot_times, const Observer& observe = {});

    const CouplingConfig& config() const { return cfg_; }

private:
    double envelope_now(double t_seconds) const;

    const Solver1D& crowd_;
    CouplingConfig cfg_;
    ModalState modal_;
    EnvelopeTracker tracker_;
    DelayLine history_; // modal envelope amplitude vs seconds
    std::vector<std::optional<double>> stop_time_;
    std::vector<double> delayed_envelope_;
};

} // namespace crowd
