#include "crowd/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crowd {

double ModalStructure::omega() const { return 2.0 * std::numbers::pi * frequency; }

void ModalStructure::validate() const {
    if (!(modal_mass > 0.0)) throw Error("modal mass must be positive");
    if (!(frequency > 0.0)) throw Error("structural frequency must be positive");
    if (!(damping_ratio >= 0.0 && damping_ratio < 1.0)) throw Error("damping ratio must lie in [0,1)");
    if (!(deck_width > 0.0) || !(span_length > 0.0)) throw Error("deck dimensions must be positive");
    if (mode_shape.empty()) throw Error("mode shape is empty");
}

std::vector<double> two_span_mode(const Grid& grid, double split, double side) {
    std::vector<double> phi(grid.nx());
    const double len = grid.width();
    const double a = split * len;
    double peak = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) {
        const double x = grid.centre(j).x;
        phi[j] = x <= a ? std::sin(std::numbers::pi * x / a)
                        : -side * std::sin(std::numbers::pi * (x - a) / (len - a));
        peak = std::max(peak, std::abs(phi[j]));
    }
    for (auto& p : phi) p /= peak;
    return phi;
}

namespace {

double weighted_integral(const ModalStructure& s, std::span<const double> w) {
    // Cells are equal length; the deck spans span_length metres.
    const double dx = s.span_length / static_cast<double>(s.mode_shape.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < s.mode_shape.size(); ++j)
        sum += (w.empty() ? 1.0 : w[j]) * s.mode_shape[j] * s.mode_shape[j];
    return sum * dx;
}

} // namespace

double modal_mass_from_deck(const ModalStructure& s, double deck_mass_per_area) {
    return deck_mass_per_area * s.deck_width * weighted_integral(s, {});
}

double added_modal_mass(const ModalStructure& s, std::span<const double> rho, double jam_density,
                        double pedestrian_mass) {
    if (rho.size() != s.mode_shape.size()) throw Error("density does not match the mode shape");
    return pedestrian_mass * jam_density * s.deck_width * weighted_integral(s, rho);
}

double equilibrium_acceleration(const ModalStructure& s, const ModalState& st, double force, double added_mass) {
    const double m = s.modal_mass + added_mass;
    const double w = s.omega();
    return (force - 2.0 * s.damping_ratio * w * m * st.velocity - w * w * m * st.displacement) / m;
}

ModalState newmark_step(const ModalStructure& s, const ModalState& st, double force, double added_mass, double dt) {
    constexpr double beta = 0.25;
    constexpr double gamma = 0.5;
    const double m = s.modal_mass + added_mass;
    const double w = s.omega();
    const double c = 2.0 * s.damping_ratio * w * m;
    const double k = w * w * m;

    const double disp_pred = st.displacement + dt * st.velocity + dt * dt * (0.5 - beta) * st.acceleration;
    const double vel_pred = st.velocity + dt * (1.0 - gamma) * st.acceleration;
    const double a = (force - c * vel_pred - k * disp_pred) / (m + gamma * dt * c + beta * dt * dt * k);

    ModalState out;
    out.acceleration = a;
    out.displacement = disp_pred + beta * dt * dt * a;
    out.velocity = vel_pred + gamma * dt * a;
    out.time = st.time + dt;
    return out;
}

EnvelopeTracker::EnvelopeTracker(double window) : window_(window) {
    if (!(window > 0.0)) throw Error("envelope window must be positive");
}

void EnvelopeTracker::push(double t, double accel) {
    const double a = std::abs(accel);
    while (!window_max_.empty() && window_max_.back().second <= a) window_max_.pop_back();
    window_max_.emplace_back(t, a);
    while (window_max_.front().first < t - window_) window_max_.pop_front();
}

std::vector<double> acceleration_envelope(std::span<const double> mode_shape, std::span<const double> times,
                                          std::span<const double> modal_accel, double window) {
    if (times.size() != modal_accel.size()) throw Error("acceleration history is ragged");
    EnvelopeTracker tracker(window);
    for (std::size_t k = 0; k < times.size(); ++k) tracker.push(times[k], modal_accel[k]);
    std::vector<double> env(mode_shape.size());
    for (std::size_t j = 0; j < env.size(); ++j) env[j] = std::abs(mode_shape[j]) * tracker.value();
    return env;
}

double imposed_envelope(double peak, double beta, double t) { return peak * -std::expm1(-beta * t); }

void DelayLine::push(double t, double value) {
    if (!t_.empty() && !(t > t_.back())) {
        if (t == t_.back()) {
            v_.back() = value;
            return;
        }
        throw Error("delay line times must increase");
    }
    t_.push_back(t);
    v_.push_back(value);
}

double DelayLine::at(double t) const {
    if (start_ >= t_.size()) return 0.0;
    if (t <= t_[start_]) return v_[start_];
    if (t >= t_.back()) return v_.back();
    auto hi = std::upper_bound(t_.begin() + static_cast<long>(start_), t_.end(), t);
    const auto k = static_cast<std::size_t>(hi - t_.begin());
    const double w = (t - t_[k - 1]) / (t_[k] - t_[k - 1]);
    return v_[k - 1] + w * (v_[k] - v_[k - 1]);
}

void DelayLine::trim_before(double t) {
    // Keep one sample at or before t so interpolation at t stays exact.
    while (start_ + 1 < t_.size() && t_[start_ + 1] <= t) ++start_;
    if (start_ > 4096 && start_ * 2 > t_.size()) {
        t_.erase(t_.begin(), t_.begin() + static_cast<long>(start_));
        v_.erase(v_.begin(), v_.begin() + static_cast<long>(start_));
        start_ = 0;
    }
}

std::string to_string(SetUp s) {
    switch (s) {
    case SetUp::Motionless: return "motionless";
    case SetUp::ImposedMotion: return "imposed-motion";
    case SetUp::TwoWay: return "two-way";
    }
    return "?";
}

SetUp setup_from_string(const std::string& s) {
    if (s == "motionless") return SetUp::Motionless;
    if (s == "imposed-motion") return SetUp::ImposedMotion;
    if (s == "two-way") return SetUp::TwoWay;
    throw Error("unknown set-up '" + s + "' (expected motionless|imposed-motion|two-way)");
}

CoupledRun::CoupledRun(const Solver1D& crowd, CouplingConfig cfg)
    : crowd_(crowd), cfg_(std::move(cfg)),
      tracker_(cfg_.envelope_window > 0.0 ? cfg_.envelope_window : 1.0 / cfg_.structure.frequency) {
    cfg_.structure.validate();
    cfg_.sensitivity.validate();
    if (cfg_.structure.mode_shape.size() != crowd_.grid().nx()) throw Error("mode shape does not match the crowd grid");
    stop_time_.assign(crowd_.grid().nx(), std::nullopt);
    delayed_envelope_.assign(crowd_.grid().nx(), 0.0);
    history_.push(0.0, envelope_now(0.0));
}

double CoupledRun::envelope_now(double t_seconds) const {
    switch (cfg_.setup) {
    case SetUp::Motionless: return 0.0;
    case SetUp::ImposedMotion: return imposed_envelope(cfg_.imposed_peak, cfg_.imposed_rate, t_seconds);
    case SetUp::TwoWay: return tracker_.value();
    }
    return 0.0;
}

std::vector<double> CoupledRun::motion_factors(double t) {
    if (cfg_.setup == SetUp::Motionless) return {};
    const double ts = t * cfg_.time_scale();
    const double amplitude = history_.at(ts - cfg_.sensitivity.reaction_delay);
    const auto& phi = cfg_.structure.mode_shape;
    std::vector<double> g(phi.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        delayed_envelope_[j] = std::abs(phi[j]) * amplitude;
        stop_time_[j] = update_stop_time(cfg_.sensitivity, delayed_envelope_[j], ts, stop_time_[j]);
        g[j] = motion_factor(cfg_.sensitivity, delayed_envelope_[j], ts, stop_time_[j]);
    }
    return g;
}

CoupledResult CoupledRun::run(std::vector<double> rho0, double t_end, std::span<const double> probe_x,
                              std::span<const double> snapshot_times, const Observer& observe) {
    const Grid& grid = crowd_.grid();
    const double scale = cfg_.time_scale();
    std::vector<std::size_t> probe_cell;
    for (double x : probe_x) {
        if (!(x >= 0.0 && x <= grid.width())) throw Error("probe outside the deck");
        probe_cell.push_back(std::min(grid.nx() - 1, static_cast<std::size_t>(std::floor(x / grid.dx()))));
    }

    CoupledResult out;
    out.probes.resize(probe_cell.size());
    State1D st = crowd_.initial(std::move(rho0));
    for (double r : st.rho) out.initial_mass += r * grid.dx();
    std::size_t next_snap = 0;

    auto record = [&](const State1D& s, std::span<const double> g) {
        for (std::size_t p = 0; p < probe_cell.size(); ++p) {
            const std::size_t j = probe_cell[p];
            ProbeSample ps;
            ps.t = s.t;
            ps.envelope = delayed_envelope_[j];
            ps.accel = cfg_.setup == SetUp::TwoWay ? cfg_.structure.mode_shape[j] * modal_.acceleration
                                                   : std::abs(cfg_.structure.mode_shape[j]) * envelope_now(s.t * scale);
            ps.rho = s.rho[j];
            ps.v = s.v[j];
            out.probes[p].push_back(ps);
        }
        while (next_snap < snapshot_times.size() && s.t >= snapshot_times[next_snap] - 1e-12) {
            CoupledSnapshot snap{s.t, s.rho, s.rho_p, s.v, delayed_envelope_, {}};
            if (g.empty())
                snap.motion.assign(s.rho.size(), 1.0);
            else
                snap.motion.assign(g.begin(), g.end());
            out.snapshots.push_back(std::move(snap));
            ++next_snap;
        }
    };

    while (true) {
        const auto g = motion_factors(st.t);
        crowd_.perceive(st, g);
        record(st, g);
        if (observe) observe(st, g);
        if (st.t >= t_end - 1e-12) break;

        double limit = t_end - st.t;
        if (next_snap < snapshot_times.size()) limit = std::min(limit, snapshot_times[next_snap] - st.t);
        State1D next = crowd_.step(st, g, limit);

        const double ts = next.t * scale;
        if (cfg_.setup == SetUp::TwoWay) {
            const double mc = added_modal_mass(cfg_.structure, next.rho, cfg_.jam_density, cfg_.pedestrian_mass);
            const double f = cfg_.force ? cfg_.force(next.rho, next.v, delayed_envelope_, ts) : 0.0;
            modal_ = newmark_step(cfg_.structure, modal_, f, mc, next.dt * scale);
            tracker_.push(ts, modal_.acceleration);
        }
        if (cfg_.setup != SetUp::Motionless) {
            history_.push(ts, envelope_now(ts));
            history_.trim_before(ts - cfg_.sensitivity.reaction_delay - 1.0);
        }
        out.injected += next.dt * next.flux_in;
        out.exited += next.dt * next.flux_out;
        st = std::move(next);
    }
    out.final_state = std::move(st);
    return out;
}

} // namespace crowd
