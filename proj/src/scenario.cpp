#include "crowd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace crowd {

using nlohmann::json;

std::string to_string(Mode m) {
    switch (m) {
    case Mode::PerceptionTest1D: return "perception-test-1d";
    case Mode::PerceptionTest2D: return "perception-test-2d";
    case Mode::Footbridge: return "footbridge";
    case Mode::Station: return "station";
    case Mode::Custom: return "custom";
    }
    return "?";
}

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::string out = "invalid scenario";
    for (const auto& p : problems) out += "\n  " + p;
    return out;
}

std::string initial_name(InitialKind k) {
    switch (k) {
    case InitialKind::Zero: return "zero";
    case InitialKind::Uniform: return "uniform";
    case InitialKind::Gaussian: return "gaussian";
    }
    return "?";
}

std::string degenerate_name(DegenerateRule r) { return r == DegenerateRule::Avoid ? "avoid" : "no-interaction"; }

// Walks the document, converting values and recording every problem instead
// of stopping at the first one.
class Reader {
public:
    std::vector<std::string> problems;

    void fail(const std::string& msg) { problems.push_back(msg); }

    const json* object(const json& parent, const std::string& key, const std::string& path) {
        if (!parent.contains(key)) return nullptr;
        const json& v = parent.at(key);
        if (!v.is_object()) {
            fail(path + " must be an object");
            return nullptr;
        }
        return &v;
    }

    double number(const json* obj, const std::string& key, const std::string& path, double fallback) {
        if (!obj || !obj->contains(key) || obj->at(key).is_null()) return fallback;
        const json& v = obj->at(key);
        if (!v.is_number()) {
            fail(path + " must be a number");
            return fallback;
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            fail(path + " must be finite");
            return fallback;
        }
        return d;
    }

    double number(const json* obj, const std::string& key, const std::string& path, double fallback,
                  const std::function<bool(double)>& ok, const std::string& rule) {
        const double d = number(obj, key, path, fallback);
        if (!ok(d)) {
            std::ostringstream os;
            os << rule << " (" << path << " = " << d << ")";
            fail(os.str());
        }
        return d;
    }

    long integer(const json* obj, const std::string& key, const std::string& path, long fallback, long lo,
                 const std::string& rule) {
        if (!obj || !obj->contains(key) || obj->at(key).is_null()) return fallback;
        const json& v = obj->at(key);
        if (!v.is_number_integer()) {
            fail(path + " must be an integer");
            return fallback;
        }
        const long n = v.get<long>();
        if (n < lo) {
            fail(rule + " (" + path + " = " + std::to_string(n) + ")");
            return fallback;
        }
        return n;
    }

    bool boolean(const json* obj, const std::string& key, const std::string& path, bool fallback) {
        if (!obj || !obj->contains(key) || obj->at(key).is_null()) return fallback;
        const json& v = obj->at(key);
        if (!v.is_boolean()) {
            fail(path + " must be true or false");
            return fallback;
        }
        return v.get<bool>();
    }

    std::string string(const json* obj, const std::string& key, const std::string& path, const std::string& fallback) {
        if (!obj || !obj->contains(key) || obj->at(key).is_null()) return fallback;
        const json& v = obj->at(key);
        if (!v.is_string()) {
            fail(path + " must be a string");
            return fallback;
        }
        return v.get<std::string>();
    }

    template <typename T>
    T named(const json* obj, const std::string& key, const std::string& path, T fallback,
            T (*convert)(const std::string&)) {
        const std::string s = string(obj, key, path, "");
        if (s.empty()) return fallback;
        try {
            return convert(s);
        } catch (const Error& e) {
            fail(path + ": " + e.what());
            return fallback;
        }
    }

    std::vector<double> numbers(const json* obj, const std::string& key, const std::string& path) {
        std::vector<double> out;
        if (!obj || !obj->contains(key) || obj->at(key).is_null()) return out;
        const json& v = obj->at(key);
        if (!v.is_array()) {
            fail(path + " must be an array of numbers");
            return out;
        }
        for (const auto& e : v) {
            if (!e.is_number()) {
                fail(path + " must be an array of numbers");
                return {};
            }
            out.push_back(e.get<double>());
        }
        return out;
    }
};

Mode mode_from_string(const std::string& s) {
    if (s == "perception-test-1d") return Mode::PerceptionTest1D;
    if (s == "perception-test-2d") return Mode::PerceptionTest2D;
    if (s == "footbridge") return Mode::Footbridge;
    if (s == "station") return Mode::Station;
    if (s == "custom") return Mode::Custom;
    throw Error("unknown mode '" + s + "' (expected perception-test-1d|perception-test-2d|footbridge|station|custom)");
}

InitialKind initial_from_string(const std::string& s) {
    if (s == "zero") return InitialKind::Zero;
    if (s == "uniform") return InitialKind::Uniform;
    if (s == "gaussian") return InitialKind::Gaussian;
    throw Error("unknown initial density '" + s + "' (expected zero|uniform|gaussian)");
}

DegenerateRule degenerate_from_string(const std::string& s) {
    if (s == "avoid") return DegenerateRule::Avoid;
    if (s == "no-interaction") return DegenerateRule::NoInteraction;
    throw Error("unknown degenerate rule '" + s + "' (expected avoid|no-interaction)");
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }
bool positive(double v) { return v > 0.0; }
bool non_negative(double v) { return v >= 0.0; }

void read_grid(Reader& r, const json& doc, Scenario& s) {
    const json* g = r.object(doc, "grid", "grid");
    if (!g) {
        r.fail("grid is required");
        return;
    }
    s.nx = static_cast<std::size_t>(r.integer(g, "nx", "grid.nx", 0, 1, "grid.nx must be at least 1"));
    s.ny = static_cast<std::size_t>(r.integer(g, "ny", "grid.ny", 1, 1, "grid.ny must be at least 1"));
    if (s.nx == 0) r.fail("grid.nx is required");
    const double fallback = s.nx > 0 ? 1.0 / static_cast<double>(s.nx) : 1.0;
    s.dx = r.number(g, "dx", "grid.dx", fallback, positive, "dx must be positive");
}

void read_boundaries(Reader& r, const json& doc, Scenario& s) {
    if (!doc.contains("boundaries")) return;
    const json& list = doc.at("boundaries");
    if (!list.is_array()) {
        r.fail("boundaries must be an array");
        return;
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string path = "boundaries[" + std::to_string(k) + "]";
        if (!list[k].is_object()) {
            r.fail(path + " must be an object");
            continue;
        }
        const json* b = &list[k];
        BoundarySegment seg;
        seg.name = r.string(b, "name", path + ".name", "");
        if (seg.name.empty()) r.fail(path + ".name is required");
        seg.edge = r.named(b, "edge", path + ".edge", Edge::Left, &edge_from_string);
        seg.kind = r.named(b, "kind", path + ".kind", BoundaryKind::Wall, &boundary_kind_from_string);
        if (!b->contains("edge")) r.fail(path + ".edge is required");
        if (!b->contains("kind")) r.fail(path + ".kind is required");
        seg.from = r.number(b, "from", path + ".from", 0.0);
        seg.to = r.number(b, "to", path + ".to", 0.0);
        if (!(seg.to > seg.from)) r.fail(path + " must satisfy from < to");
        s.boundaries.push_back(seg);
    }
}

void read_obstacles(Reader& r, const json& doc, Scenario& s) {
    if (!doc.contains("obstacles")) return;
    const json& list = doc.at("obstacles");
    if (!list.is_array()) {
        r.fail("obstacles must be an array");
        return;
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string path = "obstacles[" + std::to_string(k) + "]";
        const json& o = list[k];
        if (!o.is_array() || o.size() != 4 || !std::all_of(o.begin(), o.end(), [](const json& e) { return e.is_number(); })) {
            r.fail(path + " must be [x0, y0, x1, y1]");
            continue;
        }
        Rect rect{o[0].get<double>(), o[1].get<double>(), o[2].get<double>(), o[3].get<double>()};
        if (!(rect.x1 > rect.x0 && rect.y1 > rect.y0)) r.fail(path + " must satisfy x0 < x1 and y0 < y1");
        s.obstacles.push_back(rect);
    }
}

void read_flux_lines(Reader& r, const json& doc, Scenario& s) {
    if (!doc.contains("flux_lines")) return;
    const json& list = doc.at("flux_lines");
    if (!list.is_array()) {
        r.fail("flux_lines must be an array");
        return;
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string path = "flux_lines[" + std::to_string(k) + "]";
        if (!list[k].is_object()) {
            r.fail(path + " must be an object");
            continue;
        }
        const json* l = &list[k];
        FluxLine line;
        line.name = r.string(l, "name", path + ".name", "");
        if (line.name.empty()) r.fail(path + ".name is required");
        const auto from = r.numbers(l, "from", path + ".from");
        const auto to = r.numbers(l, "to", path + ".to");
        if (from.size() != 2 || to.size() != 2) {
            r.fail(path + " needs from and to as [x, y]");
            continue;
        }
        line.x0 = from[0], line.y0 = from[1], line.x1 = to[0], line.y1 = to[1];
        if (line.x0 != line.x1 && line.y0 != line.y1) r.fail(path + " must be axis-aligned");
        s.flux_lines.push_back(line);
    }
}

void read_fundamental(Reader& r, const json& doc, Scenario& s) {
    const json* f = r.object(doc, "fundamental_diagram", "fundamental_diagram");
    s.fd_preset = r.string(f, "preset", "fundamental_diagram.preset", f ? "" : "asia-rush");
    if (!s.fd_preset.empty()) {
        try {
            s.fd = FundamentalDiagram::preset(s.fd_preset);
        } catch (const Error& e) {
            r.fail(std::string("fundamental_diagram.preset: ") + e.what());
        }
        if (f && (f->contains("free_speed") || f->contains("jam_density") || f->contains("gamma")))
            r.fail("fundamental_diagram takes either a preset or explicit values, not both");
        return;
    }
    s.fd.free_speed = r.number(f, "free_speed", "fundamental_diagram.free_speed", 1.48, positive,
                               "free_speed must be positive");
    s.fd.jam_density = r.number(f, "jam_density", "fundamental_diagram.jam_density", 7.7, positive,
                                "jam_density must be positive");
    s.fd.gamma = r.number(f, "gamma", "fundamental_diagram.gamma", 0.273 * s.fd.jam_density, positive,
                          "gamma must be positive");
}

void read_perception(Reader& r, const json& doc, Scenario& s) {
    const json* p = r.object(doc, "perception", "perception");
    PerceptionConfig& c = s.perception;
    c.strategy = r.named(p, "strategy", "perception.strategy", Strategy::S3, &strategy_from_string);
    const double half_deg = r.number(p, "half_angle_deg", "perception.half_angle_deg", 85.0,
                                     [](double a) { return a > 0.0 && a <= 90.0; }, "half_angle_deg must lie in (0,90]");
    c.law.half_angle = half_deg * std::numbers::pi / 180.0;
    c.law.min_depth = r.number(p, "min_depth", "perception.min_depth", 0.05, positive, "min_depth must be positive");
    c.law.fading = r.number(p, "fading", "perception.fading", 1.0, positive, "fading must be positive");
    c.law.see_past_exits = r.boolean(p, "see_past_exits", "perception.see_past_exits", false);
    c.law.reflex_delay_steps = static_cast<int>(r.integer(p, "reflex_delay_steps", "perception.reflex_delay_steps", 0, 0,
                                                          "reflex_delay_steps must be non-negative"));
    c.theta = r.number(p, "theta", "perception.theta", 0.7, in_unit, "theta must lie in [0,1]");
    c.degenerate = r.named(p, "degenerate", "perception.degenerate", DegenerateRule::Avoid, &degenerate_from_string);
}

void read_numerics(Reader& r, const json& doc, Scenario& s) {
    const json* n = r.object(doc, "numerics", "numerics");
    s.cfl = r.number(n, "cfl", "numerics.cfl", 0.9, [](double c) { return c > 0.0 && c <= 1.0; },
                     "cfl must lie in (0,1]");
    s.dt_max = r.number(n, "dt_max", "numerics.dt_max", s.is_1d() ? 1e-2 : 0.05, positive, "dt_max must be positive");
    s.epsilon = r.number(n, "epsilon", "numerics.epsilon", 1e-4, positive, "epsilon must be positive");
    s.n_eta = static_cast<int>(r.integer(n, "n_eta", "numerics.n_eta", 64, 1, "n_eta must be at least 1"));
    s.supply_limit = r.boolean(n, "supply_limit", "numerics.supply_limit", true);
    s.periodic = r.boolean(n, "periodic", "numerics.periodic", false);
    s.periodic_free_depth = r.number(n, "periodic_free_depth", "numerics.periodic_free_depth", 0.1, positive,
                                     "periodic_free_depth must be positive");
}

void read_inflow(Reader& r, const json& doc, Scenario& s) {
    if (!doc.contains("inflow") || doc.at("inflow").is_null()) return;
    const json& list = doc.at("inflow");
    if (!list.is_array()) {
        r.fail("inflow must be an array of [t, rho] pairs");
        return;
    }
    std::vector<std::pair<double, double>> knots;
    for (std::size_t k = 0; k < list.size(); ++k) {
        const json& e = list[k];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            r.fail("inflow[" + std::to_string(k) + "] must be [t, rho]");
            return;
        }
        knots.emplace_back(e[0].get<double>(), e[1].get<double>());
        if (!in_unit(knots.back().second)) r.fail("inflow densities must lie in [0,1]");
        if (k > 0 && !(knots[k].first > knots[k - 1].first)) r.fail("inflow times must be strictly increasing");
    }
    try {
        s.inflow = PiecewiseLinear(std::move(knots));
    } catch (const Error& e) {
        r.fail(std::string("inflow: ") + e.what());
    }
}

void read_initial(Reader& r, const json& doc, Scenario& s) {
    const json* i = r.object(doc, "initial", "initial");
    InitialDensity& d = s.initial;
    d.kind = r.named(i, "type", "initial.type", InitialKind::Zero, &initial_from_string);
    d.rho0 = r.number(i, "rho0", "initial.rho0", 0.0, in_unit, "rho0 must lie in [0,1]");
    d.drho = r.number(i, "drho", "initial.drho", 0.0);
    d.ell = r.number(i, "ell", "initial.ell", 1.0 / 35.0, positive, "ell must be positive");
    d.xc = r.number(i, "xc", "initial.xc", 0.5);
    d.yc = r.number(i, "yc", "initial.yc", 0.5);
    if (d.kind == InitialKind::Gaussian && !(d.rho0 + d.drho <= 1.0 && d.rho0 + d.drho >= 0.0))
        r.fail("rho0 + drho must lie in [0,1]");
}

void read_structure(Reader& r, const json& doc, Scenario& s) {
    const json* t = r.object(doc, "structure", "structure");
    StructureSpec& st = s.structure;
    st.setup = r.named(t, "setup", "structure.setup", SetUp::Motionless, &setup_from_string);
    st.frequency = r.number(t, "frequency", "structure.frequency", 0.9, positive, "frequency must be positive");
    st.damping_ratio = r.number(t, "damping_ratio", "structure.damping_ratio", 0.007,
                                [](double z) { return z >= 0.0 && z < 1.0; }, "damping_ratio must lie in [0,1)");
    st.deck_width = r.number(t, "deck_width", "structure.deck_width", 5.25, positive, "deck_width must be positive");
    st.span_length = r.number(t, "span_length", "structure.span_length", 180.0, positive, "span_length must be positive");
    st.deck_mass_per_area = r.number(t, "deck_mass_per_area", "structure.deck_mass_per_area", 800.0, positive,
                                     "deck_mass_per_area must be positive");
    st.mode_split = r.number(t, "mode_split", "structure.mode_split", 0.6, [](double v) { return v > 0.0 && v < 1.0; },
                             "mode_split must lie in (0,1)");
    st.mode_side = r.number(t, "mode_side", "structure.mode_side", 0.3, non_negative, "mode_side must be non-negative");
    st.mode_shape = r.numbers(t, "mode_shape", "structure.mode_shape");
    if (!st.mode_shape.empty() && st.mode_shape.size() != s.nx)
        r.fail("structure.mode_shape must have one value per cell (" + std::to_string(s.nx) + ")");
    st.pedestrian_mass = r.number(t, "pedestrian_mass", "structure.pedestrian_mass", 70.0, positive,
                                  "pedestrian_mass must be positive");
    st.imposed_peak = r.number(t, "imposed_peak", "structure.imposed_peak", 0.25, non_negative,
                               "imposed_peak must be non-negative");
    st.imposed_rate = r.number(t, "imposed_rate", "structure.imposed_rate", 0.02, positive, "imposed_rate must be positive");
    st.envelope_window = r.number(t, "envelope_window", "structure.envelope_window", 0.0);
    MotionSensitivity& m = st.sensitivity;
    m.perception_threshold = r.number(t, "perception_threshold", "structure.perception_threshold", 0.1, non_negative,
                                      "perception_threshold must be non-negative");
    m.stop_threshold = r.number(t, "stop_threshold", "structure.stop_threshold", 2.1);
    if (!(m.stop_threshold > m.perception_threshold)) r.fail("stop_threshold must exceed perception_threshold");
    m.reaction_delay = r.number(t, "reaction_delay", "structure.reaction_delay", 1.0, non_negative,
                                "reaction_delay must be non-negative");
    m.stop_interval = r.number(t, "stop_interval", "structure.stop_interval", 5.0, non_negative,
                               "stop_interval must be non-negative");
    if (t && t->contains("probes")) st.probes = r.numbers(t, "probes", "structure.probes");
}

void read_run(Reader& r, const json& doc, Scenario& s) {
    const json* u = r.object(doc, "run", "run");
    RunSpec& run = s.run;
    run.t_end = r.number(u, "t_end", "run.t_end", 1.0, positive, "t_end must be positive");
    run.dump_every = static_cast<std::size_t>(r.integer(u, "dump_every", "run.dump_every", 0, 0,
                                                        "dump_every must be non-negative"));
    run.snapshot_times = r.numbers(u, "snapshot_times", "run.snapshot_times");
    for (std::size_t k = 0; k < run.snapshot_times.size(); ++k)
        if (k > 0 && !(run.snapshot_times[k] > run.snapshot_times[k - 1]))
            r.fail("run.snapshot_times must be strictly increasing");
    run.lowpass_window = r.number(u, "lowpass_window", "run.lowpass_window", 0.0, non_negative,
                                  "lowpass_window must be non-negative");
    run.lowpass_spacing = r.number(u, "lowpass_spacing", "run.lowpass_spacing", 0.005, positive,
                                   "lowpass_spacing must be positive");
    run.emptying_threshold = r.number(u, "emptying_threshold", "run.emptying_threshold", 0.01,
                                      [](double v) { return v > 0.0 && v < 1.0; }, "emptying_threshold must lie in (0,1)");
    run.emptying_after = r.number(u, "emptying_after", "run.emptying_after", -1.0);
    run.dump_potential = r.boolean(u, "dump_potential", "run.dump_potential", false);
    run.seed = static_cast<unsigned long>(r.integer(u, "seed", "run.seed", 0, 0, "seed must be non-negative"));
}

// Cross-field checks that need the whole scenario.
void check_consistency(Reader& r, const Scenario& s) {
    if (s.nx == 0 || !(s.dx > 0.0)) return;
    const Grid g = s.grid();
    for (std::size_t k = 0; k < s.boundaries.size(); ++k) {
        const auto& b = s.boundaries[k];
        const double len = (b.edge == Edge::Left || b.edge == Edge::Right) ? g.height() : g.width();
        if (b.from < -1e-12 || b.to > len + 1e-12)
            r.fail("boundaries[" + std::to_string(k) + "] (" + b.name + ") lies outside its edge");
        for (std::size_t m = 0; m < k; ++m)
            if (s.boundaries[m].name == b.name) r.fail("boundary name '" + b.name + "' is used twice");
    }
    for (std::size_t k = 0; k < s.flux_lines.size(); ++k) {
        const auto& l = s.flux_lines[k];
        auto on_grid = [&](double c) { return std::abs(c / s.dx - std::round(c / s.dx)) < 1e-9; };
        const bool vertical = l.x0 == l.x1;
        if (!on_grid(vertical ? l.x0 : l.y0))
            r.fail("flux line '" + l.name + "' does not lie on a grid line");
    }
    const bool has_inlet = std::any_of(s.boundaries.begin(), s.boundaries.end(),
                                       [](const BoundarySegment& b) { return b.kind == BoundaryKind::Inlet; });
    const bool has_exit = std::any_of(s.boundaries.begin(), s.boundaries.end(),
                                      [](const BoundarySegment& b) { return b.kind == BoundaryKind::Exit; });
    const bool two_d = !s.is_1d() || s.mode == Mode::PerceptionTest2D || s.mode == Mode::Station;
    if (two_d) {
        if (s.is_1d()) r.fail("mode " + to_string(s.mode) + " needs a 2D grid (ny > 1)");
        if (!has_exit) r.fail("a 2D scenario needs at least one exit segment");
        if (!s.inflow.empty() && !has_inlet) r.fail("inflow is given but no inlet segment exists");
    } else {
        if (s.mode == Mode::PerceptionTest1D || s.mode == Mode::Footbridge) {
            if (!s.is_1d()) r.fail("mode " + to_string(s.mode) + " needs a 1D grid (ny = 1)");
        }
        if (!s.boundaries.empty()) r.fail("boundaries apply to 2D scenarios only");
        if (!s.obstacles.empty()) r.fail("obstacles apply to 2D scenarios only");
        if (!s.flux_lines.empty()) r.fail("flux_lines apply to 2D scenarios only");
        if (s.periodic && !s.inflow.empty()) r.fail("a periodic 1D scenario cannot have an inflow");
    }
    if (s.structure.setup != SetUp::Motionless && s.mode != Mode::Footbridge && !(s.mode == Mode::Custom && s.is_1d()))
        r.fail("structure.setup applies to 1D runs only");
    if (s.structure.setup == SetUp::TwoWay)
        r.fail("structure.setup two-way needs a force model, which scenario files cannot provide");
    for (double x : s.structure.probes)
        if (!(x >= 0.0 && x <= g.width())) r.fail("structure probe outside the deck");
}

} // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : Error(join_problems(problems)), problems_(std::move(problems)) {}

WalkingDomain Scenario::domain() const {
    WalkingDomain d(grid(), boundaries);
    for (const auto& o : obstacles) d.add_obstacle(o.x0, o.y0, o.x1, o.y1);
    return d;
}

Scenario parse_scenario(const json& doc) {
    if (!doc.is_object()) throw ScenarioError({"scenario must be a JSON object"});
    Reader r;
    Scenario s;
    const json* top = &doc;
    s.name = r.string(top, "name", "name", "unnamed");
    s.notes = r.string(top, "notes", "notes", "");
    s.mode = r.named(top, "mode", "mode", Mode::Custom, &mode_from_string);
    if (!doc.contains("mode")) r.fail("mode is required");

    static const char* known[] = {"name", "notes", "mode", "grid", "boundaries", "obstacles", "flux_lines",
                                  "fundamental_diagram", "perception", "numerics", "inflow", "initial",
                                  "structure", "run"};
    for (const auto& [key, value] : doc.items())
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) r.fail("unknown key '" + key + "'");

    read_grid(r, doc, s);
    read_boundaries(r, doc, s);
    read_obstacles(r, doc, s);
    read_flux_lines(r, doc, s);
    read_fundamental(r, doc, s);
    read_perception(r, doc, s);
    read_numerics(r, doc, s);
    read_inflow(r, doc, s);
    read_initial(r, doc, s);
    read_structure(r, doc, s);
    read_run(r, doc, s);
    check_consistency(r, s);

    if (!r.problems.empty()) throw ScenarioError(r.problems);
    return s;
}

json load_scenario_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError({"cannot open scenario file '" + path + "'"});
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ScenarioError({"scenario file '" + path + "' is not valid JSON: " + e.what()});
    }
}

void apply_override(json& doc, const std::string& path, const std::string& value) {
    if (path.empty()) throw ScenarioError({"override key is empty"});
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::parse_error&) {
        parsed = value;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ScenarioError({"override key '" + path + "' has an empty component"});
        if (!node->is_object()) throw ScenarioError({"override key '" + path + "' descends into a non-object"});
        if (dot == std::string::npos) {
            (*node)[key] = parsed;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ScenarioError({"override '" + assignment + "' must have the form key=value"});
    apply_override(doc, assignment.substr(0, eq), assignment.substr(eq + 1));
}

json resolved_document(const Scenario& s) {
    json doc;
    doc["name"] = s.name;
    doc["mode"] = to_string(s.mode);
    if (!s.notes.empty()) doc["notes"] = s.notes;
    doc["grid"] = {{"nx", s.nx}, {"ny", s.ny}, {"dx", s.dx}};
    if (!s.is_1d()) {
        doc["boundaries"] = json::array();
        for (const auto& b : s.boundaries)
            doc["boundaries"].push_back({{"name", b.name}, {"edge", to_string(b.edge)}, {"kind", to_string(b.kind)},
                                         {"from", b.from}, {"to", b.to}});
        doc["obstacles"] = json::array();
        for (const auto& o : s.obstacles) doc["obstacles"].push_back({o.x0, o.y0, o.x1, o.y1});
        doc["flux_lines"] = json::array();
        for (const auto& l : s.flux_lines)
            doc["flux_lines"].push_back({{"name", l.name}, {"from", {l.x0, l.y0}}, {"to", {l.x1, l.y1}}});
    }
    doc["fundamental_diagram"] = {{"free_speed", s.fd.free_speed}, {"jam_density", s.fd.jam_density},
                                  {"gamma", s.fd.gamma}};
    const auto& p = s.perception;
    doc["perception"] = {{"strategy", to_string(p.strategy)},
                         {"half_angle_deg", p.law.half_angle * 180.0 / std::numbers::pi},
                         {"min_depth", p.law.min_depth},
                         {"fading", p.law.fading},
                         {"see_past_exits", p.law.see_past_exits},
                         {"reflex_delay_steps", p.law.reflex_delay_steps},
                         {"theta", p.theta},
                         {"degenerate", degenerate_name(p.degenerate)}};
    doc["numerics"] = {{"cfl", s.cfl}, {"dt_max", s.dt_max}, {"epsilon", s.epsilon}, {"n_eta", s.n_eta},
                       {"supply_limit", s.supply_limit}, {"periodic", s.periodic},
                       {"periodic_free_depth", s.periodic_free_depth}};
    doc["inflow"] = json::array();
    for (const auto& [t, v] : s.inflow.knots()) doc["inflow"].push_back({t, v});
    const auto& i = s.initial;
    doc["initial"] = {{"type", initial_name(i.kind)}, {"rho0", i.rho0}, {"drho", i.drho},
                      {"ell", i.ell}, {"xc", i.xc}, {"yc", i.yc}};
    if (s.is_1d()) {
        const auto& st = s.structure;
        doc["structure"] = {{"setup", to_string(st.setup)},
                            {"frequency", st.frequency},
                            {"damping_ratio", st.damping_ratio},
                            {"deck_width", st.deck_width},
                            {"span_length", st.span_length},
                            {"deck_mass_per_area", st.deck_mass_per_area},
                            {"mode_split", st.mode_split},
                            {"mode_side", st.mode_side},
                            {"pedestrian_mass", st.pedestrian_mass},
                            {"imposed_peak", st.imposed_peak},
                            {"imposed_rate", st.imposed_rate},
                            {"envelope_window", st.envelope_window},
                            {"perception_threshold", st.sensitivity.perception_threshold},
                            {"stop_threshold", st.sensitivity.stop_threshold},
                            {"reaction_delay", st.sensitivity.reaction_delay},
                            {"stop_interval", st.sensitivity.stop_interval},
                            {"probes", st.probes}};
        if (!st.mode_shape.empty()) doc["structure"]["mode_shape"] = st.mode_shape;
    }
    const auto& r = s.run;
    doc["run"] = {{"t_end", r.t_end},
                  {"dump_every", r.dump_every},
                  {"snapshot_times", r.snapshot_times},
                  {"lowpass_window", s.lowpass_window()},
                  {"lowpass_spacing", r.lowpass_spacing},
                  {"emptying_threshold", r.emptying_threshold},
                  {"emptying_after", s.emptying_after()},
                  {"dump_potential", r.dump_potential},
                  {"seed", r.seed}};
    return doc;
}

} // namespace crowd
