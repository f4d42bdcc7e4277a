#include "crowd/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "crowd/diagnostics.hpp"
#include "crowd/potential.hpp"
#include "crowd/solver1d.hpp"
#include "crowd/solver2d.hpp"
#include "crowd/structure.hpp"

namespace crowd {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string error_report(const std::string& kind, const std::vector<std::string>& errors) {
    return json{{"status", "error"}, {"kind", kind}, {"errors", errors}}.dump();
}

namespace {

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw Error("cannot write '" + path.string() + "'");
        for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_number(values[k]);
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return k;
        throw Error("column '" + name + "' not found");
    }
    bool has(const std::string& name) const {
        return std::find(header.begin(), header.end(), name) != header.end();
    }
    std::vector<double> values(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }
};

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

// strtod rather than stod: stod rejects subnormal values, which the CSV
// files legitimately contain where a density decays to nothing.
double parse_number(const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') throw Error("'" + text + "' is not a number");
    return v;
}

Table read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path.string() + "'");
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw Error("'" + path.string() + "' is empty");
    t.header = split(line, ',');
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& cell : split(line, ',')) row.push_back(parse_number(cell));
        if (row.size() != t.header.size()) throw Error("'" + path.string() + "' has a ragged row");
        t.rows.push_back(std::move(row));
    }
    return t;
}

void flatten(const json& node, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) flatten(value, prefix.empty() ? key : prefix + "." + key, out);
        return;
    }
    if (node.is_string())
        out.emplace_back(prefix, node.get<std::string>());
    else if (node.is_number_float())
        out.emplace_back(prefix, format_number(node.get<double>()));
    else
        out.emplace_back(prefix, node.dump());
}

std::string snapshot_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "density_%04zu.csv", index);
    return buf;
}

// Snapshot bookkeeping shared by the 1D and 2D drivers.
class Snapshots {
public:
    Snapshots(const fs::path& dir, const RunSpec& run) : dir_(dir), run_(run), index_(dir / "snapshots.csv", {"index", "t", "step"}) {}

    /// Whether the state at (step, t) is due for a dump.
    bool due(std::size_t step, double t, bool last) {
        bool hit = step == 0 || last;
        if (run_.dump_every > 0 && step % run_.dump_every == 0) hit = true;
        while (next_ < run_.snapshot_times.size() && t >= run_.snapshot_times[next_] - 1e-12) {
            hit = true;
            ++next_;
        }
        return hit;
    }

    fs::path open(std::size_t step, double t) {
        index_.row({static_cast<double>(count_), t, static_cast<double>(step)});
        return dir_ / snapshot_name(count_++);
    }

    std::size_t count() const { return count_; }

    /// Next requested snapshot time after t, if any.
    std::optional<double> next_time() const {
        if (next_ < run_.snapshot_times.size()) return run_.snapshot_times[next_];
        return std::nullopt;
    }

private:
    fs::path dir_;
    const RunSpec& run_;
    CsvWriter index_;
    std::size_t next_ = 0;
    std::size_t count_ = 0;
};

void write_snapshot_1d(const fs::path& path, const Grid& g, const State1D& st, std::span<const double> motion) {
    CsvWriter w(path, {"x", "rho", "rho_p", "v", "motion"});
    for (std::size_t j = 0; j < g.nx(); ++j)
        w.row({g.centre(j).x, st.rho[j], st.rho_p[j], st.v[j], motion.empty() ? 1.0 : motion[j]});
}

void write_snapshot_2d(const fs::path& path, const WalkingDomain& d, const State2D& st) {
    const Grid& g = d.grid();
    CsvWriter w(path, {"i", "j", "x", "y", "obstacle", "rho", "rho_p", "vx", "vy"});
    for (std::size_t c = 0; c < g.size(); ++c) {
        const Vec2 p = g.centre(c);
        w.row({static_cast<double>(g.col(c)), static_cast<double>(g.row(c)), p.x, p.y, d.is_obstacle(c) ? 1.0 : 0.0,
               st.rho[c], st.rho_p[c], st.v[c].x, st.v[c].y});
    }
}

void write_potential(const fs::path& path, const WalkingDomain& d, const PotentialField& pot) {
    const Grid& g = d.grid();
    CsvWriter w(path, {"i", "j", "x", "y", "obstacle", "u", "ed_x", "ed_y"});
    for (std::size_t c = 0; c < g.size(); ++c) {
        const Vec2 p = g.centre(c);
        w.row({static_cast<double>(g.col(c)), static_cast<double>(g.row(c)), p.x, p.y, d.is_obstacle(c) ? 1.0 : 0.0,
               pot.u[c], pot.desired[c].x, pot.desired[c].y});
    }
}

void write_error_file(const fs::path& dir, const std::string& kind, const std::string& what) {
    std::ofstream out(dir / "error.json");
    out << error_report(kind, {what}) << '\n';
}

void summarise_series(const Scenario& s, const std::vector<double>& t, const std::vector<double>& mass,
                      const std::vector<std::string>& names, const std::vector<std::vector<double>>& flux,
                      RunSummary& out) {
    if (t.size() >= 2) {
        const auto e = emptying_time(t, mass, s.run.emptying_threshold, s.emptying_after());
        out.emptied = e.reached;
        out.emptying_time = e.time;
        out.emptying_final_fraction = e.final_fraction;
    }
    for (std::size_t k = 0; k < names.size(); ++k) {
        FluxSummary f;
        f.name = names[k];
        for (std::size_t n = 0; n < t.size(); ++n)
            if (flux[k][n] > f.max) f.max = flux[k][n], f.max_time = t[n];
        if (t.size() >= 2 && t.back() > t.front()) {
            const auto lp = lowpass_in_time(t, flux[k], s.lowpass_window(), s.run.lowpass_spacing);
            for (std::size_t n = 0; n < lp.t.size(); ++n)
                if (lp.y[n] > f.lowpass_max) f.lowpass_max = lp.y[n], f.lowpass_max_time = lp.t[n];
            const auto peaks = local_maxima(lp.y);
            if (!peaks.empty()) {
                f.has_local_max = true;
                f.first_local_max = lp.y[peaks.front()];
                f.first_local_max_time = lp.t[peaks.front()];
            }
        }
        out.fluxes.push_back(f);
    }
}

void write_manifest(const fs::path& dir, const Scenario& s, const RunSummary& r) {
    const json resolved = resolved_document(s);
    {
        std::ofstream out(dir / "scenario.json");
        out << resolved.dump(2) << '\n';
    }
    std::vector<std::pair<std::string, std::string>> lines;
    flatten(resolved, "", lines);
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw Error("cannot write manifest");
    for (const auto& [k, v] : lines) out << k << " = " << v << '\n';
    out << "result.steps = " << r.steps << '\n';
    out << "result.t_final = " << format_number(r.t_final) << '\n';
    out << "result.snapshots = " << r.snapshots << '\n';
    out << "audit.initial_mass = " << format_number(r.initial_mass) << '\n';
    out << "audit.injected = " << format_number(r.injected) << '\n';
    out << "audit.exited = " << format_number(r.exited) << '\n';
    out << "audit.final_mass = " << format_number(r.final_mass) << '\n';
    out << "audit.residual = " << format_number(r.audit_residual) << '\n';
    out << "audit.balanced = " << (std::abs(r.audit_residual) <= 1e-10 ? "true" : "false") << '\n';
    if (!s.inflow.empty()) {
        double plateau = 0.0;
        for (const auto& [t, v] : s.inflow.knots()) plateau = std::max(plateau, v);
        const auto q = inlet_flux(s.fd, plateau);
        out << "result.inlet_flux = " << format_number(q.nondimensional) << '\n';
        out << "result.inlet_flux_per_metre = " << format_number(q.per_metre) << '\n';
    }
    out << "result.emptied = " << (r.emptied ? "true" : "false") << '\n';
    if (r.emptied) out << "result.emptying_time = " << format_number(r.emptying_time) << '\n';
    out << "result.emptying_final_fraction = " << format_number(r.emptying_final_fraction) << '\n';
    for (const auto& f : r.fluxes) {
        const std::string p = "result.flux." + f.name + ".";
        out << p << "max = " << format_number(f.max) << '\n';
        out << p << "max_time = " << format_number(f.max_time) << '\n';
        out << p << "lowpass_max = " << format_number(f.lowpass_max) << '\n';
        out << p << "lowpass_max_time = " << format_number(f.lowpass_max_time) << '\n';
        if (f.has_local_max) {
            out << p << "first_local_max = " << format_number(f.first_local_max) << '\n';
            out << p << "first_local_max_time = " << format_number(f.first_local_max_time) << '\n';
        }
    }
    out << "result.wall_seconds = " << format_number(r.seconds) << '\n';
}

RunSummary run_1d(const Scenario& s, const fs::path& dir) {
    const Grid g = s.grid();
    const Solver1D solver(g, solver1d_config(s));

    RunSummary r;
    Snapshots snaps(dir, s.run);
    std::vector<double> rho0 = initial_density(s);
    r.initial_mass = total_mass(rho0, g.dx());

    if (s.mode == Mode::PerceptionTest1D) {
        const State1D st = solver.initial(std::move(rho0));
        snaps.due(0, 0.0, true);
        write_snapshot_1d(snaps.open(0, 0.0), g, st, {});
        r.final_mass = r.initial_mass;
        r.snapshots = snaps.count();
        return r;
    }

    const StructureSpec& sp = s.structure;
    const CouplingConfig cc = coupling_config(s);
    CoupledRun coupled(solver, cc);

    CsvWriter diag(dir / "diagnostics.csv",
                   {"t", "dt", "total_mass", "l2_energy", "flux_in", "flux_out", "injected", "exited"});
    std::vector<double> ts, ms;
    State1D last;
    std::vector<double> last_motion;
    std::size_t step = 0;
    auto observe = [&](const State1D& st, std::span<const double> motion) {
        r.injected += st.dt * st.flux_in;
        r.exited += st.dt * st.flux_out;
        const double mass = total_mass(st.rho, g.dx());
        diag.row({st.t, st.dt, mass, l2_energy(st.rho, g.dx()), st.flux_in, st.flux_out, r.injected, r.exited});
        ts.push_back(st.t);
        ms.push_back(mass);
        const bool final = st.t >= s.run.t_end - 1e-12;
        if (snaps.due(step, st.t, final)) write_snapshot_1d(snaps.open(step, st.t), g, st, motion);
        last = st;
        last_motion.assign(motion.begin(), motion.end());
        ++step;
    };

    CoupledResult result;
    try {
        result = coupled.run(std::move(rho0), s.run.t_end, sp.probes, s.run.snapshot_times, observe);
    } catch (const Error& e) {
        if (step > 0) write_snapshot_1d(dir / "density_last.csv", g, last, last_motion);
        throw RunAborted(std::string("run aborted at t = ") + format_number(last.t) + ": " + e.what());
    }

    CsvWriter probe(dir / "probe.csv", {"x", "t", "accel", "envelope", "rho", "v"});
    for (std::size_t p = 0; p < result.probes.size(); ++p)
        for (const auto& smp : result.probes[p]) probe.row({sp.probes[p], smp.t, smp.accel, smp.envelope, smp.rho, smp.v});

    r.steps = step - 1;
    r.t_final = result.final_state.t;
    r.final_mass = total_mass(result.final_state.rho, g.dx());
    r.snapshots = snaps.count();
    summarise_series(s, ts, ms, {}, {}, r);
    return r;
}

RunSummary run_2d(const Scenario& s, const fs::path& dir) {
    const WalkingDomain domain = s.domain();
    const Grid& g = domain.grid();
    const double cell = g.dx() * g.dx();
    PotentialField pot = solve_potential(domain);
    if (s.run.dump_potential) write_potential(dir / "potential.csv", domain, pot);

    const Solver2D solver(domain, std::move(pot), solver2d_config(s));

    RunSummary r;
    Snapshots snaps(dir, s.run);
    State2D st = solver.initial(initial_density(s));
    r.initial_mass = total_mass(st.rho, cell);

    if (s.mode == Mode::PerceptionTest2D) {
        snaps.due(0, 0.0, true);
        write_snapshot_2d(snaps.open(0, 0.0), domain, st);
        r.final_mass = r.initial_mass;
        r.snapshots = snaps.count();
        return r;
    }

    std::vector<GridLine> lines;
    std::vector<std::string> names;
    std::vector<std::string> header{"t", "dt", "total_mass", "l2_energy", "injected", "exited"};
    std::vector<std::string> flux_header{"t"};
    for (const auto& l : s.flux_lines) {
        lines.push_back({l.x0, l.y0, l.x1, l.y1});
        names.push_back(l.name);
        header.push_back("Q_" + l.name);
        flux_header.push_back("Q_" + l.name);
    }
    for (std::size_t k = 0; k < domain.segments().size(); ++k) header.push_back("exited_" + domain.segments()[k].name);
    CsvWriter diag(dir / "diagnostics.csv", header);
    CsvWriter flux(dir / "flux.csv", flux_header);

    std::vector<double> ts, ms;
    std::vector<std::vector<double>> qs(lines.size());
    std::size_t step = 0;
    auto record = [&](const State2D& state) {
        const double mass = total_mass(state.rho, cell);
        std::vector<double> row{state.t, state.dt, mass, l2_energy(state.rho, cell), state.injected,
                                std::accumulate(state.exited.begin(), state.exited.end(), 0.0)};
        std::vector<double> frow{state.t};
        for (std::size_t k = 0; k < lines.size(); ++k) {
            const double q = corridor_flux(domain, state.rho, state.v, lines[k]);
            row.push_back(q);
            frow.push_back(q);
            qs[k].push_back(q);
        }
        row.insert(row.end(), state.exited.begin(), state.exited.end());
        diag.row(row);
        flux.row(frow);
        ts.push_back(state.t);
        ms.push_back(mass);
        const bool final = state.t >= s.run.t_end - 1e-12;
        if (snaps.due(step, state.t, final)) write_snapshot_2d(snaps.open(step, state.t), domain, state);
    };

    record(st);
    while (st.t < s.run.t_end - 1e-12) {
        double limit = s.run.t_end - st.t;
        if (const auto next = snaps.next_time(); next && *next > st.t) limit = std::min(limit, *next - st.t);
        try {
            st = solver.step(st, limit);
        } catch (const Error& e) {
            write_snapshot_2d(dir / "density_last.csv", domain, st);
            throw RunAborted(std::string("run aborted at t = ") + format_number(st.t) + ": " + e.what());
        }
        ++step;
        record(st);
    }

    r.steps = step;
    r.t_final = st.t;
    r.injected = st.injected;
    r.exited = std::accumulate(st.exited.begin(), st.exited.end(), 0.0);
    r.final_mass = total_mass(st.rho, cell);
    r.snapshots = snaps.count();
    summarise_series(s, ts, ms, names, qs, r);
    return r;
}

} // namespace

Solver1DConfig solver1d_config(const Scenario& s) {
    Solver1DConfig cfg;
    cfg.fd = s.fd.nondimensional();
    cfg.perception = s.perception;
    cfg.epsilon = s.epsilon;
    cfg.n_eta = s.n_eta;
    cfg.cfl = s.cfl;
    cfg.dt_max = s.dt_max;
    cfg.periodic = s.periodic;
    cfg.periodic_free_depth = s.periodic_free_depth;
    cfg.inflow = s.inflow;
    return cfg;
}

CouplingConfig coupling_config(const Scenario& s) {
    const StructureSpec& sp = s.structure;
    CouplingConfig cc;
    cc.setup = sp.setup;
    cc.structure.mode_shape = sp.mode_shape.empty() ? two_span_mode(s.grid(), sp.mode_split, sp.mode_side) : sp.mode_shape;
    cc.structure.frequency = sp.frequency;
    cc.structure.damping_ratio = sp.damping_ratio;
    cc.structure.deck_width = sp.deck_width;
    cc.structure.span_length = sp.span_length;
    cc.structure.modal_mass = modal_mass_from_deck(cc.structure, sp.deck_mass_per_area);
    cc.sensitivity = sp.sensitivity;
    cc.jam_density = s.fd.jam_density;
    cc.free_speed = s.fd.free_speed;
    cc.pedestrian_mass = sp.pedestrian_mass;
    cc.imposed_peak = sp.imposed_peak;
    cc.imposed_rate = sp.imposed_rate;
    cc.envelope_window = sp.envelope_window;
    return cc;
}

Solver2DConfig solver2d_config(const Scenario& s) {
    Solver2DConfig cfg;
    cfg.fd = s.fd.nondimensional();
    cfg.perception = s.perception;
    cfg.cfl = s.cfl;
    cfg.dt_max = s.dt_max;
    cfg.supply_limit = s.supply_limit;
    cfg.inflow = s.inflow;
    return cfg;
}

std::vector<double> initial_density(const Scenario& s) {
    const Grid g = s.grid();
    const auto& i = s.initial;
    switch (i.kind) {
    case InitialKind::Zero: return std::vector<double>(g.size(), 0.0);
    case InitialKind::Uniform: return std::vector<double>(g.size(), i.rho0);
    case InitialKind::Gaussian:
        return s.is_1d() ? gaussian_bump_1d(g, i.rho0, i.drho, i.ell, i.xc)
                         : gaussian_bump_2d(g, i.rho0, i.drho, i.ell, i.xc, i.yc);
    }
    return {};
}

RunSummary run_scenario(const Scenario& s, const std::string& out_dir) {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + out_dir + "': " + ec.message());

    const auto t0 = std::chrono::steady_clock::now();
    RunSummary r;
    try {
        const bool one_d = s.mode == Mode::PerceptionTest1D || s.mode == Mode::Footbridge ||
                           (s.mode == Mode::Custom && s.is_1d());
        r = one_d ? run_1d(s, dir) : run_2d(s, dir);
    } catch (const RunAborted& e) {
        write_error_file(dir, "runtime", e.what());
        throw;
    } catch (const Error& e) {
        write_error_file(dir, "runtime", e.what());
        throw;
    }
    r.audit_residual = r.initial_mass + r.injected - r.exited - r.final_mass;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, s, r);
    return r;
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read manifest '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        out[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return out;
}

namespace {

double manifest_number(const std::map<std::string, std::string>& m, const std::string& key) {
    const auto it = m.find(key);
    if (it == m.end()) throw Error("manifest lacks '" + key + "'");
    return parse_number(it->second);
}

void check_compatible(const std::map<std::string, std::string>& a, const std::map<std::string, std::string>& b) {
    for (const char* key : {"grid.nx", "grid.ny", "grid.dx"})
        if (a.count(key) == 0 || b.count(key) == 0 || a.at(key) != b.at(key))
            throw Error(std::string("incompatible domains: ") + key + " differs");
    if (a.count("boundaries") && b.count("boundaries") && a.at("boundaries") != b.at("boundaries"))
        throw Error("incompatible domains: boundaries differ");
    if (a.count("obstacles") && b.count("obstacles") && a.at("obstacles") != b.at("obstacles"))
        throw Error("incompatible domains: obstacles differ");
}

void compare_diagnostics(const fs::path& a, const fs::path& b, std::ostream& report,
                         const std::optional<std::string>& csv_out) {
    const Table ta = read_csv(a / "diagnostics.csv");
    const Table tb = read_csv(b / "diagnostics.csv");
    const auto time_a = ta.values("t");
    const auto time_b = tb.values("t");
    std::vector<std::string> cols;
    for (const auto& h : ta.header)
        if (h != "t" && h != "dt" && tb.has(h)) cols.push_back(h);
    std::vector<std::vector<double>> diff(cols.size(), std::vector<double>(time_a.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto ya = ta.values(cols[c]);
        const auto yb = tb.values(cols[c]);
        double worst = 0.0;
        for (std::size_t n = 0; n < time_a.size(); ++n) {
            const double vb = time_b.size() == time_a.size() && time_b[n] == time_a[n] ? yb[n]
                                                                                        : interpolate(time_b, yb, time_a[n]);
            diff[c][n] = ya[n] - vb;
            worst = std::max(worst, std::abs(diff[c][n]));
        }
        report << "max_abs_diff." << cols[c] << " = " << format_number(worst) << '\n';
    }
    if (csv_out) {
        std::vector<std::string> header{"t"};
        for (const auto& c : cols) header.push_back("d_" + c);
        CsvWriter w(*csv_out, header);
        for (std::size_t n = 0; n < time_a.size(); ++n) {
            std::vector<double> row{time_a[n]};
            for (const auto& d : diff) row.push_back(d[n]);
            w.row(row);
        }
    }
}

void compare_emptying(const std::map<std::string, std::string>& ma, const std::map<std::string, std::string>& mb,
                      std::ostream& report) {
    const bool ea = ma.count("result.emptied") && ma.at("result.emptied") == "true";
    const bool eb = mb.count("result.emptied") && mb.at("result.emptied") == "true";
    report << "emptied.a = " << (ea ? "true" : "false") << '\n';
    report << "emptied.b = " << (eb ? "true" : "false") << '\n';
    if (ea) report << "emptying_time.a = " << ma.at("result.emptying_time") << '\n';
    if (eb) report << "emptying_time.b = " << mb.at("result.emptying_time") << '\n';
    if (ea && eb) {
        const double ta = manifest_number(ma, "result.emptying_time");
        const double tb = manifest_number(mb, "result.emptying_time");
        report << "emptying_time_ratio = " << (ta > 0.0 ? format_number(tb / ta) : std::string("inf")) << '\n';
    }
    const std::string prefix = "result.flux.";
    for (const auto& [key, value] : ma) {
        if (key.rfind(prefix, 0) != 0) continue;
        const std::string rest = key.substr(prefix.size());
        const auto dot = rest.rfind('.');
        if (dot == std::string::npos || rest.substr(dot + 1) != "lowpass_max") continue;
        const std::string name = rest.substr(0, dot);
        if (!mb.count(key)) continue;
        const double qa = parse_number(value), qb = parse_number(mb.at(key));
        report << "peak_flux." << name << ".a = " << format_number(qa) << '\n';
        report << "peak_flux." << name << ".b = " << format_number(qb) << '\n';
        report << "peak_flux." << name << ".ratio = " << (qa > 0.0 ? format_number(qb / qa) : std::string("inf"))
               << '\n';
    }
}

void compare_speed(const fs::path& a, const fs::path& b, std::ostream& report) {
    const Table sa = read_csv(a / "snapshots.csv");
    const Table sb = read_csv(b / "snapshots.csv");
    std::size_t matched = 0;
    for (const auto& ra : sa.rows) {
        for (const auto& rb : sb.rows) {
            if (std::abs(ra[1] - rb[1]) > 1e-9 * std::max(1.0, std::abs(ra[1]))) continue;
            const Table da = read_csv(a / snapshot_name(static_cast<std::size_t>(ra[0])));
            const Table db = read_csv(b / snapshot_name(static_cast<std::size_t>(rb[0])));
            if (!da.has("v") || !db.has("v")) throw Error("speed-crossing needs 1D runs");
            const auto x = da.values("x");
            const auto va = da.values("v");
            const auto vb = db.values("v");
            if (vb.size() != va.size()) throw Error("incompatible domains: snapshot sizes differ");
            std::vector<double> crossings;
            double prev = 0.0;
            std::size_t prev_k = 0;
            bool have = false;
            for (std::size_t k = 0; k < x.size(); ++k) {
                const double d = va[k] - vb[k];
                if (d == 0.0) continue;
                if (have && (d > 0.0) != (prev > 0.0)) {
                    const double w = prev / (prev - d);
                    crossings.push_back(x[prev_k] + w * (x[k] - x[prev_k]));
                }
                prev = d, prev_k = k, have = true;
            }
            std::ostringstream list;
            for (std::size_t k = 0; k < crossings.size(); ++k) list << (k ? " " : "") << format_number(crossings[k]);
            report << "crossings.t=" << format_number(ra[1]) << " = " << list.str() << '\n';
            report << "crossing_count.t=" << format_number(ra[1]) << " = " << crossings.size() << '\n';
            ++matched;
            break;
        }
    }
    report << "matched_snapshots = " << matched << '\n';
}

} // namespace

void compare_runs(const std::string& dir_a, const std::string& dir_b, const std::string& metric, std::ostream& report,
                  const std::optional<std::string>& csv_out) {
    const fs::path a(dir_a), b(dir_b);
    const auto ma = read_manifest((a / "manifest.txt").string());
    const auto mb = read_manifest((b / "manifest.txt").string());
    check_compatible(ma, mb);
    report << "metric = " << metric << '\n';
    if (metric == "diagnostics")
        compare_diagnostics(a, b, report, csv_out);
    else if (metric == "emptying")
        compare_emptying(ma, mb, report);
    else if (metric == "speed-crossing")
        compare_speed(a, b, report);
    else
        throw Error("unknown metric '" + metric + "' (expected diagnostics|emptying|speed-crossing)");
}

} // namespace crowd
