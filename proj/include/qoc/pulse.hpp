#ifndef QOC_PULSE_HPP
#define QOC_PULSE_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qoc/hamiltonian.hpp"
#include "qoc/types.hpp"

namespace qoc {

/// Uniform piecewise-constant time grid over [0, tau). Segment k covers
/// [k dt, (k+1) dt) and carries the sample recorded at its start (left-closed).
struct TimeGrid {
    double tau = 1.0;
    int n_steps = 1000;

    double dt() const { return tau / n_steps; }
    double t_start(int k) const { return k * dt(); }

    void validate() const {
        if (!(tau > 0.0)) throw config_error("tau must be positive");
        if (n_steps < 2) throw config_error("n_steps must be at least 2");
    }
};

/// Time-dependent control fields on a shared grid. Only the fields a scenario
/// actually drives are present; everything else stays at its idle value.
struct PulseSet {
    TimeGrid grid;
    std::vector<std::pair<ControlId, RealVector>> fields;

    bool has(ControlId id) const {
        return std::any_of(fields.begin(), fields.end(),
                           [&](const auto& f) { return f.first == id; });
    }

    const RealVector& samples(ControlId id) const {
        for (const auto& f : fields)
            if (f.first == id) return f.second;
        throw input_error(std::string("pulse set has no field ") + control_name(id));
    }

    RealVector& samples(ControlId id) {
        for (auto& f : fields)
            if (f.first == id) return f.second;
        throw input_error(std::string("pulse set has no field ") + control_name(id));
    }

    void set(ControlId id, RealVector values) {
        for (auto& f : fields)
            if (f.first == id) { f.second = std::move(values); return; }
        fields.emplace_back(id, std::move(values));
    }

    void validate() const {
        grid.validate();
        for (const auto& [id, samples] : fields) {
            if (samples.size() != grid.n_steps)
                throw input_error(std::string("field ") + control_name(id) +
                                  " has wrong sample count");
            for (int k = 0; k < samples.size(); ++k) {
                if (!std::isfinite(samples[k]))
                    throw input_error(std::string("non-finite sample in field ") +
                                      control_name(id));
                const bool josephson = id == ControlId::EJ1 || id == ControlId::EJ2 ||
                                       id == ControlId::EJJ;
                if (josephson && samples[k] < 0.0)
                    throw input_error(std::string("negative Josephson magnitude in ") +
                                      control_name(id));
            }
        }
    }

    /// Control values for segment k: idle values overlaid with pulse samples.
    ControlValues values_at(const ControlValues& idle, int k) const {
        ControlValues v = idle;
        for (const auto& [id, samples] : fields) {
            const double x = samples[k];
            switch (id) {
                case ControlId::EJ1: v.ej1 = x; break;
                case ControlId::EJ2: v.ej2 = x; break;
                case ControlId::EJJ: v.ejj = x; break;
                case ControlId::NG1: v.ng1 = x; break;
                case ControlId::NG2: v.ng2 = x; break;
            }
        }
        return v;
    }

    /// Same piecewise-constant function on a grid refined by an integer factor.
    PulseSet refined(int factor) const {
        PulseSet out;
        out.grid = TimeGrid{grid.tau, grid.n_steps * factor};
        for (const auto& [id, samples] : fields) {
            RealVector r(samples.size() * factor);
            for (int k = 0; k < samples.size(); ++k)
                for (int j = 0; j < factor; ++j) r(k * factor + j) = samples[k];
            out.fields.emplace_back(id, std::move(r));
        }
        return out;
    }
};

/// Constant-valued pulse set over the given fields.
inline PulseSet constant_pulse_set(const TimeGrid& grid,
                                   const std::vector<std::pair<ControlId, double>>& values) {
    PulseSet p;
    p.grid = grid;
    for (const auto& [id, value] : values)
        p.fields.emplace_back(id, RealVector::Constant(grid.n_steps, value));
    return p;
}

namespace detail {

/// Shortest decimal text that round-trips a double exactly.
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace detail

/// Write pulses as a plain-text table: header row naming the control ids,
/// then one row per segment with the segment start time and each field's
/// sample, 17 significant digits (lossless decimal round trip).
inline void write_pulse_file(const PulseSet& pulses, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open pulse file for writing: " + path);
    out << "t_start";
    for (const auto& [id, samples] : pulses.fields) out << " " << control_name(id);
    out << "\n";
    for (int k = 0; k < pulses.grid.n_steps; ++k) {
        out << detail::format_double(pulses.grid.t_start(k));
        for (const auto& [id, samples] : pulses.fields)
            out << " " << detail::format_double(samples[k]);
        out << "\n";
    }
    if (!out) throw input_error("failed writing pulse file: " + path);
}

inline PulseSet read_pulse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open pulse file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw input_error("empty pulse file: " + path);

    std::istringstream hs(header);
    std::string column;
    std::vector<ControlId> ids;
    if (!(hs >> column) || column != "t_start")
        throw input_error("pulse file header must start with 't_start': " + path);
    while (hs >> column) ids.push_back(control_from_name(column));
    if (ids.empty()) throw input_error("pulse file names no control fields: " + path);

    std::vector<double> t_starts;
    std::vector<std::vector<double>> columns(ids.size());
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        double t;
        if (!(ls >> t))
            throw input_error("bad pulse row at line " + std::to_string(line_no));
        t_starts.push_back(t);
        for (std::size_t c = 0; c < ids.size(); ++c) {
            double x;
            if (!(ls >> x))
                throw input_error("missing sample at line " + std::to_string(line_no));
            columns[c].push_back(x);
        }
    }
    const int n = static_cast<int>(t_starts.size());
    if (n < 2) throw input_error("pulse file has fewer than 2 segments: " + path);

    // Recover tau from the uniform grid: dt = t[1]-t[0], tau = n dt.
    const double dt = t_starts[1] - t_starts[0];
    if (!(dt > 0.0)) throw input_error("pulse file times must increase: " + path);

    PulseSet pulses;
    pulses.grid = TimeGrid{dt * n, n};
    for (std::size_t c = 0; c < ids.size(); ++c) {
        RealVector v(n);
        for (int k = 0; k < n; ++k) v(k) = columns[c][k];
        pulses.fields.emplace_back(ids[c], std::move(v));
    }
    pulses.validate();
    return pulses;
}

} // namespace qoc

#endif
