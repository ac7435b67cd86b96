#include "tacnog/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <omp.h>

#include "tacnog/errors.hpp"

namespace tacnog {

void SweepConfig::validate() const {
    if (!(p_max >= 0.0) || !std::isfinite(p_max)) throw ConfigError("p_max must be non-negative");
    if (!(step_q > 0.0)) throw ConfigError("grid step must be positive");
    if (p_max > 0.0 && step_q > 2.0 * p_max) throw ConfigError("grid step exceeds the grid width");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(h > 0.0) || h > horizon) throw ConfigError("integration step must lie in (0, horizon]");
}

std::size_t SweepConfig::axis_points() const {
    return static_cast<std::size_t>(std::floor(2.0 * p_max / step_q + 1e-9)) + 1;
}

std::size_t SweepConfig::grid_size() const {
    const std::size_t n = axis_points();
    return n * n * n;
}

CostateParams SweepConfig::grid_point(std::size_t flat) const {
    const std::size_t n = axis_points();
    const std::size_t k = flat % n;
    const std::size_t j = (flat / n) % n;
    const std::size_t i = flat / (n * n);
    return {axis_value(i), axis_value(j), axis_value(k)};
}

DatasetRecord make_record(const ExtremalTrajectory& traj) {
    const ExtremalSample& end = traj.terminal();
    return {{end.X, end.Y, wrap_angle(end.Theta)}, end.U, traj.params};
}

PointResult evaluate_point(const CostateParams& q, const SweepConfig& cfg) {
    PointResult r;
    try {
        const ExtremalTrajectory traj = propagate_extremal(q, cfg.horizon, cfg.h, cfg.filters);
        if (!traj.verdicts.disconjugate)
            r.outcome = SweepOutcome::rejected_disconjugacy;
        else if (!traj.verdicts.colinear_free)
            r.outcome = SweepOutcome::rejected_colinear;
        else {
            r.outcome = SweepOutcome::accepted;
            r.record = make_record(traj);
        }
    } catch (const PropagationDiverged&) {
        r.outcome = SweepOutcome::diverged;
    }
    return r;
}

namespace {

void tally(SweepStats& st, const PointResult& r, const RecordSink& sink) {
    ++st.total;
    switch (r.outcome) {
        case SweepOutcome::accepted:
            ++st.accepted;
            if (sink) sink(r.record);
            break;
        case SweepOutcome::rejected_disconjugacy: ++st.rejected_disconjugacy; break;
        case SweepOutcome::rejected_colinear: ++st.rejected_colinear; break;
        case SweepOutcome::diverged: ++st.diverged; break;
    }
}

constexpr std::size_t kBlock = 4096;

}  // namespace

SweepStats generate_dataset_serial(const SweepConfig& cfg, const RecordSink& sink) {
    cfg.validate();
    SweepStats st;
    const std::size_t total = cfg.grid_size();
    for (std::size_t flat = 0; flat < total; ++flat) tally(st, evaluate_point(cfg.grid_point(flat), cfg), sink);
    return st;
}

SweepStats generate_dataset(const SweepConfig& cfg, const RecordSink& sink, int workers) {
    cfg.validate();
    SweepStats st;
    const std::size_t total = cfg.grid_size();
    const int threads = workers > 0 ? workers : omp_get_max_threads();
    std::vector<PointResult> block(std::min(total, kBlock));

    for (std::size_t base = 0; base < total; base += kBlock) {
        const auto count = static_cast<long long>(std::min(kBlock, total - base));
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
        for (long long k = 0; k < count; ++k)
            block[static_cast<std::size_t>(k)] = evaluate_point(cfg.grid_point(base + static_cast<std::size_t>(k)), cfg);
        // Single ordered reduction point.
        for (long long k = 0; k < count; ++k) tally(st, block[static_cast<std::size_t>(k)], sink);
    }
    return st;
}

Dataset generate_dataset(const SweepConfig& cfg, int workers) {
    Dataset d;
    d.stats = generate_dataset(cfg, [&d](const DatasetRecord& r) { d.records.push_back(r); }, workers);
    return d;
}

ReplayReport replay_dataset(const std::vector<DatasetRecord>& records, const SweepConfig& cfg, double tol,
                            int refine_factor, int workers) {
    cfg.validate();
    struct Check {
        double state_err = 0.0;
        double control_err = 0.0;
        bool refined_ok = true;
        bool diverged = false;
    };
    std::vector<Check> checks(records.size());
    const int threads = workers > 0 ? workers : omp_get_max_threads();
    FilterOptions fine = cfg.filters;
    if (fine.eps_t <= 0.0) fine.eps_t = 10.0 * cfg.h;
    fine.colinearity = false;

#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (long long k = 0; k < static_cast<long long>(records.size()); ++k) {
        const DatasetRecord& r = records[static_cast<std::size_t>(k)];
        Check& c = checks[static_cast<std::size_t>(k)];
        try {
            const TerminalFlow f = propagate_terminal(r.q, cfg.horizon, cfg.h);
            const double u = r.q.px * f.z[1] - r.q.py * f.z[0] + r.q.c0;
            c.state_err = std::max({std::abs(f.z[0] - r.state[0]), std::abs(f.z[1] - r.state[1]),
                                    std::abs(wrap_angle(f.z[2] - r.state[2]))});
            c.control_err = std::abs(u - r.control);
            if (refine_factor > 1)
                c.refined_ok =
                    propagate_extremal(r.q, cfg.horizon, cfg.h / refine_factor, fine).verdicts.disconjugate;
        } catch (const PropagationDiverged&) {
            c.diverged = true;
        }
    }

    ReplayReport rep;
    for (const Check& c : checks) {
        ++rep.checked;
        if (c.diverged) {
            ++rep.diverged;
            continue;
        }
        rep.max_state_error = std::max(rep.max_state_error, c.state_err);
        rep.max_control_error = std::max(rep.max_control_error, c.control_err);
        if (c.state_err > tol || c.control_err > tol) ++rep.mismatched;
        if (!c.refined_ok) ++rep.refined_failures;
    }
    return rep;
}

void write_dataset_row(std::ostream& out, const DatasetRecord& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.state[0], r.state[1], r.state[2],
                  r.control, r.q.px, r.q.py, r.q.c0);
    out << buf;
}

void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records) {
    out << kDatasetHeader << '\n';
    for (const auto& r : records) write_dataset_row(out, r);
    if (!out) throw IoError("dataset write failed");
}

void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_dataset(out, records);
}

namespace {

double parse_field(std::string_view f, std::size_t line) {
    // strtod keeps round-trip exactness and accepts the %.17g forms we write.
    std::string tmp(f);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size()) throw ParseError(line, "bad number '" + tmp + "'");
    return v;
}

}  // namespace

std::vector<DatasetRecord> read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kDatasetHeader) throw ParseError(1, "unexpected header '" + line + "'");

    std::vector<DatasetRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double v[7];
        std::size_t field = 0;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            if (field >= 7) throw ParseError(lineno, "too many fields");
            v[field++] = parse_field(std::string_view(line).substr(pos, comma - pos), lineno);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (field != 7) throw ParseError(lineno, "expected 7 fields");
        out.push_back({{v[0], v[1], v[2]}, v[3], {v[4], v[5], v[6]}});
    }
    return out;
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return read_dataset(in);
}

}  // namespace tacnog
