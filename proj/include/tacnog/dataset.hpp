// Fixed-horizon training data from a sweep over the costate grid.
//
// Every grid point q in [-p_max, p_max]^3 is propagated to the horizon T; the
// terminal state and control are kept iff the extremal passes both optimality
// filters. Two drivers share one per-point kernel: a serial reference and an
// OpenMP sweep whose output order is independent of the worker count.
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "tacnog/extremal.hpp"

namespace tacnog {

struct SweepConfig {
    double p_max = 10.0;
    double step_q = 0.5;
    double horizon = 1.5;
    double h = kDefaultStep;
    FilterOptions filters;

    void validate() const;
    std::size_t axis_points() const;
    double axis_value(std::size_t k) const { return -p_max + static_cast<double>(k) * step_q; }
    std::size_t grid_size() const;
    /// Grid point for a flat lexicographic index (px slowest, c0 fastest).
    CostateParams grid_point(std::size_t flat) const;
};

struct DatasetRecord {
    ExtremalState state;  // (X, Y, Theta) at the horizon, Theta wrapped to (-pi, pi]
    double control = 0.0;
    CostateParams q;

    bool operator==(const DatasetRecord&) const = default;
};

struct SweepStats {
    std::size_t total = 0;
    std::size_t accepted = 0;
    std::size_t rejected_disconjugacy = 0;
    std::size_t rejected_colinear = 0;
    std::size_t diverged = 0;

    bool operator==(const SweepStats&) const = default;
};

enum class SweepOutcome { accepted, rejected_disconjugacy, rejected_colinear, diverged };

struct PointResult {
    SweepOutcome outcome = SweepOutcome::diverged;
    DatasetRecord record;
};

/// Propagates one grid point and applies the filters (disconjugacy is reported first).
PointResult evaluate_point(const CostateParams& q, const SweepConfig& cfg);

DatasetRecord make_record(const ExtremalTrajectory& traj);

using RecordSink = std::function<void(const DatasetRecord&)>;

/// Reference sweep, single-threaded, lexicographic order.
SweepStats generate_dataset_serial(const SweepConfig& cfg, const RecordSink& sink);

/// OpenMP sweep. `workers` <= 0 uses the OpenMP default. Records reach `sink`
/// in the same order as the serial sweep.
SweepStats generate_dataset(const SweepConfig& cfg, const RecordSink& sink, int workers = 0);

struct Dataset {
    std::vector<DatasetRecord> records;
    SweepStats stats;
};

Dataset generate_dataset(const SweepConfig& cfg, int workers = 0);

struct ReplayReport {
    std::size_t checked = 0;
    std::size_t mismatched = 0;       // state or control off by more than the tolerance
    std::size_t refined_failures = 0; // disconjugacy lost when re-propagated at h / refine_factor
    std::size_t diverged = 0;
    double max_state_error = 0.0;
    double max_control_error = 0.0;

    bool clean() const { return mismatched == 0 && refined_failures == 0 && diverged == 0; }
};

/// Re-propagates every record from its q and compares (state, control). With
/// refine_factor > 1 the extremal is also re-propagated at the finer step and the
/// disconjugacy test is repeated with the original window start.
ReplayReport replay_dataset(const std::vector<DatasetRecord>& records, const SweepConfig& cfg, double tol = 1e-10,
                            int refine_factor = 0, int workers = 0);

inline constexpr const char* kDatasetHeader = "X,Y,Theta,U,px,py,c0";

/// CSV with header `X,Y,Theta,U,px,py,c0` and 17 significant digits.
void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records);
void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);
void write_dataset_row(std::ostream& out, const DatasetRecord& r);

/// Throws ParseError (with line number) on a bad header or row, IoError if unreadable.
std::vector<DatasetRecord> read_dataset(std::istream& in);
std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);

}  // namespace tacnog
