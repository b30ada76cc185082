#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ceopt/cem.hpp"
#include "ceopt/io.hpp"
#include "ceopt/sierra.hpp"

namespace ceopt {

enum class Method { ce, ce_surrogate, ce_mixture };

std::string method_name(Method m);
Method parse_method(const std::string& name);

/// One multi-seed experiment over a sierra objective: every listed method is
/// run under every listed schedule with every seed. The built-in setups lock
/// all fields; `custom` leaves them to the caller.
struct ExperimentSpec {
    std::string id = "custom";
    SierraParams objective{};
    Eigen::Vector2d init_mean{0.0, 0.0};
    double init_cov_scale = 200.0;
    CemConfig cem{};
    std::vector<Method> methods{Method::ce, Method::ce_surrogate, Method::ce_mixture};
    std::vector<ScheduleSpec> schedules{ScheduleSpec{}};
    std::vector<std::uint64_t> seeds;

    void validate() const;

    /// Built-in setups: "1a", "1b", "1c" (the three method comparisons) and
    /// "2" (schedule sweep, CE-surrogate only). Seeds default to 0..49.
    static ExperimentSpec builtin(const std::string& id, int seed_count = 50);
};

struct RunRecord {
    Method method;
    ScheduleSpec schedule;
    std::uint64_t seed = 0;
    OptimizationTrace trace;        // empty iterations vector when failed
    double runtime_s = 0.0;
    double distance_to_optimum = 0.0;
    std::string error;              // nonempty when the run failed

    bool failed() const { return !error.empty(); }
};

/// Seed-aggregated metrics for one (method, schedule) cell. Aggregation is
/// performed in ascending seed order, so permuting the seed list cannot
/// change any value.
struct Aggregate {
    Method method;
    ScheduleSpec schedule;
    std::vector<double> bv_mean;    // per iteration, k = 1..k_max
    std::vector<double> bv_std;
    double final_bv = 0.0;
    double final_bd = 0.0;          // mean |best_point - x*|
    double mean_runtime_s = 0.0;
    int runs = 0;
    int failures = 0;

    /// More than 10% failed runs invalidate the aggregate.
    bool valid() const { return runs > 0 && failures * 10 <= runs; }
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<RunRecord> runs;       // ordered by (method, schedule, seed)
    std::vector<Aggregate> aggregates; // ordered by (method, schedule)
};

/// Runs every (method, schedule, seed) combination. Runs execute on a small
/// worker pool; each owns its objective instance and seed-derived stream, and
/// results are reduced in a fixed order afterwards.
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 0);

struct SummaryRow {
    std::string experiment;
    std::string method;
    std::string schedule;
    double runtime_s;
    double bv;
    double bd;
};

/// One row per (method, schedule). Throws if any aggregate is invalid.
std::vector<SummaryRow> summarize(const ExperimentResult& result);

/// summary.csv: experiment,method,schedule,runtime_s,bv,bd
std::string summary_to_csv(const std::vector<SummaryRow>& rows);

/// curves.csv: experiment,method,schedule,iteration,bv_mean,bv_std
std::string curves_to_csv(const ExperimentResult& result);

/// Writes summary.csv, curves.csv and one trace JSON per run under out_dir.
void write_experiment_outputs(const ExperimentResult& result, const std::string& out_dir);

} // namespace ceopt
