#include "ceopt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace ceopt {

namespace {

using Clock = std::chrono::steady_clock;

struct RunKey {
    std::size_t method_i;
    std::size_t schedule_i;
    std::size_t seed_i;
};

OptimizationTrace dispatch_run(Method method, Objective& objective,
                               const MultivariateGaussian& init, const CemConfig& cfg,
                               RngStream& rng) {
    switch (method) {
    case Method::ce:
        return cross_entropy_method(objective, init, cfg, rng);
    case Method::ce_surrogate:
        return ce_surrogate(objective, Proposal(init), cfg, rng);
    case Method::ce_mixture:
        return ce_mixture(objective, Proposal(init), cfg, rng);
    }
    throw std::logic_error("dispatch_run: unreachable");
}

void run_pool(std::size_t jobs, int threads, const std::function<void(std::size_t)>& work) {
    unsigned n = threads > 0 ? static_cast<unsigned>(threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, jobs == 0 ? 1 : static_cast<unsigned>(jobs));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) {
                work(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

} // namespace

std::string method_name(Method m) {
    switch (m) {
    case Method::ce:
        return "ce";
    case Method::ce_surrogate:
        return "ce-surrogate";
    case Method::ce_mixture:
        return "ce-mixture";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "ce") {
        return Method::ce;
    }
    if (name == "ce-surrogate") {
        return Method::ce_surrogate;
    }
    if (name == "ce-mixture") {
        return Method::ce_mixture;
    }
    throw std::invalid_argument("unknown method '" + name +
                                "' (expected ce, ce-surrogate or ce-mixture)");
}

void ExperimentSpec::validate() const {
    objective.validate();
    cem.validate();
    if (!(std::isfinite(init_cov_scale) && init_cov_scale > 0.0)) {
        throw std::invalid_argument("ExperimentSpec: init_cov_scale must be positive");
    }
    if (seeds.empty()) {
        throw std::invalid_argument("ExperimentSpec: seed list is empty");
    }
    std::vector<std::uint64_t> sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("ExperimentSpec: seeds must be distinct");
    }
    if (methods.empty() && !schedules.empty()) {
        return; // empty method list yields an empty result table
    }
    for (const auto& s : schedules) {
        s.validate();
    }
}

ExperimentSpec ExperimentSpec::builtin(const std::string& id, int seed_count) {
    if (seed_count < 1) {
        throw std::invalid_argument("ExperimentSpec: seed count must be >= 1");
    }
    ExperimentSpec spec;
    spec.id = id;
    spec.seeds.resize(seed_count);
    std::iota(spec.seeds.begin(), spec.seeds.end(), 0);

    if (id == "1a") {
        spec.init_mean = {0.0, 0.0};
        spec.init_cov_scale = 200.0;
    } else if (id == "1b") {
        spec.init_mean = {-50.0, -50.0};
        spec.init_cov_scale = 2000.0;
    } else if (id == "1c") {
        spec.init_mean = {0.0, 0.0};
        spec.init_cov_scale = 200.0;
        spec.cem.m = 5;
        spec.cem.m_elite = 3;
    } else if (id == "2") {
        spec.init_mean = {-50.0, -50.0};
        spec.init_cov_scale = 2000.0;
        spec.methods = {Method::ce_surrogate};
        spec.schedules = {ScheduleSpec{},
                          ScheduleSpec{ScheduleKind::geometric_budgeted, 0.1},
                          ScheduleSpec{ScheduleKind::geometric_budgeted, 0.2},
                          ScheduleSpec{ScheduleKind::geometric_budgeted, 0.3}};
    } else {
        throw std::invalid_argument("unknown experiment id '" + id +
                                    "' (expected 1a, 1b, 1c or 2)");
    }
    return spec;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
    spec.validate();

    std::vector<RunKey> keys;
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        for (std::size_t si = 0; si < spec.schedules.size(); ++si) {
            for (std::size_t ki = 0; ki < spec.seeds.size(); ++ki) {
                keys.push_back({mi, si, ki});
            }
        }
    }

    ExperimentResult result;
    result.spec = spec;
    result.runs.resize(keys.size());

    // Each run owns its objective instance and seed-derived stream.
    run_pool(keys.size(), threads, [&](std::size_t i) {
        const RunKey& key = keys[i];
        RunRecord& rec = result.runs[i];
        rec.method = spec.methods[key.method_i];
        rec.schedule = spec.schedules[key.schedule_i];
        rec.seed = spec.seeds[key.seed_i];

        CemConfig cfg = spec.cem;
        cfg.schedule = rec.schedule;
        Objective objective = SierraFunction::make_objective(spec.objective);
        const MultivariateGaussian init(
            spec.init_mean, spec.init_cov_scale * Eigen::Matrix2d::Identity());
        RngStream rng(rec.seed);

        const auto t0 = Clock::now();
        try {
            rec.trace = dispatch_run(rec.method, objective, init, cfg, rng);
            rec.distance_to_optimum =
                (rec.trace.best_point - Eigen::VectorXd(spec.objective.center)).norm();
        } catch (const std::exception& err) {
            rec.error = err.what();
        }
        rec.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
    });

    // Deterministic reduction: seeds contribute in ascending seed order.
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        for (std::size_t si = 0; si < spec.schedules.size(); ++si) {
            Aggregate agg;
            agg.method = spec.methods[mi];
            agg.schedule = spec.schedules[si];

            std::vector<const RunRecord*> cell;
            for (const auto& run : result.runs) {
                if (run.method == agg.method &&
                    run.schedule.to_string() == agg.schedule.to_string()) {
                    cell.push_back(&run);
                }
            }
            std::sort(cell.begin(), cell.end(),
                      [](const RunRecord* a, const RunRecord* b) { return a->seed < b->seed; });

            agg.runs = static_cast<int>(cell.size());
            const int k_max = spec.cem.k_max;
            agg.bv_mean.assign(k_max, 0.0);
            agg.bv_std.assign(k_max, 0.0);
            double bd_sum = 0.0;
            double rt_sum = 0.0;
            int ok = 0;
            for (const RunRecord* run : cell) {
                if (run->failed()) {
                    ++agg.failures;
                    continue;
                }
                ++ok;
                for (int k = 0; k < k_max; ++k) {
                    agg.bv_mean[k] += run->trace.iterations[k].best_value;
                }
                bd_sum += run->distance_to_optimum;
                rt_sum += run->runtime_s;
            }
            if (ok > 0) {
                for (int k = 0; k < k_max; ++k) {
                    agg.bv_mean[k] /= ok;
                }
                for (const RunRecord* run : cell) {
                    if (run->failed()) {
                        continue;
                    }
                    for (int k = 0; k < k_max; ++k) {
                        const double d = run->trace.iterations[k].best_value - agg.bv_mean[k];
                        agg.bv_std[k] += d * d;
                    }
                }
                for (int k = 0; k < k_max; ++k) {
                    agg.bv_std[k] = std::sqrt(agg.bv_std[k] / ok);
                }
                agg.final_bv = agg.bv_mean[k_max - 1];
                agg.final_bd = bd_sum / ok;
                agg.mean_runtime_s = rt_sum / ok;
            }
            result.aggregates.push_back(std::move(agg));
        }
    }
    return result;
}

std::vector<SummaryRow> summarize(const ExperimentResult& result) {
    std::vector<SummaryRow> rows;
    for (const auto& agg : result.aggregates) {
        if (!agg.valid()) {
            throw std::runtime_error("summarize: aggregate for " + method_name(agg.method) +
                                     "/" + agg.schedule.to_string() + " is invalid (" +
                                     std::to_string(agg.failures) + " of " +
                                     std::to_string(agg.runs) + " runs failed)");
        }
        rows.push_back({result.spec.id, method_name(agg.method), agg.schedule.to_string(),
                        agg.mean_runtime_s, agg.final_bv, agg.final_bd});
    }
    return rows;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
    std::string csv = "experiment,method,schedule,runtime_s,bv,bd\n";
    for (const auto& r : rows) {
        csv += r.experiment + ',' + r.method + ',' + r.schedule + ',' +
               format_double(r.runtime_s) + ',' + format_double(r.bv) + ',' +
               format_double(r.bd) + '\n';
    }
    return csv;
}

std::string curves_to_csv(const ExperimentResult& result) {
    std::string csv = "experiment,method,schedule,iteration,bv_mean,bv_std\n";
    for (const auto& agg : result.aggregates) {
        for (std::size_t k = 0; k < agg.bv_mean.size(); ++k) {
            csv += result.spec.id + ',' + method_name(agg.method) + ',' +
                   agg.schedule.to_string() + ',' + std::to_string(k + 1) + ',' +
                   format_double(agg.bv_mean[k]) + ',' + format_double(agg.bv_std[k]) + '\n';
        }
    }
    return csv;
}

void write_experiment_outputs(const ExperimentResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "traces");

    write_text_file((fs::path(out_dir) / "summary.csv").string(),
                    summary_to_csv(summarize(result)));
    write_text_file((fs::path(out_dir) / "curves.csv").string(), curves_to_csv(result));

    for (const auto& run : result.runs) {
        if (run.failed()) {
            continue;
        }
        RunConfig config;
        config.method = method_name(run.method);
        config.objective = result.spec.objective;
        config.init_mean = result.spec.init_mean;
        config.init_cov_scale = result.spec.init_cov_scale;
        config.cem = result.spec.cem;
        config.cem.schedule = run.schedule;
        config.seed = run.seed;

        std::string name = result.spec.id + "_" + method_name(run.method) + "_" +
                           run.schedule.to_string() + "_" + std::to_string(run.seed) + ".json";
        std::replace(name.begin(), name.end(), ':', '-');
        write_text_file((fs::path(out_dir) / "traces" / name).string(),
                        trace_to_json(config, run.trace).dump(2) + "\n");
    }
}

} // namespace ceopt
