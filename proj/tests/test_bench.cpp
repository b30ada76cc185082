#include <doctest.h>

#include <charconv>
#include <cmath>
#include <sstream>

#include "ceopt/bench.hpp"
#include "oracles.hpp"

using namespace ceopt;

namespace {

ExperimentSpec small_spec() {
    ExperimentSpec spec = ExperimentSpec::builtin("1a", 4);
    spec.cem.k_max = 4; // keep unit tests quick
    return spec;
}

} // namespace

TEST_CASE("builtin specs lock the documented setups") {
    const ExperimentSpec a = ExperimentSpec::builtin("1a");
    CHECK(a.init_mean == Eigen::Vector2d(0, 0));
    CHECK(a.init_cov_scale == 200.0);
    CHECK(a.cem.m == 10);
    CHECK(a.cem.m_elite == 5);
    CHECK(a.cem.k_max == 10);
    CHECK(a.seeds.size() == 50);
    CHECK(a.methods.size() == 3);

    const ExperimentSpec b = ExperimentSpec::builtin("1b");
    CHECK(b.init_mean == Eigen::Vector2d(-50, -50));
    CHECK(b.init_cov_scale == 2000.0);

    const ExperimentSpec c = ExperimentSpec::builtin("1c");
    CHECK(c.cem.m == 5);
    CHECK(c.cem.m_elite == 3);

    const ExperimentSpec two = ExperimentSpec::builtin("2");
    CHECK(two.methods == std::vector<Method>{Method::ce_surrogate});
    CHECK(two.schedules.size() == 4);

    CHECK_THROWS_AS(ExperimentSpec::builtin("7"), std::invalid_argument);
}

TEST_CASE("single-seed aggregates equal the underlying trace") {
    ExperimentSpec spec = small_spec();
    spec.seeds = {11};
    spec.methods = {Method::ce};
    const ExperimentResult res = run_experiment(spec);
    REQUIRE(res.runs.size() == 1);
    REQUIRE(res.aggregates.size() == 1);
    const RunRecord& run = res.runs[0];
    const Aggregate& agg = res.aggregates[0];
    CHECK(agg.final_bv == run.trace.best_value);
    CHECK(agg.final_bd == run.distance_to_optimum);
    for (int k = 0; k < spec.cem.k_max; ++k) {
        CHECK(agg.bv_mean[k] == run.trace.iterations[k].best_value);
        CHECK(agg.bv_std[k] == 0.0);
    }
}

TEST_CASE("experiment results are deterministic and seed-order invariant") {
    ExperimentSpec spec = small_spec();
    const ExperimentResult a = run_experiment(spec);
    const ExperimentResult b = run_experiment(spec);
    REQUIRE(a.aggregates.size() == b.aggregates.size());
    for (std::size_t i = 0; i < a.aggregates.size(); ++i) {
        CHECK(a.aggregates[i].final_bv == b.aggregates[i].final_bv);
        CHECK(a.aggregates[i].final_bd == b.aggregates[i].final_bd);
        CHECK(a.aggregates[i].bv_mean == b.aggregates[i].bv_mean);
    }

    ExperimentSpec permuted = spec;
    std::reverse(permuted.seeds.begin(), permuted.seeds.end());
    const ExperimentResult c = run_experiment(permuted);
    for (std::size_t i = 0; i < a.aggregates.size(); ++i) {
        CHECK(a.aggregates[i].final_bv == c.aggregates[i].final_bv);
        CHECK(a.aggregates[i].bv_mean == c.aggregates[i].bv_mean);
    }
}

TEST_CASE("aggregation matches an independent recomputation") {
    ExperimentSpec spec = small_spec();
    spec.methods = {Method::ce, Method::ce_surrogate};
    const ExperimentResult res = run_experiment(spec);
    for (const auto& agg : res.aggregates) {
        std::vector<const RunRecord*> cell;
        for (const auto& run : res.runs) {
            if (run.method == agg.method &&
                run.schedule.to_string() == agg.schedule.to_string()) {
                cell.push_back(&run);
            }
        }
        std::sort(cell.begin(), cell.end(),
                  [](const RunRecord* x, const RunRecord* y) { return x->seed < y->seed; });
        for (int k = 0; k < spec.cem.k_max; ++k) {
            double mean = 0.0;
            for (const auto* run : cell) {
                mean += run->trace.iterations[k].best_value;
            }
            mean /= static_cast<double>(cell.size());
            CHECK(std::abs(agg.bv_mean[k] - mean) <= 1e-12 * std::abs(mean));
        }
        double bd = 0.0;
        for (const auto* run : cell) {
            bd += run->distance_to_optimum;
        }
        CHECK(std::abs(agg.final_bd - bd / cell.size()) <= 1e-12 * agg.final_bd);
    }
}

TEST_CASE("summarize emits one row per method-schedule pair") {
    ExperimentSpec spec = small_spec();
    const auto rows = summarize(run_experiment(spec));
    CHECK(rows.size() == 3);

    spec.methods.clear();
    const auto empty_rows = summarize(run_experiment(spec));
    CHECK(empty_rows.empty());
}

TEST_CASE("csv outputs round-trip byte-identically through parse and reserialize") {
    ExperimentSpec spec = small_spec();
    spec.seeds = {0, 1};
    const ExperimentResult res = run_experiment(spec);
    const std::string curves = curves_to_csv(res);

    // parse every numeric field and re-render with the same formatter
    std::istringstream in(curves);
    std::string line;
    std::getline(in, line);
    std::string rebuilt = line + "\n";
    while (std::getline(in, line)) {
        std::string out;
        std::size_t start = 0;
        int field = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            const std::string tok = line.substr(start, comma - start);
            if (field >= 4) { // bv_mean, bv_std
                double v = 0.0;
                std::from_chars(tok.data(), tok.data() + tok.size(), v);
                out += format_double(v);
            } else {
                out += tok;
            }
            if (comma == std::string::npos) {
                break;
            }
            out += ',';
            start = comma + 1;
            ++field;
        }
        rebuilt += out + "\n";
    }
    CHECK(rebuilt == curves);
}

TEST_CASE("trace json is stable and excludes timing") {
    ExperimentSpec spec = small_spec();
    spec.seeds = {7};
    spec.methods = {Method::ce_surrogate};
    const ExperimentResult r1 = run_experiment(spec);
    const ExperimentResult r2 = run_experiment(spec);

    RunConfig config;
    config.method = "ce-surrogate";
    config.objective = spec.objective;
    config.init_mean = spec.init_mean;
    config.init_cov_scale = spec.init_cov_scale;
    config.cem = spec.cem;
    config.seed = 7;
    const std::string j1 = trace_to_json(config, r1.runs[0].trace).dump(2);
    const std::string j2 = trace_to_json(config, r2.runs[0].trace).dump(2);
    CHECK(j1 == j2);
    CHECK(j1.find("wall") == std::string::npos);
    CHECK(j1.find("runtime") == std::string::npos);
}

TEST_CASE("seed validation") {
    ExperimentSpec spec = small_spec();
    spec.seeds = {3, 3};
    CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);
    spec.seeds.clear();
    CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);
}
