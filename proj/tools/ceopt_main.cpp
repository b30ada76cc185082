// Command-line driver: single optimization runs, the canned experiments, and
// sierra surface export.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "ceopt/bench.hpp"
#include "ceopt/io.hpp"

namespace {

using namespace ceopt;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

Eigen::Vector2d parse_pair(const std::string& text, const std::string& flag) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        throw CLI::ValidationError(flag, "expected two comma-separated numbers");
    }
    try {
        return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError(flag, "expected two comma-separated numbers");
    }
}

struct RunArgs {
    std::string method = "ce";
    std::string mu = "0,0";
    double cov_scale = 200.0;
    int m = 10;
    int m_elite = 5;
    int k_max = 10;
    std::string schedule = "uniform";
    std::uint64_t seed = 0;
    double eta = 6.0;
    double sigma = 3.0;
    double delta = 2.0;
    int decay = 1;
    std::string out = "trace.json";
};

int cmd_run(const RunArgs& args) {
    RunConfig config;
    config.method = args.method;
    // --mu moves the initial proposal; the objective stays centered at the origin.
    config.objective.sigma = args.sigma;
    config.objective.delta = args.delta;
    config.objective.eta = args.eta;
    config.objective.decay = args.decay != 0;
    config.init_mean = parse_pair(args.mu, "--mu");
    config.init_cov_scale = args.cov_scale;
    config.cem.m = args.m;
    config.cem.m_elite = args.m_elite;
    config.cem.k_max = args.k_max;
    config.cem.schedule = ScheduleSpec::parse(args.schedule);
    config.seed = args.seed;

    const Method method = parse_method(args.method);
    config.cem.validate();

    Objective objective = SierraFunction::make_objective(config.objective);
    const MultivariateGaussian init(config.init_mean,
                                    config.init_cov_scale * Eigen::Matrix2d::Identity());
    RngStream rng(config.seed);

    OptimizationTrace trace;
    switch (method) {
    case Method::ce:
        trace = cross_entropy_method(objective, init, config.cem, rng);
        break;
    case Method::ce_surrogate:
        trace = ce_surrogate(objective, Proposal(init), config.cem, rng);
        break;
    case Method::ce_mixture:
        trace = ce_mixture(objective, Proposal(init), config.cem, rng);
        break;
    }

    write_text_file(args.out, trace_to_json(config, trace).dump(2) + "\n");
    std::cout << "best_value " << format_double(trace.best_value) << "\n"
              << "best_point " << format_double(trace.best_point(0)) << ","
              << format_double(trace.best_point(1)) << "\n"
              << "evaluations " << trace.total_evals << "\n"
              << "trace " << args.out << "\n";
    return kExitOk;
}

struct ExperimentArgs {
    std::string id;
    int seeds = 50;
    std::string out = "results";
    int k_max = 0; // 0 keeps the built-in value
};

int cmd_experiment(const ExperimentArgs& args) {
    ExperimentSpec spec = ExperimentSpec::builtin(args.id, args.seeds);
    if (args.k_max > 0) {
        spec.cem.k_max = args.k_max;
    }
    const ExperimentResult result = run_experiment(spec);
    write_experiment_outputs(result, args.out);

    std::cout << "experiment " << spec.id << " (" << spec.seeds.size() << " seeds)\n";
    std::cout << "method,schedule,runtime_s,bv,bd\n";
    for (const auto& row : summarize(result)) {
        std::cout << row.method << "," << row.schedule << ","
                  << format_double(row.runtime_s) << "," << format_double(row.bv) << ","
                  << format_double(row.bd) << "\n";
    }
    std::cout << "outputs " << args.out << "\n";
    return kExitOk;
}

struct SierraArgs {
    double eta = 6.0;
    double sigma = 3.0;
    double delta = 2.0;
    std::string mu = "0,0";
    int decay = 1;
    std::string lo = "-15,-15";
    std::string hi = "15,15";
    double step = 0.25;
    std::string out = "sierra.csv";
};

int cmd_sierra(const SierraArgs& args) {
    SierraParams params;
    params.center = parse_pair(args.mu, "--mu");
    params.sigma = args.sigma;
    params.delta = args.delta;
    params.eta = args.eta;
    params.decay = args.decay != 0;

    if (!(args.step > 0.0)) {
        throw CLI::ValidationError("--step", "must be positive");
    }

    const SierraFunction f(params);
    const SierraGrid grid =
        sierra_grid(f, parse_pair(args.lo, "--lo"), parse_pair(args.hi, "--hi"), args.step);
    write_text_file(args.out, grid_to_csv(grid));

    const std::size_t at = grid.argmin();
    std::cout << "rows " << grid.rows() << "\n"
              << "min " << format_double(grid.value[at]) << " at "
              << format_double(grid.x1[at]) << "," << format_double(grid.x2[at]) << "\n"
              << "grid " << args.out << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-entropy method variants with surrogate and mixture refits"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "Run one optimization and write its trace");
    run->add_option("--method", run_args.method, "ce | ce-surrogate | ce-mixture")
        ->check(CLI::IsMember({"ce", "ce-surrogate", "ce-mixture"}));
    run->add_option("--mu", run_args.mu, "initial mean, e.g. 0,0");
    run->add_option("--cov-scale", run_args.cov_scale, "initial covariance is this times I");
    run->add_option("--m", run_args.m, "samples per iteration");
    run->add_option("--m-elite", run_args.m_elite, "elite count");
    run->add_option("--k-max", run_args.k_max, "iterations");
    run->add_option("--schedule", run_args.schedule, "uniform | geom:<p> | geom-literal:<p>");
    run->add_option("--seed", run_args.seed, "random seed");
    run->add_option("--eta", run_args.eta, "sierra spread rate");
    run->add_option("--sigma", run_args.sigma, "sierra scale");
    run->add_option("--delta", run_args.delta, "sierra cluster distance");
    run->add_option("--decay", run_args.decay, "sierra decay flag (0 or 1)")
        ->check(CLI::Range(0, 1));
    run->add_option("--out", run_args.out, "trace output path");

    ExperimentArgs exp_args;
    CLI::App* experiment =
        app.add_subcommand("experiment", "Reproduce a canned experiment and write CSV results");
    experiment->add_option("--id", exp_args.id, "1a | 1b | 1c | 2")
        ->required()
        ->check(CLI::IsMember({"1a", "1b", "1c", "2"}));
    experiment->add_option("--seeds", exp_args.seeds, "number of seeds (0..n-1)")
        ->check(CLI::PositiveNumber);
    experiment->add_option("--out", exp_args.out, "output directory");
    experiment->add_option("--k-max", exp_args.k_max, "override iteration count");

    SierraArgs sierra_args;
    CLI::App* sierra = app.add_subcommand("sierra", "Export the sierra surface as CSV");
    sierra->add_option("--eta", sierra_args.eta, "spread rate");
    sierra->add_option("--sigma", sierra_args.sigma, "scale");
    sierra->add_option("--delta", sierra_args.delta, "cluster distance");
    sierra->add_option("--mu", sierra_args.mu, "center, e.g. 0,0");
    sierra->add_option("--decay", sierra_args.decay, "decay flag (0 or 1)")
        ->check(CLI::Range(0, 1));
    sierra->add_option("--lo", sierra_args.lo, "lower corner, e.g. -15,-15");
    sierra->add_option("--hi", sierra_args.hi, "upper corner, e.g. 15,15");
    sierra->add_option("--step", sierra_args.step, "grid step");
    sierra->add_option("--out", sierra_args.out, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help
        }
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run->parsed()) {
            return cmd_run(run_args);
        }
        if (experiment->parsed()) {
            return cmd_experiment(exp_args);
        }
        if (sierra->parsed()) {
            return cmd_sierra(sierra_args);
        }
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
