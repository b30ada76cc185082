#pragma once

#include <cstdint>
#include <string>

#include "json.hpp" // vendored nlohmann/json

#include "ceopt/cem.hpp"
#include "ceopt/sierra.hpp"

namespace ceopt {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

/// Everything needed to re-run a single optimization; echoed into the trace.
struct RunConfig {
    std::string method;          // ce | ce-surrogate | ce-mixture
    SierraParams objective;
    Eigen::Vector2d init_mean{0.0, 0.0};
    double init_cov_scale = 200.0;
    CemConfig cem;
    std::uint64_t seed = 0;
};

nlohmann::json to_json(const Proposal& p);
nlohmann::json to_json(const RunConfig& config);

/// Per-run trace document: config echo, seed, iteration records and the final
/// distribution. Timing is intentionally excluded so identical seeds produce
/// byte-identical files.
nlohmann::json trace_to_json(const RunConfig& config, const OptimizationTrace& trace);

void write_text_file(const std::string& path, const std::string& contents);

/// Grid CSV with header x1,x2,S.
std::string grid_to_csv(const SierraGrid& grid);

} // namespace ceopt
