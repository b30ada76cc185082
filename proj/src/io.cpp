#include "ceopt/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ceopt {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out.push_back(vector_to_json(m.row(i).transpose()));
    }
    return out;
}

json schedule_to_json(const ScheduleSpec& spec) {
    json out;
    out["kind"] = spec.to_string();
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

nlohmann::json to_json(const Proposal& p) {
    json out;
    if (const auto* g = std::get_if<MultivariateGaussian>(&p)) {
        out["type"] = "gaussian";
        out["mean"] = vector_to_json(g->mean());
        out["covariance"] = matrix_to_json(g->covariance());
    } else {
        const auto& mix = std::get<GaussianMixture>(p);
        out["type"] = "mixture";
        out["weights"] = vector_to_json(mix.weights());
        json comps = json::array();
        for (const auto& c : mix.components()) {
            json cj;
            cj["mean"] = vector_to_json(c.mean());
            cj["covariance"] = matrix_to_json(c.covariance());
            comps.push_back(std::move(cj));
        }
        out["components"] = std::move(comps);
    }
    return out;
}

nlohmann::json to_json(const RunConfig& config) {
    json out;
    out["method"] = config.method;
    out["objective"] = {{"mu", {config.objective.center(0), config.objective.center(1)}},
                        {"sigma", config.objective.sigma},
                        {"delta", config.objective.delta},
                        {"eta", config.objective.eta},
                        {"decay", config.objective.decay ? 1 : 0}};
    out["init"] = {{"mean", {config.init_mean(0), config.init_mean(1)}},
                   {"cov_scale", config.init_cov_scale}};
    out["m"] = config.cem.m;
    out["m_elite"] = config.cem.m_elite;
    out["k_max"] = config.cem.k_max;
    out["schedule"] = schedule_to_json(config.cem.schedule);
    out["surrogate_sample_factor"] = config.cem.surrogate_sample_factor;
    if (config.cem.sub_ce) {
        out["sub_ce"] = {{"m", config.cem.sub_ce->m},
                         {"m_elite", config.cem.sub_ce->m_elite},
                         {"k_max", config.cem.sub_ce->k_max}};
    } else {
        out["sub_ce"] = nullptr;
    }
    out["seed"] = config.seed;
    return out;
}

nlohmann::json trace_to_json(const RunConfig& config, const OptimizationTrace& trace) {
    json doc;
    doc["config"] = to_json(config);
    doc["seed"] = config.seed;

    json iters = json::array();
    for (const auto& rec : trace.iterations) {
        json it;
        it["k"] = rec.k;
        it["m"] = rec.m_k;
        it["m_elite"] = rec.m_elite_k;
        it["samples"] = matrix_to_json(rec.samples);
        it["values"] = vector_to_json(rec.values);
        it["elite_indices"] = rec.elite_indices;
        it["gamma"] = std::isnan(rec.gamma) ? json(nullptr) : json(rec.gamma);
        it["fit"] = rec.fitted ? to_json(*rec.fitted) : json(nullptr);
        it["best_value"] = rec.best_value;
        it["best_point"] = vector_to_json(rec.best_point);
        it["cumulative_evals"] = rec.cumulative_evals;
        if (rec.gp_fallback) {
            it["gp_fallback"] = true;
        }
        iters.push_back(std::move(it));
    }
    doc["iterations"] = std::move(iters);

    json summary;
    summary["best_value"] = trace.best_value;
    summary["best_point"] = vector_to_json(trace.best_point);
    summary["total_evals"] = trace.total_evals;
    summary["distribution"] =
        trace.final_distribution ? to_json(*trace.final_distribution) : json(nullptr);
    doc["final"] = std::move(summary);
    return doc;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << contents;
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

std::string grid_to_csv(const SierraGrid& grid) {
    std::string csv = "x1,x2,S\n";
    csv.reserve(csv.size() + grid.rows() * 24);
    for (std::size_t i = 0; i < grid.rows(); ++i) {
        csv += format_double(grid.x1[i]);
        csv += ',';
        csv += format_double(grid.x2[i]);
        csv += ',';
        csv += format_double(grid.value[i]);
        csv += '\n';
    }
    return csv;
}

} // namespace ceopt
