#include "ceopt/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ceopt {

namespace {

// p_G(k) = p (1-p)^k
double geo_pmf(double p, int k) { return p * std::pow(1.0 - p, k); }

int round_to_int(double x) { return static_cast<int>(std::llround(x)); }

} // namespace

void ScheduleSpec::validate() const {
    const bool geometric =
        kind == ScheduleKind::geometric_literal || kind == ScheduleKind::geometric_budgeted;
    if (geometric) {
        if (!(p > 0.0 && p < 1.0)) {
            throw std::invalid_argument("ScheduleSpec: geometric kinds need p in (0,1)");
        }
    } else if (p != 0.0) {
        throw std::invalid_argument("ScheduleSpec: p is only meaningful for geometric kinds");
    }
}

std::string ScheduleSpec::to_string() const {
    switch (kind) {
    case ScheduleKind::uniform:
        return "uniform";
    case ScheduleKind::geometric_literal:
        return "geom-literal:" + std::to_string(p);
    case ScheduleKind::geometric_budgeted:
        return "geom:" + std::to_string(p);
    }
    return "unknown";
}

ScheduleSpec ScheduleSpec::parse(const std::string& text) {
    ScheduleSpec spec;
    if (text == "uniform") {
        return spec;
    }
    const auto with_p = [&text](const std::string& prefix) {
        return std::stod(text.substr(prefix.size()));
    };
    if (text.rfind("geom-literal:", 0) == 0) {
        spec.kind = ScheduleKind::geometric_literal;
        spec.p = with_p("geom-literal:");
    } else if (text.rfind("geom:", 0) == 0) {
        spec.kind = ScheduleKind::geometric_budgeted;
        spec.p = with_p("geom:");
    } else {
        throw std::invalid_argument("unknown schedule '" + text +
                                    "' (expected uniform, geom:<p> or geom-literal:<p>)");
    }
    spec.validate();
    return spec;
}

EvaluationSchedule::EvaluationSchedule(const ScheduleSpec& spec, int m, int m_elite, int k_max)
    : spec_(spec), m_(m), m_elite_(m_elite), k_max_(k_max) {
    spec_.validate();
    if (m < 1 || m_elite < 1 || m_elite > m || k_max < 1) {
        throw std::invalid_argument("EvaluationSchedule: invalid (m, m_elite, k_max)");
    }
    if (spec_.kind == ScheduleKind::geometric_budgeted) {
        // Wants follow the pmf at k-1 (front-loaded), capped by what is left;
        // whatever the pmf tail leaves unspent lands on the final iteration.
        // When the wants exhaust the budget early, trailing iterations
        // (including the last) receive zero.
        const int n_max = m_ * k_max_;
        budgeted_.resize(k_max_);
        int remaining = n_max;
        for (int k = 1; k < k_max_; ++k) {
            const int want = round_to_int(n_max * geo_pmf(spec_.p, k - 1));
            budgeted_[k - 1] = std::min(want, remaining);
            remaining -= budgeted_[k - 1];
        }
        budgeted_[k_max_ - 1] = remaining;
    }
}

Allocation EvaluationSchedule::next(int k) {
    if (k < 1 || k > k_max_) {
        throw std::invalid_argument("EvaluationSchedule: iteration out of range");
    }
    switch (spec_.kind) {
    case ScheduleKind::uniform:
        return {m_, m_elite_};
    case ScheduleKind::geometric_literal: {
        const int n_max = m_ * k_max_;
        int mk = round_to_int(n_max * geo_pmf(spec_.p, k));
        if (k == k_max_) {
            long long spent = 0;
            for (int i = 1; i <= k_max_ - 1; ++i) {
                spent += round_to_int(n_max * geo_pmf(spec_.p, i));
            }
            mk = static_cast<int>(std::min<long long>(n_max - spent, n_max - mk));
        }
        if (mk < 0) {
            throw std::runtime_error("EvaluationSchedule: negative allocation");
        }
        return {mk, std::min(m_elite_, mk)};
    }
    case ScheduleKind::geometric_budgeted: {
        if (k != next_k_) {
            throw std::logic_error("EvaluationSchedule: budgeted kind must be queried in order");
        }
        ++next_k_;
        const int mk = budgeted_[k - 1];
        return {mk, std::min(m_elite_, mk)};
    }
    }
    throw std::logic_error("EvaluationSchedule: unreachable");
}

} // namespace ceopt
