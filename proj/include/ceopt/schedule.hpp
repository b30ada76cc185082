#pragma once

#include <string>
#include <vector>

namespace ceopt {

enum class ScheduleKind {
    uniform,
    geometric_literal,  // per-iteration pmf rounding with a final-step correction
    geometric_budgeted, // front-loaded allocation against a fixed total budget
};

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::uniform;
    double p = 0.0; // geometric parameter, required in (0,1) for geometric kinds

    void validate() const;
    std::string to_string() const;
    /// Parses "uniform", "geom:<p>" or "geom-literal:<p>".
    static ScheduleSpec parse(const std::string& text);
};

struct Allocation {
    int m;
    int m_elite;
};

/// Per-iteration reallocation of the fixed true-evaluation budget
/// N_max = m * k_max.
///
/// uniform            -> (m, m_elite) every iteration.
/// geometric_literal  -> m_k = round(N_max p (1-p)^k), with the final
///                       iteration corrected to min(N_max - spent, N_max - m_k).
/// geometric_budgeted -> wants m_k = round(N_max p (1-p)^(k-1)); the budget
///                       the pmf tail would leave unspent is folded into the
///                       first iteration, and each want is capped by what is
///                       left, so the total is exactly N_max and trailing
///                       iterations may receive zero.
///
/// Geometric kinds return m_elite_k = min(m_elite, m_k). The budgeted kind is
/// stateful: next() must be called with k = 1, 2, ..., k_max in order.
class EvaluationSchedule {
public:
    EvaluationSchedule(const ScheduleSpec& spec, int m, int m_elite, int k_max);

    Allocation next(int k);

    int total_budget() const { return m_ * k_max_; }

private:
    ScheduleSpec spec_;
    int m_;
    int m_elite_;
    int k_max_;
    int next_k_ = 1;
    std::vector<int> budgeted_; // precomputed allocation for the budgeted kind
};

} // namespace ceopt
